fn main() {
    println!("kflat placeholder");
}
