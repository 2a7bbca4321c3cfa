//! Finitely generated groups with exact normal forms and word-length
//! filtration. Supported kinds: trivial, free, free abelian — every built-in
//! scenario lives over one of these and the word problem stays exact.

mod algebra;
mod word;

pub use algebra::{GAElement, GAMatrix, MCElement};
pub use word::{GroupHom, GroupSpec, NormalForm, Word};
