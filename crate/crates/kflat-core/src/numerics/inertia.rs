//! Eigenvalue counting for Hermitian matrices via LDL^H factorization
//! (Bunch-Kaufman partial pivoting) and Sylvester's law of inertia.
//!
//! Counting avoids full eigendecompositions on the large evaluated index
//! classes, where only the number of eigenvalues above 1/2 is needed.

use num_complex::Complex64;

use super::cmatrix::CMatrix;
use crate::error::{KflatError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Inertia of the Hermitian matrix (A - shift I).
pub fn inertia_shifted(a: &CMatrix, shift: f64) -> Result<Inertia> {
    let n = a.rows();
    if !a.is_square() {
        return Err(KflatError::ShapeMismatch { r1: a.rows(), c1: a.cols(), r2: n, c2: n });
    }
    let scale = a.max_abs_entry().max(1.0);
    // column-major working copy of A - shift
    let mut m: Vec<Complex64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut v = a.get(i, j);
            if i == j {
                v -= Complex64::new(shift, 0.0);
            }
            m.push(v);
        }
    }
    let zero_tol = 1e-12 * scale;
    ldlh_inertia(&mut m, n, zero_tol)
}

/// Number of eigenvalues of Hermitian A strictly above `threshold`.
pub fn eigencount_above(a: &CMatrix, threshold: f64) -> Result<usize> {
    let inertia = inertia_shifted(a, threshold)?;
    if inertia.zero > 0 {
        return Err(KflatError::GapClosed { eigenvalue: threshold });
    }
    Ok(inertia.positive)
}

const ALPHA: f64 = 0.6403882032022076; // (1 + sqrt(17)) / 8

fn ldlh_inertia(m: &mut [Complex64], n: usize, zero_tol: f64) -> Result<Inertia> {
    let mut inertia = Inertia { negative: 0, zero: 0, positive: 0 };
    let mut k = 0usize;
    while k < n {
        let absakk = m[k + k * n].norm();
        // largest subdiagonal entry in column k
        let (imax, colmax) = {
            let mut best = (k, 0.0_f64);
            for i in (k + 1)..n {
                let v = m[i + k * n].norm();
                if v > best.1 {
                    best = (i, v);
                }
            }
            best
        };
        let mut kstep = 1usize;
        let mut kp = k;
        if absakk.max(colmax) <= zero_tol {
            inertia.zero += 1;
            k += 1;
            continue;
        }
        if absakk >= ALPHA * colmax {
            // 1x1 pivot at k
        } else {
            // rowmax: largest off-diagonal modulus in row/col imax
            let mut rowmax = 0.0_f64;
            for j in k..imax {
                rowmax = rowmax.max(m[imax + j * n].norm());
            }
            for i in (imax + 1)..n {
                rowmax = rowmax.max(m[i + imax * n].norm());
            }
            if absakk >= ALPHA * colmax * (colmax / rowmax) {
                // 1x1 pivot at k
            } else if m[imax + imax * n].norm() >= ALPHA * rowmax {
                kp = imax; // 1x1 pivot, swap k <-> imax
            } else {
                kstep = 2;
                kp = imax; // 2x2 pivot, swap k+1 <-> imax
            }
        }
        let kk = k + kstep - 1;
        if kp != kk {
            hermitian_swap(m, n, kk, kp);
        }
        if kstep == 1 {
            let d = m[k + k * n].re;
            if d.abs() <= zero_tol {
                inertia.zero += 1;
            } else if d > 0.0 {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
            }
            if d.abs() > zero_tol && k + 1 < n {
                rank1_update(m, n, k, d);
            }
            k += 1;
        } else {
            let a11 = m[k + k * n].re;
            let a21 = m[(k + 1) + k * n];
            let a22 = m[(k + 1) + (k + 1) * n].re;
            let det = a11 * a22 - a21.norm_sqr();
            if det < 0.0 {
                inertia.positive += 1;
                inertia.negative += 1;
            } else if a11 + a22 > 0.0 {
                inertia.positive += 2;
            } else {
                inertia.negative += 2;
            }
            if k + 2 < n {
                rank2_update(m, n, k, a11, a21, a22, det);
            }
            k += 2;
        }
    }
    Ok(inertia)
}

fn hermitian_swap(m: &mut [Complex64], n: usize, p: usize, q: usize) {
    // swap rows/cols p and q of the lower-stored Hermitian matrix (p < q)
    let (p, q) = if p < q { (p, q) } else { (q, p) };
    if p == q {
        return;
    }
    // diagonal entries
    m.swap(p + p * n, q + q * n);
    // leading parts: rows p and q over columns < p
    for j in 0..p {
        m.swap(p + j * n, q + j * n);
    }
    // between p and q: A[i, p] <-> conj(A[q, i]) for p < i < q
    for i in (p + 1)..q {
        let a = m[i + p * n];
        let b = m[q + i * n];
        m[i + p * n] = b.conj();
        m[q + i * n] = a.conj();
    }
    // pivot corner conjugate
    m[q + p * n] = m[q + p * n].conj();
    // trailing parts: columns p and q below q
    for i in (q + 1)..n {
        m.swap(i + p * n, i + q * n);
    }
}

fn rank1_update(m: &mut [Complex64], n: usize, k: usize, d: f64) {
    // l = A[k+1.., k] / d; A22 -= d * l l^H  (lower triangle only)
    let col_k: Vec<Complex64> = ((k + 1)..n).map(|i| m[i + k * n]).collect();
    let update_col = |j: usize, col_j: &mut [Complex64]| {
        let lj = col_k[j - (k + 1)] / d;
        let c = lj.conj();
        for i in j..n {
            let li = col_k[i - (k + 1)];
            col_j[i] -= li * c;
        }
    };
    update_trailing(m, n, k + 1, update_col);
}

#[allow(clippy::too_many_arguments)]
fn rank2_update(m: &mut [Complex64], n: usize, k: usize, a11: f64, a21: Complex64, a22: f64, det: f64) {
    // W = A[k+2.., k..k+2] D^{-1};  A22 -= W * A[k+2.., k..k+2]^H
    let c1: Vec<Complex64> = ((k + 2)..n).map(|i| m[i + k * n]).collect();
    let c2: Vec<Complex64> = ((k + 2)..n).map(|i| m[i + (k + 1) * n]).collect();
    // D^{-1} = 1/det [[a22, -conj(a21)], [-a21, a11]]
    let w1: Vec<Complex64> = c1
        .iter()
        .zip(&c2)
        .map(|(&x, &y)| (x * a22 - y * a21) / det)
        .collect();
    let w2: Vec<Complex64> = c1
        .iter()
        .zip(&c2)
        .map(|(&x, &y)| (y * a11 - x * a21.conj()) / det)
        .collect();
    let update_col = |j: usize, col_j: &mut [Complex64]| {
        let t = j - (k + 2);
        let d1 = c1[t].conj();
        let d2 = c2[t].conj();
        for i in j..n {
            let s = i - (k + 2);
            col_j[i] -= w1[s] * d1 + w2[s] * d2;
        }
    };
    update_trailing(m, n, k + 2, update_col);
}

#[cfg(feature = "parallel")]
fn update_trailing(
    m: &mut [Complex64],
    n: usize,
    start: usize,
    update_col: impl Fn(usize, &mut [Complex64]) + Sync,
) {
    use rayon::prelude::*;
    if n - start >= 256 {
        let tail = &mut m[start * n..];
        tail.par_chunks_mut(n).enumerate().for_each(|(off, col)| {
            update_col(start + off, col);
        });
    } else {
        for j in start..n {
            let col = &mut m[j * n..(j + 1) * n];
            update_col(j, col);
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn update_trailing(
    m: &mut [Complex64],
    n: usize,
    start: usize,
    update_col: impl Fn(usize, &mut [Complex64]) + Sync,
) {
    for j in start..n {
        let col = &mut m[j * n..(j + 1) * n];
        update_col(j, col);
    }
}

/// Distance from `shift` to the nearest eigenvalue of Hermitian A, via
/// inverse power iteration (LU solves).
pub fn min_eigen_distance(a: &CMatrix, shift: f64) -> Result<f64> {
    let n = a.rows();
    let shifted = a.sub(&CMatrix::scalar(n, Complex64::new(shift, 0.0)));
    let lu = shifted.inner().clone().lu();
    let mut v = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.2 * ((i as f64) * 0.9).sin(), 0.1 * ((i as f64) * 1.7).cos())
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut mu = f64::INFINITY;
    for _ in 0..200 {
        let Some(w) = lu.solve(&v) else {
            return Ok(0.0); // exactly singular: eigenvalue at the shift
        };
        let wn = w.norm();
        if wn == 0.0 {
            return Ok(f64::INFINITY);
        }
        let new_mu = 1.0 / wn;
        let w = w / Complex64::new(wn, 0.0);
        let done = (new_mu - mu).abs() <= 1e-10 * new_mu.max(1e-30);
        v = w;
        mu = new_mu;
        if done {
            break;
        }
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::hermitian_eigen;
    use num_complex::Complex64;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn inertia_matches_eigen_counts() {
        for seed in 0..6u64 {
            let a = random_hermitian(24, seed + 1);
            let spec = hermitian_eigen(&a).unwrap();
            for &tau in &[-0.4, -0.05, 0.0, 0.03, 0.3] {
                let expected = spec.eigenvalues.iter().filter(|&&l| l > tau).count();
                let got = eigencount_above(&a, tau).unwrap();
                assert_eq!(got, expected, "seed {seed} tau {tau}");
            }
        }
    }

    #[test]
    fn inertia_diag() {
        let a = CMatrix::diag(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.2, 0.0),
        ]);
        assert_eq!(eigencount_above(&a, 0.5).unwrap(), 2);
        assert_eq!(eigencount_above(&a, 0.0).unwrap(), 3);
    }

    #[test]
    fn min_distance_detects_gap() {
        let a = CMatrix::diag(&[
            Complex64::new(0.02, 0.0),
            Complex64::new(0.95, 0.0),
            Complex64::new(1.03, 0.0),
        ]);
        let d = min_eigen_distance(&a, 0.5).unwrap();
        assert!((d - 0.45).abs() < 1e-8, "gap measured {d}");
    }
}
