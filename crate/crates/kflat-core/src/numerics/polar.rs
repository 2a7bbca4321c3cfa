//! Polar decomposition M = U H and partial-isometry extraction.
//!
//! Everything routes through the polished Hermitian eigensolver of M*M:
//! the SVD backend loses orthogonality on degenerate singular values.

use super::cmatrix::{CMatrix, C64};
use super::eigen::hermitian_eigen;
use crate::error::{KflatError, Result};

/// Default smallest-singular-value threshold for `polar`.
pub const TOL_SING: f64 = 1e-8;

fn gram_spectrum(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let g = m.adjoint().mul(m);
    let spec = hermitian_eigen(&g)?;
    Ok((spec.eigenvalues, spec.eigenvectors))
}

/// Polar decomposition of a square matrix: M = U H with U unitary and H
/// positive. Errors with `SingularInput` when the smallest singular value
/// is at or below `tol_sing`.
pub fn polar(m: &CMatrix, tol_sing: f64) -> Result<(CMatrix, CMatrix)> {
    if !m.is_square() {
        return Err(KflatError::ShapeMismatch {
            r1: m.rows(),
            c1: m.cols(),
            r2: m.cols(),
            c2: m.cols(),
        });
    }
    let (lam, q) = gram_spectrum(m)?;
    let sigma_min = lam.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    if !(sigma_min > tol_sing) {
        return Err(KflatError::SingularInput { sigma_min, tol: tol_sing });
    }
    let inv_sqrt = CMatrix::diag(
        &lam.iter().map(|&l| C64::new(1.0 / l.max(0.0).sqrt(), 0.0)).collect::<Vec<_>>(),
    );
    let sqrt = CMatrix::diag(
        &lam.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)).collect::<Vec<_>>(),
    );
    let u = m.mul(&q.mul(&inv_sqrt).mul(&q.adjoint()));
    let h = q.mul(&sqrt).mul(&q.adjoint());
    Ok((u, h))
}

/// Unitary part of the polar decomposition.
pub fn polar_unitary(m: &CMatrix, tol_sing: f64) -> Result<CMatrix> {
    polar(m, tol_sing).map(|(u, _)| u)
}

/// Partial isometry supported on the singular values above tol; returns the
/// isometry and its rank. Used where the input is only supported on a range.
pub fn polar_partial(m: &CMatrix, tol: f64) -> (CMatrix, usize) {
    let Ok((lam, q)) = gram_spectrum(m) else {
        return (CMatrix::zeros(m.rows(), m.cols()), 0);
    };
    let inv_sqrt = CMatrix::diag(
        &lam.iter()
            .map(|&l| {
                if l.max(0.0).sqrt() > tol {
                    C64::new(1.0 / l.sqrt(), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect::<Vec<_>>(),
    );
    let rank = lam.iter().filter(|&&l| l.max(0.0).sqrt() > tol).count();
    (m.mul(&q.mul(&inv_sqrt).mul(&q.adjoint())), rank)
}

/// Smallest singular value via the Gram spectrum.
pub fn sigma_min(m: &CMatrix) -> Result<f64> {
    let (lam, _) = gram_spectrum(m)?;
    Ok(lam.first().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// The correction x (x*x)^{-1/2} for near-isometries; errors with
/// `PolarBreakdown` when x*x has an eigenvalue at or below `lambda_tol`.
pub fn polar_correct(x: &CMatrix, lambda_tol: f64) -> Result<CMatrix> {
    let (lam, q) = gram_spectrum(x)?;
    let lambda_min = lam.first().copied().unwrap_or(0.0);
    if lambda_min <= lambda_tol {
        return Err(KflatError::PolarBreakdown { lambda_min });
    }
    let inv_sqrt = CMatrix::diag(
        &lam.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)).collect::<Vec<_>>(),
    );
    Ok(x.mul(&q.mul(&inv_sqrt).mul(&q.adjoint())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn polar_of_unitary_is_identity_h() {
        let w = CMatrix::diag(&[
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, -1.2),
            Complex64::from_polar(1.0, 2.2),
        ]);
        let (u, h) = polar(&w, TOL_SING).unwrap();
        assert!(u.sub(&w).op_norm() < 1e-12);
        assert!(h.sub(&CMatrix::identity(3)).op_norm() < 1e-12);
    }

    #[test]
    fn polar_of_scaled_identity() {
        let m = CMatrix::identity(4).scale(C64::new(2.0, 0.0));
        let (u, h) = polar(&m, TOL_SING).unwrap();
        assert!(u.sub(&CMatrix::identity(4)).op_norm() < 1e-12);
        assert!(h.sub(&m).op_norm() < 1e-12);
    }

    #[test]
    fn polar_diagonal_example() {
        let m = CMatrix::diag(&[C64::new(2.0, 0.0), C64::new(0.0, 1.0)]);
        let (u, h) = polar(&m, TOL_SING).unwrap();
        let exp_u = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let exp_h = CMatrix::diag(&[C64::new(2.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(u.sub(&exp_u).op_norm() < 1e-12);
        assert!(h.sub(&exp_h).op_norm() < 1e-12);
    }

    #[test]
    fn polar_rejects_singular() {
        let m = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(polar(&m, TOL_SING), Err(KflatError::SingularInput { .. })));
    }

    #[test]
    fn polar_unitary_is_unitary() {
        let m = CMatrix::from_fn(8, 8, |i, j| {
            C64::new(
                if i == j { 1.0 } else { 0.0 } + 0.05 * ((i * j) as f64).sin(),
                0.03 * (i as f64 - j as f64),
            )
        });
        let (u, h) = polar(&m, TOL_SING).unwrap();
        assert!(u.unitary_defect() < 1e-9);
        assert!(u.mul(&h).sub(&m).op_norm() < 1e-10);
    }

    #[test]
    fn partial_isometry_on_degenerate_values() {
        // rank-deficient input with a ninefold-degenerate singular value:
        // the kept part must be an exact partial isometry
        let p = CMatrix::from_fn(12, 12, |i, j| {
            if i == j && i < 9 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let ph = CMatrix::from_fn(12, 12, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 0.37 * i as f64)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let t = ph.mul(&p);
        let (w, rank) = polar_partial(&t, 1e-8);
        assert_eq!(rank, 9);
        let ww = w.mul(&w.adjoint());
        assert!(ww.mul(&ww).sub(&ww).op_norm() < 1e-12);
        assert!(w.adjoint().mul(&w).sub(&p).op_norm() < 1e-12);
    }
}
