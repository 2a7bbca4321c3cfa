//! Hermitian spectral calculus and logarithms of unitaries.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::cmatrix::{CMatrix, C64, ONE};
use crate::error::{KflatError, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigen-reconstruction tolerance (relative).
pub const EIGEN_RECON_TOL: f64 = 1e-10;
/// Tie-break rotation applied before taking a principal unitary log when an
/// eigenvalue sits within 1e-9 of -1.
pub const LOG_TIE_BREAK_PHASE: f64 = 1e-6;

pub struct HermitianSpectrum {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Columns are the matching orthonormal eigenvectors.
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    pub fn reconstruct(&self) -> CMatrix {
        let q = &self.eigenvectors;
        let lam = CMatrix::diag(
            &self.eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect::<Vec<_>>(),
        );
        q.mul(&lam).mul(&q.adjoint())
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The backend result is refined: eigenvector clusters belonging to nearly
/// degenerate eigenvalues are re-orthonormalized and re-diagonalized, which
/// restores the 1e-10 reconstruction contract the backend alone misses on
/// repeated eigenvalues.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianSpectrum> {
    let scale = m.op_norm().max(1e-300);
    let dev = m.hermitian_defect();
    if dev > HERMITIAN_TOL * scale.max(1.0) {
        return Err(KflatError::NotHermitian { deviation: dev });
    }
    // work on the exactly Hermitian part
    let h = m.add(&m.adjoint()).scale(C64::new(0.5, 0.0));
    let se = SymmetricEigen::new(h.inner().clone());
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let mut eigenvalues: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = h.rows();
    let mut q = CMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, idx[j])]);
    jacobi_polish(&h, &mut eigenvalues, &mut q, scale.max(1.0));
    let spec = HermitianSpectrum { eigenvalues, eigenvectors: q };
    let err = spec.reconstruct().sub(m).op_norm();
    if err > EIGEN_RECON_TOL * scale.max(1.0) * 10.0 {
        return Err(KflatError::Invalid(format!(
            "hermitian eigensolver failed to reconstruct: err {err:.3e} scale {scale:.3e}"
        )));
    }
    Ok(spec)
}

/// Restore global orthonormality of the eigenbasis (QR) and crush the
/// remaining off-diagonal residue with complex Jacobi rotations.
fn jacobi_polish(h: &CMatrix, eigenvalues: &mut [f64], q: &mut CMatrix, scale: f64) {
    let n = h.rows();
    if n <= 1 {
        return;
    }
    let qr = q.inner().clone().qr();
    *q = CMatrix::from_inner(qr.q());
    let mut b = q.adjoint().mul(h).mul(q);
    let tol = 1e-14 * scale;
    for _sweep in 0..8 {
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max(b.get(j, i).norm());
            }
        }
        if worst <= tol {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let z = b.get(j, i);
                if z.norm() <= tol {
                    continue;
                }
                let a = b.get(i, i).re;
                let c = b.get(j, j).re;
                let phi = z.arg();
                let theta = 0.5 * (2.0 * z.norm()).atan2(a - c);
                let (ct, st) = (theta.cos(), theta.sin());
                let eip = C64::from_polar(1.0, phi);
                let eim = eip.conj();
                // columns i, j of b and q: right-multiply by G
                for k in 0..n {
                    let bi = b.get(k, i);
                    let bj = b.get(k, j);
                    b.set(k, i, bi * ct + bj * (st * eip));
                    b.set(k, j, bj * ct - bi * (st * eim));
                    let qi = q.get(k, i);
                    let qj = q.get(k, j);
                    q.set(k, i, qi * ct + qj * (st * eip));
                    q.set(k, j, qj * ct - qi * (st * eim));
                }
                // rows i, j of b: left-multiply by G*
                for k in 0..n {
                    let bi = b.get(i, k);
                    let bj = b.get(j, k);
                    b.set(i, k, bi * ct + bj * (st * eim));
                    b.set(j, k, bj * ct - bi * (st * eip));
                }
            }
        }
    }
    for i in 0..n {
        eigenvalues[i] = b.get(i, i).re;
    }
    // keep the ascending order exact after the polish
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| eigenvalues[x].partial_cmp(&eigenvalues[y]).unwrap());
    if idx.iter().enumerate().any(|(k, &i)| k != i) {
        let evs: Vec<f64> = idx.iter().map(|&i| eigenvalues[i]).collect();
        let qq = q.clone();
        for (k, &i) in idx.iter().enumerate() {
            eigenvalues[k] = evs[k];
            for r in 0..n {
                q.set(r, k, qq.get(r, i));
            }
        }
    }
}

/// Functional calculus Q f(Lambda) Q* of a Hermitian matrix.
pub fn spec_fun(h: &CMatrix, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    let spec = hermitian_eigen(h)?;
    let q = &spec.eigenvectors;
    let fl = CMatrix::diag(&spec.eigenvalues.iter().map(|&l| f(l)).collect::<Vec<_>>());
    Ok(q.mul(&fl).mul(&q.adjoint()))
}

/// Spectral projection of a Hermitian matrix onto eigenvalues > threshold.
pub fn spectral_projection_above(h: &CMatrix, threshold: f64) -> Result<CMatrix> {
    spec_fun(h, |l| if l > threshold { ONE } else { C64::new(0.0, 0.0) })
}

/// Eigendecomposition of a (near-)unitary matrix: U = Q diag(e^{i theta}) Q*.
///
/// Uses simultaneous diagonalization of the commuting Hermitian pair
/// (U+U*)/2, (U-U*)/2i, so no general non-symmetric eigensolver is needed.
/// Returns ascending-angle pairs and the unitary Q.
pub fn unitary_eigen(u: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = u.rows();
    let udef = u.unitary_defect();
    if udef > 1e-6 {
        return Err(KflatError::Invalid(format!("unitary_eigen on non-unitary input ({udef:.3e})")));
    }
    let a = u.add(&u.adjoint()).scale(C64::new(0.5, 0.0));
    let b = u.sub(&u.adjoint()).scale(C64::new(0.0, -0.5));
    let sa = hermitian_eigen(&a)?;
    // cluster eigenvalues of A, diagonalize B within clusters
    let mut q = sa.eigenvectors.clone();
    let tol = 1e-8 * (1.0_f64).max(a.op_norm());
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (sa.eigenvalues[end] - sa.eigenvalues[end - 1]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            let qc = q.submatrix(0, start, n, end - start);
            let bc = qc.adjoint().mul(&b).mul(&qc);
            let sb = hermitian_eigen(&bc.add(&bc.adjoint()).scale(C64::new(0.5, 0.0)))?;
            let rotated = qc.mul(&sb.eigenvectors);
            q.set_block(0, start, &rotated);
        }
        start = end;
    }
    let d = q.adjoint().mul(u).mul(&q);
    let mut angles = Vec::with_capacity(n);
    for i in 0..n {
        angles.push(d.get(i, i).arg());
    }
    // check off-diagonal smallness
    let mut diag = CMatrix::zeros(n, n);
    for i in 0..n {
        diag.set(i, i, d.get(i, i));
    }
    let off = d.sub(&diag).op_norm();
    if off > 1e-7 * (1.0_f64).max(u.op_norm()) {
        return Err(KflatError::Invalid(format!("unitary_eigen off-diagonal residue {off:.3e}")));
    }
    Ok((angles, q))
}

/// Principal logarithm of a unitary: skew-Hermitian L with exp(L) = U.
///
/// Eigenvalues within 1e-9 of -1 are rotated by the fixed global phase
/// e^{i * 1e-6} before taking the branch, then rotated back.
pub fn unitary_log(u: &CMatrix) -> Result<CMatrix> {
    let (angles, _) = unitary_eigen(u)?;
    let near_cut = angles
        .iter()
        .any(|&t| (t - std::f64::consts::PI).abs() < 1e-9 || (t + std::f64::consts::PI).abs() < 1e-9);
    let (shift, u_eff) = if near_cut {
        let ph = Complex64::from_polar(1.0, LOG_TIE_BREAK_PHASE);
        (LOG_TIE_BREAK_PHASE, u.scale(ph))
    } else {
        (0.0, u.clone())
    };
    let (angles, q) = unitary_eigen(&u_eff)?;
    let l = CMatrix::diag(
        &angles.iter().map(|&t| C64::new(0.0, t - shift)).collect::<Vec<_>>(),
    );
    Ok(q.mul(&l).mul(&q.adjoint()))
}

/// exp of a skew-Hermitian matrix (L* = -L), via the Hermitian generator.
pub fn skew_exp(l: &CMatrix) -> Result<CMatrix> {
    // L = iH with H Hermitian
    let h = l.scale(C64::new(0.0, -1.0));
    spec_fun(&h, |t| Complex64::from_polar(1.0, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_unitary(n: usize) -> CMatrix {
        // product of a diagonal phase and a real rotation pattern
        let d = CMatrix::diag(
            &(0..n).map(|i| Complex64::from_polar(1.0, 0.3 * i as f64)).collect::<Vec<_>>(),
        );
        let mut r = CMatrix::identity(n);
        let (c, s) = (0.6_f64, 0.8_f64);
        r.set(0, 0, C64::new(c, 0.0));
        r.set(0, 1, C64::new(-s, 0.0));
        r.set(1, 0, C64::new(s, 0.0));
        r.set(1, 1, C64::new(c, 0.0));
        d.mul(&r)
    }

    #[test]
    fn spec_fun_identity_map() {
        let h = CMatrix::from_fn(5, 5, |i, j| {
            C64::new((i + j) as f64, (i as f64 - j as f64) * 0.5)
        });
        let h = h.add(&h.adjoint()).scale(C64::new(0.5, 0.0));
        let out = spec_fun(&h, |t| C64::new(t, 0.0)).unwrap();
        assert!(out.sub(&h).op_norm() <= 1e-9 * h.op_norm().max(1.0));
    }

    #[test]
    fn spec_fun_exact_projection_exp() {
        // e^{2 pi i p} = 1 for exact projections
        let p = CMatrix::diag(&[ONE, ONE, C64::new(0.0, 0.0)]);
        let out = spec_fun(&p, |t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t))
            .unwrap();
        assert!(out.sub(&CMatrix::identity(3)).op_norm() < 1e-12);
    }

    #[test]
    fn spec_fun_squares_diagonal() {
        let p = CMatrix::diag(&[C64::new(0.0, 0.0), ONE]);
        let out = spec_fun(&p, |t| C64::new(t * t, 0.0)).unwrap();
        assert!(out.sub(&p).op_norm() < 1e-12);
    }

    #[test]
    fn unitary_log_roundtrip() {
        let u = example_unitary(5);
        let l = unitary_log(&u).unwrap();
        assert!(l.add(&l.adjoint()).op_norm() < 1e-9, "log must be skew-Hermitian");
        let back = skew_exp(&l).unwrap();
        assert!(back.sub(&u).op_norm() < 1e-8);
    }

    #[test]
    fn eps_projection_spectral_rounding() {
        // eps-projection: spectrum inside [-2e, 2e] u [1-2e, 1+2e]; indicator
        // function gives an exact projection q with ||q - p|| <= 2 eps.
        let eps = 1e-2;
        let p0 = CMatrix::diag(&[ONE, ONE, C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let e = CMatrix::from_fn(4, 4, |i, j| {
            C64::new(((i * 3 + j) % 7) as f64 / 7.0 - 0.5, 0.0)
        });
        let e = e.add(&e.adjoint()).scale(C64::new(0.5, 0.0));
        let p = p0.add(&e.scale(C64::new(eps / e.op_norm().max(1e-12), 0.0)));
        let defect = p.mul(&p).sub(&p).op_norm();
        let q = spectral_projection_above(&p, 0.5).unwrap();
        assert!(q.mul(&q).sub(&q).op_norm() < 1e-10);
        // spectral containment: eigenvalue enumeration oracle
        let spec = hermitian_eigen(&p).unwrap();
        for &l in &spec.eigenvalues {
            assert!(
                l.abs() <= 2.0 * defect + 1e-12 || (l - 1.0).abs() <= 2.0 * defect + 1e-12,
                "eigenvalue {l} escapes the defect clusters"
            );
        }
        assert!(q.sub(&p).op_norm() <= 2.0 * defect + 1e-12);
    }
}
