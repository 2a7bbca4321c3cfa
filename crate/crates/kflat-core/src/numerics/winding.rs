//! Determinant winding numbers of near-unitary paths.

use super::cmatrix::CMatrix;
use crate::error::{KflatError, Result};

pub const CLOSURE_TOL: f64 = 1e-6;
/// Off-integer residue allowed when rounding a closed winding.
pub const WINDING_RESIDUE: f64 = 0.3;

/// Dimension up to which step phases are resolved by eigenvalues of the
/// step matrix itself (alias-free for any step within the precondition).
const EIGEN_STEP_DIM: usize = 64;

/// Accumulated det-phase along a path of near-unitaries.
///
/// Each step contributes arg det(u_{k+1} u_k^{-1}). For small matrices the
/// step phase is the sum of the principal eigenvalue arguments of the step
/// (unambiguous whenever ||u_{k+1} u_k^{-1} - 1|| < 1/2); for large ones
/// the unwrapped log-det phase is tracked and may not jump by pi/2 per step.
/// Preconditions: every sample is near-unitary (||u*u - 1|| < 1/4) and
/// consecutive samples satisfy the step bound above.
pub fn det_phase_path(path: &[CMatrix]) -> Result<Vec<f64>> {
    if path.is_empty() {
        return Err(KflatError::Invalid("empty path".into()));
    }
    for (k, u) in path.iter().enumerate() {
        let d = u.unitary_defect();
        if d >= 0.25 {
            return Err(KflatError::StepTooCoarse { index: k, norm: d });
        }
    }
    let n = path[0].rows();
    let mut args = Vec::with_capacity(path.len());
    let (_, a0) = path[0].slogdet();
    args.push(a0);
    for k in 1..path.len() {
        let prev = args[k - 1];
        let delta = if n <= EIGEN_STEP_DIM {
            let step = path[k].mul(&path[k - 1].try_inverse()?);
            let dev = step.sub(&CMatrix::identity(n)).op_norm();
            if dev >= 0.5 {
                return Err(KflatError::StepTooCoarse { index: k, norm: dev });
            }
            let u = crate::numerics::polar::polar_unitary(&step, 1e-10)?;
            let (angles, _) = crate::numerics::eigen::unitary_eigen(&u)?;
            angles.iter().sum::<f64>()
        } else {
            let step_norm = path[k].sub(&path[k - 1]).op_norm();
            if step_norm >= 0.5 {
                return Err(KflatError::StepTooCoarse { index: k, norm: step_norm });
            }
            let (_, a) = path[k].slogdet();
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut d = (a - prev) % two_pi;
            if d > std::f64::consts::PI {
                d -= two_pi;
            } else if d <= -std::f64::consts::PI {
                d += two_pi;
            }
            if d.abs() >= std::f64::consts::PI / 2.0 {
                return Err(KflatError::StepTooCoarse { index: k, norm: d.abs() });
            }
            d
        };
        args.push(prev + delta);
    }
    Ok(args)
}

/// Total winding (1/2pi) sum arg det(u_{k+1} u_k^{-1}) of a path; an integer
/// is returned when `closed` is set (endpoints must agree within 1e-6).
pub fn det_winding(path: &[CMatrix], closed: bool) -> Result<f64> {
    let args = det_phase_path(path)?;
    let mut total = args[args.len() - 1] - args[0];
    if closed {
        let dev = path[path.len() - 1].sub(&path[0]).op_norm();
        if dev > CLOSURE_TOL {
            return Err(KflatError::NotClosed { deviation: dev });
        }
        let w = total / (2.0 * std::f64::consts::PI);
        let rounded = w.round();
        if (w - rounded).abs() > WINDING_RESIDUE {
            return Err(KflatError::TruncationTooCoarse { defect: 0.0, residue: (w - rounded).abs() });
        }
        total = rounded * 2.0 * std::f64::consts::PI;
    }
    Ok(total / (2.0 * std::f64::consts::PI))
}

/// Integer winding of a closed near-unitary loop.
pub fn det_winding_int(path: &[CMatrix], closed: bool) -> Result<i64> {
    let w = det_winding(path, closed)?;
    Ok(w.round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn scalar_path(f: impl Fn(f64) -> Complex64, samples: usize) -> Vec<CMatrix> {
        (0..samples)
            .map(|k| {
                let s = k as f64 / (samples - 1) as f64;
                CMatrix::diag(&[f(s)])
            })
            .collect()
    }

    #[test]
    fn constant_identity_path() {
        let path = vec![CMatrix::identity(3); 16];
        assert_eq!(det_winding_int(&path, true).unwrap(), 0);
    }

    #[test]
    fn scalar_full_turn() {
        let path = scalar_path(|s| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * s), 64);
        assert_eq!(det_winding_int(&path, true).unwrap(), 1);
    }

    #[test]
    fn cancelling_windings() {
        let path: Vec<CMatrix> = (0..64)
            .map(|k| {
                let s = k as f64 / 63.0;
                CMatrix::diag(&[
                    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * s),
                    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * s),
                ])
            })
            .collect();
        assert_eq!(det_winding_int(&path, true).unwrap(), 0);
    }

    #[test]
    fn additive_under_concatenation_and_negates_on_reversal() {
        let half1 = scalar_path(|s| Complex64::from_polar(1.0, std::f64::consts::PI * s), 40);
        let half2 = scalar_path(
            |s| Complex64::from_polar(1.0, std::f64::consts::PI * (1.0 + s)),
            40,
        );
        let w1 = det_winding(&half1, false).unwrap();
        let w2 = det_winding(&half2, false).unwrap();
        let mut whole = half1.clone();
        whole.extend(half2.iter().cloned().skip(1));
        let w = det_winding(&whole, false).unwrap();
        assert!((w - (w1 + w2)).abs() < 1e-10);
        let mut rev = whole.clone();
        rev.reverse();
        let wr = det_winding(&rev, false).unwrap();
        assert!((w + wr).abs() < 1e-10);
    }

    #[test]
    fn coarse_step_rejected() {
        let path = scalar_path(|s| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * s), 3);
        assert!(matches!(det_winding(&path, false), Err(KflatError::StepTooCoarse { .. })));
    }

    #[test]
    fn open_loop_flagged() {
        let path = scalar_path(|s| Complex64::from_polar(1.0, 1.0 * s), 32);
        assert!(matches!(det_winding(&path, true), Err(KflatError::NotClosed { .. })));
    }
}
