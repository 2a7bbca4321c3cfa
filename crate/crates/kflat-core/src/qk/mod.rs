//! Quantitative K-theory elements carrying (defect, propagation)
//! certificates: projections, unitaries, loops, perturbation lemmas,
//! pushforward along almost-homomorphisms, and integer class extraction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KflatError, Result};
use crate::groups::{GAMatrix, GroupSpec};
use crate::numerics::{
    det_winding_int, eigencount_above, min_eigen_distance, polar_unitary, CMatrix,
};

/// The quantitative K-theory admissibility threshold.
pub const QK_MAX_DEFECT: f64 = 0.25;
pub const HERMITIAN_CERT_TOL: f64 = 1e-9;

/// ||M^2 - M|| through implicit matvecs (no m^3 product at large scale).
pub fn projection_defect(m: &CMatrix) -> f64 {
    let n = m.rows();
    if n <= 256 {
        return m.mul(m).sub(m).op_norm();
    }
    // power iteration on A = M^2 - M via matvecs
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.3 * ((i as f64) * 0.61).sin(), 0.2 * ((i as f64) * 1.13).cos()))
        .collect();
    let norm = |x: &[Complex64]| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = 1.0 / norm(&v);
    for z in v.iter_mut() {
        *z *= scale;
    }
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let mx = m.mul_vec(x);
        let mmx = m.mul_vec(&mx);
        mmx.iter().zip(&mx).map(|(a, b)| a - b).collect()
    };
    let mut prev = 0.0;
    for it in 0..300 {
        // A is Hermitian when m is, so one application per step suffices
        let mut w = apply(&v);
        let lam = norm(&w);
        if lam == 0.0 {
            return 0.0;
        }
        let s = 1.0 / lam;
        for z in w.iter_mut() {
            *z *= s;
        }
        v = w;
        if it > 4 && (lam - prev).abs() <= 1e-12 * lam.max(1e-30) {
            return lam;
        }
        prev = lam;
    }
    prev
}

/// A certified (defect, propagation) projection after evaluation.
#[derive(Clone, Debug)]
pub struct QProjection {
    pub matrix: CMatrix,
    pub defect: f64,
    pub propagation: usize,
    pub base_rank: usize,
    /// defect < 1/4: the quantitative K-theory hypothesis
    pub hypothesis: bool,
}

/// A certified projection still over the group algebra.
#[derive(Clone, Debug)]
pub struct SymbolicProjection {
    pub matrix: GAMatrix,
    pub defect: f64,
    pub propagation: usize,
    pub base_rank: usize,
}

#[derive(Clone, Debug)]
pub struct QUnitary {
    pub matrix: CMatrix,
    pub defect: f64,
    pub propagation: usize,
}

/// s-sampled loop of near-unitaries with endpoints at 1.
#[derive(Clone, Debug)]
pub struct QLoop {
    pub samples: Vec<QUnitary>,
    pub propagation: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub defect: f64,
    pub propagation: usize,
    pub integer: Option<i64>,
    pub hypothesis: bool,
    pub witness: Option<f64>,
}

/// C*-norm of a group-algebra matrix over an abelian (or trivial) group:
/// the sup over the dual torus, sampled on a uniform character grid.
pub fn ga_norm(x: &GAMatrix, grid: usize) -> f64 {
    character_sup(x, grid, |m| m.op_norm())
}

/// sup over characters of a matrix functional.
fn character_sup(x: &GAMatrix, grid: usize, f: impl Fn(&CMatrix) -> f64) -> f64 {
    let rank = x.group.rank();
    match x.group {
        GroupSpec::Trivial => f(&eval_character(x, &[])),
        GroupSpec::Free { .. } | GroupSpec::FreeAbelian { .. } => {
            let mut worst = 0.0_f64;
            let mut theta = vec![0.0_f64; rank];
            let mut idx = vec![0usize; rank];
            loop {
                for (k, &i) in idx.iter().enumerate() {
                    theta[k] = 2.0 * std::f64::consts::PI * i as f64 / grid as f64;
                }
                worst = worst.max(f(&eval_character(x, &theta)));
                // odometer
                let mut k = 0;
                loop {
                    if k == rank {
                        return worst;
                    }
                    idx[k] += 1;
                    if idx[k] < grid {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
    }
}

/// Evaluate a group-algebra matrix at the character gamma -> e^{i theta . exp}.
/// (For free groups this is the abelianized character sup, a lower bound.)
pub fn eval_character(x: &GAMatrix, theta: &[f64]) -> CMatrix {
    let rank = x.group.rank();
    CMatrix::from_fn(x.rows, x.cols, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (nf, &c) in &x.entry(i, j).support {
            let mut phase = 0.0;
            if rank > 0 {
                for (k, &e) in nf.exponents(rank).iter().enumerate() {
                    phase += theta[k] * e as f64;
                }
            }
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    })
}

/// Certify a group-algebra matrix as a symbolic quantitative projection:
/// the defect is the character-sup of ||x^2 - x||.
pub fn certify_symbolic_projection(
    x: &GAMatrix,
    base_rank: usize,
    grid: usize,
) -> Result<SymbolicProjection> {
    let adjoint_gap = x.adjoint().max_entry_dev(x)?;
    if adjoint_gap > HERMITIAN_CERT_TOL {
        return Err(KflatError::NotHermitian { deviation: adjoint_gap });
    }
    let sq = x.mul(x)?;
    let diff = sq.sub(x)?;
    let defect = ga_norm(&diff, grid);
    Ok(SymbolicProjection { matrix: x.clone(), defect, propagation: x.propagation(), base_rank })
}

/// Certify an evaluated Hermitian matrix as an (eps, r)-projection;
/// rejects defects at or above 1/4.
pub fn certify_projection(m: &CMatrix, propagation: usize, base_rank: usize) -> Result<QProjection> {
    let p = certify_projection_beyond(m, propagation, base_rank)?;
    if !p.hypothesis {
        return Err(KflatError::DefectTooLarge { defect: p.defect, threshold: QK_MAX_DEFECT });
    }
    Ok(p)
}

/// Certification that tolerates the beyond-hypothesis regime: the defect is
/// recorded and `hypothesis` is false at or above 1/4.
pub fn certify_projection_beyond(
    m: &CMatrix,
    propagation: usize,
    base_rank: usize,
) -> Result<QProjection> {
    let scale = 1.0_f64.max(m.op_norm());
    let herm = m.hermitian_defect();
    if herm > HERMITIAN_CERT_TOL * scale {
        return Err(KflatError::NotHermitian { deviation: herm });
    }
    let defect = projection_defect(m);
    Ok(QProjection {
        matrix: m.clone(),
        defect,
        propagation,
        base_rank,
        hypothesis: defect < QK_MAX_DEFECT,
    })
}

pub fn certify_unitary(m: &CMatrix, propagation: usize) -> Result<QUnitary> {
    let d1 = m.adjoint().mul(m).sub(&CMatrix::identity(m.cols())).op_norm();
    let d2 = m.mul(&m.adjoint()).sub(&CMatrix::identity(m.rows())).op_norm();
    let defect = d1.max(d2);
    if defect >= QK_MAX_DEFECT {
        return Err(KflatError::DefectTooLarge { defect, threshold: QK_MAX_DEFECT });
    }
    Ok(QUnitary { matrix: m.clone(), defect, propagation })
}

impl QLoop {
    pub fn new(samples: Vec<QUnitary>, propagation: usize) -> Result<Self> {
        if samples.len() < 3 {
            return Err(KflatError::Invalid("a loop needs at least three samples".into()));
        }
        let d = samples.iter().map(|u| u.defect).fold(0.0, f64::max);
        let n = samples[0].matrix.rows();
        let one = CMatrix::identity(n);
        let dev = samples[0]
            .matrix
            .sub(&one)
            .op_norm()
            .max(samples[samples.len() - 1].matrix.sub(&one).op_norm());
        if dev > 2.0 * d.max(1e-9) {
            return Err(KflatError::NotClosed { deviation: dev });
        }
        Ok(QLoop { samples, propagation })
    }

    pub fn max_defect(&self) -> f64 {
        self.samples.iter().map(|u| u.defect).fold(0.0, f64::max)
    }
}

/// Perturbation certificate: q within ||p - q|| < eps of a certified
/// projection is itself certified at 5 eps in the same class; the witness
/// is the worst defect along the linear homotopy.
pub struct PerturbationCertificate {
    pub certified: QProjection,
    pub homotopy_witness: f64,
}

pub fn perturb_class_check(p: &QProjection, q: &CMatrix) -> Result<PerturbationCertificate> {
    let dist = p.matrix.sub(q).op_norm();
    if dist >= p.defect.max(1e-14) {
        return Err(KflatError::TooFar { distance: dist, defect: p.defect });
    }
    let bound = 5.0 * p.defect;
    let mut witness = 0.0_f64;
    for k in 0..=8 {
        let t = k as f64 / 8.0;
        let pt = p
            .matrix
            .scale(Complex64::new(1.0 - t, 0.0))
            .add(&q.scale(Complex64::new(t, 0.0)));
        witness = witness.max(projection_defect(&pt));
    }
    if witness > bound + 1e-12 {
        return Err(KflatError::Invalid(format!(
            "homotopy witness {witness:.3e} escapes the 5 eps bound {bound:.3e}"
        )));
    }
    let certified = QProjection {
        matrix: q.clone(),
        defect: witness.max(projection_defect(q)),
        propagation: p.propagation,
        base_rank: p.base_rank,
        hypothesis: bound < QK_MAX_DEFECT,
    };
    Ok(PerturbationCertificate { certified, homotopy_witness: witness })
}

/// Unitary variant: 4 eps re-certification.
pub fn perturb_unitary_check(u: &QUnitary, v: &CMatrix) -> Result<QUnitary> {
    let dist = u.matrix.sub(v).op_norm();
    if dist >= u.defect.max(1e-14) {
        return Err(KflatError::TooFar { distance: dist, defect: u.defect });
    }
    let bound = 4.0 * u.defect;
    let d1 = v.adjoint().mul(v).sub(&CMatrix::identity(v.cols())).op_norm();
    let d2 = v.mul(&v.adjoint()).sub(&CMatrix::identity(v.rows())).op_norm();
    let measured = d1.max(d2);
    if measured > bound + 1e-12 {
        return Err(KflatError::Invalid(format!(
            "perturbed unitary defect {measured:.3e} escapes 4 eps = {bound:.3e}"
        )));
    }
    Ok(QUnitary { matrix: v.clone(), defect: measured.max(bound.min(QK_MAX_DEFECT)), propagation: u.propagation })
}

/// Pushforward of a symbolic projection along an almost homomorphism with
/// certificate (eps_h, r, kappa): the output defect is the measured value,
/// asserted against the formula eps_h + (1 + 3 eps_h) delta whenever that
/// budget is admissible; outside the budget the element is only produced in
/// `beyond` mode with hypothesis = false.
pub fn push_forward_projection(
    apply: &dyn Fn(&GAMatrix) -> Result<CMatrix>,
    eps_h: f64,
    kappa: usize,
    budget_r: usize,
    x: &SymbolicProjection,
    beyond: bool,
) -> Result<QProjection> {
    if x.propagation > budget_r {
        return Err(KflatError::PropagationExceeded { actual: x.propagation, budget: budget_r });
    }
    let formula = eps_h + (1.0 + 3.0 * eps_h) * x.defect;
    let m = apply(&x.matrix)?;
    let mut out = certify_projection_beyond(&m, kappa * x.propagation, x.base_rank)?;
    if formula < QK_MAX_DEFECT {
        if out.defect > formula + 1e-9 {
            return Err(KflatError::Invalid(format!(
                "pushforward defect {:.3e} exceeds the certified formula {:.3e}",
                out.defect, formula
            )));
        }
    } else if !beyond {
        return Err(KflatError::BudgetExceeded { defect: formula });
    }
    out.hypothesis = out.hypothesis && formula < QK_MAX_DEFECT;
    Ok(out)
}

/// Integer of a difference class [p, k]: eigenvalues above 1/2 minus the
/// base rank. The spectral gap at 1/2 is certified by the defect when the
/// hypothesis holds and measured directly otherwise.
pub fn k0_class_integer(p: &QProjection) -> Result<(i64, f64)> {
    let gap = if p.hypothesis {
        // spectrum clusters within [(1 - sqrt(1 - 4e))/2] of {0, 1}
        let margin = 0.5 * (1.0 - (1.0 - 4.0 * p.defect).max(0.0).sqrt());
        0.5 - margin
    } else {
        let measured = min_eigen_distance(&p.matrix, 0.5)?;
        if measured < crate::bundles::GAP_MARGIN {
            return Err(KflatError::GapClosed { eigenvalue: 0.5 + measured });
        }
        measured
    };
    let count = eigencount_above(&p.matrix, 0.5)?;
    Ok((count as i64 - p.base_rank as i64, gap))
}

/// Integer of a loop class: polar-correct the samples and take the closed
/// determinant winding.
pub fn k1_loop_integer(l: &QLoop) -> Result<i64> {
    let path: Vec<CMatrix> = l
        .samples
        .iter()
        .map(|u| polar_unitary(&u.matrix, 1e-10))
        .collect::<Result<Vec<_>>>()?;
    det_winding_int(&path, true)
}
