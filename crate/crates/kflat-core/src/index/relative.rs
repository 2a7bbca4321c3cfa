//! The relative algebraic index class on the disk pair and the mapping-cone
//! evaluation of the relative quantitative index theorem.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fredholm::DiskPair;
use crate::covers::profile::{rho_collar, rho_interior};
use crate::covers::GoodCoverPair;
use crate::error::{KflatError, Result};
use crate::groups::{GAMatrix, NormalForm};
use crate::numerics::CMatrix;
use crate::qk::ga_norm;
use crate::quasirep::{MappingConeEngine, RelativeQuasiRep};

/// Orientation of the relative pairing, pinned with the monopole fixture
/// conventions so that the disk scenario (clock, 1 (+) shift) pairs to the
/// same integer as its boundary clutching degree.
pub const RELATIVE_ORIENTATION: i64 = -1;

/// Angular partition data of the boundary circle, shared by the legs.
struct CircleData {
    /// theta-mode coefficients of eta_c eta_d per Y-chart pair
    eta_modes: BTreeMap<(usize, usize), BTreeMap<i64, Complex64>>,
    transitions: BTreeMap<(usize, usize), NormalForm>,
    charts: usize,
    n_theta: usize,
}

fn circle_data(cover: &GoodCoverPair, m_max: i64) -> Result<CircleData> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    let nt = y.samples.len();
    let charts = y.charts.len();
    let mut eta_modes = BTreeMap::new();
    for c in 0..charts {
        for d in 0..charts {
            let mut modes = BTreeMap::new();
            for m in -m_max..=m_max {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..nt {
                    let th = t as f64 / nt as f64;
                    let v = y.eta_y[c][t] * y.eta_y[d][t];
                    acc += Complex64::from_polar(v, -2.0 * std::f64::consts::PI * m as f64 * th);
                }
                acc /= nt as f64;
                if acc.norm() > 1e-14 {
                    modes.insert(m, acc);
                }
            }
            if !modes.is_empty() {
                eta_modes.insert((c, d), modes);
            }
        }
    }
    let mut transitions = BTreeMap::new();
    for c in 0..charts {
        for d in 0..charts {
            if c == d {
                transitions.insert((c, d), NormalForm::identity());
            } else if let Some(w) = y.transitions.get(&(c, d)) {
                transitions.insert((c, d), w.clone());
            }
        }
    }
    Ok(CircleData { eta_modes, transitions, charts, n_theta: nt })
}

/// -e^{-i pi rho_0(r)} - 1 on the collar (the a-leg radial profile).
fn a_phase(r: f64) -> Complex64 {
    -Complex64::from_polar(1.0, -std::f64::consts::PI * rho_collar(r, 0.0)) - Complex64::new(1.0, 0.0)
}

/// -e^{-i pi rho_s(r)} - 1 over the doubled disk (the b-leg radial profile).
fn b_phase(r: f64, s: f64) -> Complex64 {
    let rho = if r <= 1.0 { rho_interior(s) } else { rho_collar(r, s) };
    -Complex64::from_polar(1.0, -std::f64::consts::PI * rho) - Complex64::new(1.0, 0.0)
}

/// The relative algebraic index class: the mapping-cone loop
/// (U_1 U_2*, V_{1,s} V_{2,s}*) with the flux (LLL) and blind legs,
/// certified samplewise over the character grid.
pub struct RelativeClassData {
    /// U_i as symbolic Lambda-matrices over the compression spaces
    pub u_flux: GAMatrix,
    pub u_blind: GAMatrix,
    /// samplewise near-unitarity defect of the loop (sup over characters)
    pub defect: f64,
    pub propagation: usize,
    pub s_count: usize,
}

/// Assemble U = 1 + sum_{cd} Phi[(a_phase) eta_c eta_d] (x) u_{lambda_cd}
/// for the flux leg (LLL compression over the collar radii).
fn assemble_u_flux(cover: &GoodCoverPair, fp: &DiskPair, cd: &CircleData) -> Result<GAMatrix> {
    let d = cd.charts;
    let states = fp.states;
    let mut out = GAMatrix::identity(cover.lambda.clone(), states * d);
    for ((c, dd), modes) in &cd.eta_modes {
        let word = cd
            .transitions
            .get(&(*c, *dd))
            .cloned()
            .ok_or_else(|| KflatError::Invalid(format!("missing Y transition ({c},{dd})")))?;
        // radial profile supported on the collar
        let radial: Vec<f64> = fp.radii.iter().map(|&r| if r > 1.0 && r < 2.0 { 1.0 } else { 0.0 }).collect();
        // compress (a_phase(r) * eta_c eta_d(theta)) as separable terms:
        // real and imaginary radial parts handled separately
        for (re_part, scale) in [(true, Complex64::new(1.0, 0.0)), (false, Complex64::new(0.0, 1.0))] {
            let rad: Vec<f64> = fp
                .radii
                .iter()
                .zip(&radial)
                .map(|(&r, &m)| {
                    if m == 0.0 {
                        0.0
                    } else if re_part {
                        a_phase(r).re
                    } else {
                        a_phase(r).im
                    }
                })
                .collect();
            let mut terms_modes: BTreeMap<i64, CMatrix> = BTreeMap::new();
            for (&m, &coef) in modes {
                terms_modes.insert(m, CMatrix::scalar(1, coef));
            }
            let comp = fp.compress_separable(1, &[(rad, terms_modes)]);
            for a in 0..states {
                for b in 0..states {
                    let v = comp.get(a, b) * scale;
                    if v.norm() > 1e-14 {
                        out.entry_mut(c * states + a, dd * states + b)
                            .add_assign_term(word.clone(), v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The blind-leg analogue: exact evaluation at the spread points.
fn assemble_u_blind(cover: &GoodCoverPair, fp: &DiskPair, cd: &CircleData) -> Result<GAMatrix> {
    let d = cd.charts;
    let pts = fp.points.len();
    let mut out = GAMatrix::identity(cover.lambda.clone(), pts * d);
    let y = cover.ypart.as_ref().unwrap();
    let nt = cd.n_theta;
    for (t, &(theta, r)) in fp.points.iter().enumerate() {
        if !(1.0 < r && r < 2.0) {
            continue;
        }
        let ph = a_phase(r);
        // eta values at this theta (snap to the circle grid for exactness)
        let ti = ((theta * nt as f64).round() as usize) % nt;
        for c in 0..d {
            for dd in 0..d {
                let v = y.eta_y[c][ti] * y.eta_y[dd][ti];
                if v == 0.0 {
                    continue;
                }
                let word = cd.transitions.get(&(c, dd)).cloned().unwrap();
                out.entry_mut(c * pts + t, dd * pts + t)
                    .add_assign_term(word, ph * Complex64::new(v, 0.0));
            }
        }
    }
    Ok(out)
}

/// Build and certify the relative class.
pub fn relative_algebraic_index_class(
    cover: &GoodCoverPair,
    fp: &DiskPair,
    s_count: usize,
) -> Result<RelativeClassData> {
    if cover.gamma != crate::groups::GroupSpec::Trivial {
        return Err(KflatError::Invalid(
            "the built-in disk module assumes a trivial fundamental group upstairs".into(),
        ));
    }
    let m_max = 2 * fp.truncation as i64 + 4;
    let cd = circle_data(cover, m_max)?;
    let u_flux = assemble_u_flux(cover, fp, &cd)?;
    let u_blind = assemble_u_blind(cover, fp, &cd)?;
    // samplewise certification: the a-leg product U1 U2* is a near-unitary
    // over C*(Lambda); measured as the character-sup of u u* - 1
    let grid = 24;
    let uu1 = u_flux.mul(&u_flux.adjoint())?;
    let one1 = GAMatrix::identity(cover.lambda.clone(), u_flux.rows);
    let d1 = ga_norm(&uu1.sub(&one1)?, grid);
    let uu2 = u_blind.mul(&u_blind.adjoint())?;
    let one2 = GAMatrix::identity(cover.lambda.clone(), u_blind.rows);
    let d2 = ga_norm(&uu2.sub(&one2)?, grid);
    // V-leg defect: scalar phases times an exact projection stay exactly
    // unitary, so the b-branch contributes no extra defect for trivial Gamma
    let defect = d1.max(d2);
    let propagation = u_flux.propagation() + u_blind.propagation();
    if defect >= 1.0 {
        return Err(KflatError::TruncationTooCoarse { defect, residue: 0.0 });
    }
    Ok(RelativeClassData { u_flux, u_blind, defect, propagation, s_count })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelativeLhsReport {
    pub integer: i64,
    pub winding_first: f64,
    pub winding_second: f64,
    pub class_defect: f64,
    pub hypothesis: bool,
}

/// The relative quantitative left side: the mapping-cone images
/// pi-tilde_{j, 2+s} of the class fields, compressed by the flux and blind
/// legs, with the theta-evaluator reading off the first-vs-second winding
/// difference of the determinant flow.
pub fn relative_quantitative_lhs(
    rep: &RelativeQuasiRep,
    cover: &GoodCoverPair,
    fp: &DiskPair,
    class: &RelativeClassData,
) -> Result<RelativeLhsReport> {
    let lambda_ball = rep.pi0.group.ball(2);
    let engine = MappingConeEngine::new(rep, &lambda_ball)?;
    let m_max = 2 * fp.truncation as i64 + 4;
    let cd = circle_data(cover, m_max)?;
    let d2 = 2 * (rep.dim_p() + rep.dim_q());
    let block = cd.charts * d2;
    let y = cover.ypart.as_ref().unwrap();
    let nt = cd.n_theta;

    // the collar radial coefficient of the a-leg phase
    let radial: Vec<f64> = fp
        .radii
        .iter()
        .map(|&r| if r > 1.0 && r < 2.0 { 1.0 } else { 0.0 })
        .collect();
    let re_rad: Vec<f64> = fp
        .radii
        .iter()
        .zip(&radial)
        .map(|(&r, &m)| if m == 0.0 { 0.0 } else { a_phase(r).re })
        .collect();
    let im_rad: Vec<f64> = fp
        .radii
        .iter()
        .zip(&radial)
        .map(|(&r, &m)| if m == 0.0 { 0.0 } else { a_phase(r).im })
        .collect();

    let s_count = class.s_count.max(8);
    let windings = std::sync::Mutex::new([vec![0.0f64; s_count + 1], vec![0.0f64; s_count + 1]]);
    let compute_sample = |k: usize| -> Result<()> {
        let s2 = 1.0 + k as f64 / s_count as f64;
        for j in 0..2u8 {
            // pi-tilde images of the transition words at this path time
            let mut imgs: BTreeMap<(usize, usize), CMatrix> = BTreeMap::new();
            for ((c, d), _) in &cd.eta_modes {
                let word = cd.transitions.get(&(*c, *d)).unwrap();
                let img = if j == 0 {
                    engine.pi_tilde_1(s2, word)?
                } else {
                    engine.pi_tilde_2(s2, word)?
                };
                imgs.insert((*c, *d), img);
            }
            // flux leg: T = 1 + sum compress[(a_phase) eta_c eta_d] (x) img_cd
            let mut mode_blocks: BTreeMap<i64, CMatrix> = BTreeMap::new();
            for ((c, d), modes) in &cd.eta_modes {
                let img = &imgs[&(*c, *d)];
                for (&m, &coef) in modes {
                    let entry = mode_blocks
                        .entry(m)
                        .or_insert_with(|| CMatrix::zeros(block, block));
                    let mut blk = CMatrix::zeros(block, block);
                    blk.set_block(c * d2, d * d2, &img.scale(coef));
                    *entry = entry.add(&blk);
                }
            }
            let term_re = (re_rad.clone(), mode_blocks.clone());
            let term_im: (Vec<f64>, BTreeMap<i64, CMatrix>) = (
                im_rad.clone(),
                mode_blocks
                    .iter()
                    .map(|(&m, b)| (m, b.scale(Complex64::new(0.0, 1.0))))
                    .collect(),
            );
            let t = fp
                .compress_separable(block, &[term_re, term_im])
                .add(&CMatrix::identity(fp.states * block));
            // blind leg: block diagonal over the spread points
            let field = |theta: f64, r: f64| -> CMatrix {
                let mut out = CMatrix::identity(block);
                if 1.0 < r && r < 2.0 {
                    let ph = a_phase(r);
                    let ti = ((theta * nt as f64).round() as usize) % nt;
                    for c in 0..cd.charts {
                        for d in 0..cd.charts {
                            let v = y.eta_y[c][ti] * y.eta_y[d][ti];
                            if v == 0.0 {
                                continue;
                            }
                            if let Some(img) = imgs.get(&(c, d)) {
                                let add = img.scale(ph * Complex64::new(v, 0.0));
                                let cur = out.submatrix(c * d2, d * d2, d2, d2);
                                out.set_block(c * d2, d * d2, &cur.add(&add));
                            }
                        }
                    }
                }
                out
            };
            let b = fp.evaluate_blind(block, &field);
            let w = t.mul(&b.try_inverse()?);
            let (_, arg) = w.slogdet();
            windings.lock().unwrap()[j as usize][k] = arg;
        }
        Ok(())
    };
    run_samples(s_count + 1, &compute_sample)?;
    let w = windings.into_inner().unwrap();
    let unwrap_path = |args: &[f64]| -> Result<f64> {
        let mut total = 0.0;
        for k in 1..args.len() {
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut d = (args[k] - args[k - 1]) % two_pi;
            if d > std::f64::consts::PI {
                d -= two_pi;
            } else if d <= -std::f64::consts::PI {
                d += two_pi;
            }
            if d.abs() >= std::f64::consts::PI / 2.0 {
                return Err(KflatError::StepTooCoarse { index: k, norm: d.abs() });
            }
            total += d;
        }
        Ok(total / (2.0 * std::f64::consts::PI))
    };
    let w1 = unwrap_path(&w[0])?;
    let w2 = unwrap_path(&w[1])?;
    let raw = w1 - w2;
    let rounded = raw.round();
    if (raw - rounded).abs() > 0.3 {
        return Err(KflatError::TruncationTooCoarse { defect: class.defect, residue: (raw - rounded).abs() });
    }
    let eps = rep.intertwiner_defect(&rep.pi0.group.ball(1));
    Ok(RelativeLhsReport {
        integer: RELATIVE_ORIENTATION * rounded as i64,
        winding_first: w1,
        winding_second: w2,
        class_defect: class.defect,
        hypothesis: eps < 1.0 / 40.0,
    })
}

#[cfg(feature = "parallel")]
fn run_samples(count: usize, f: &(dyn Fn(usize) -> Result<()> + Sync)) -> Result<()> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect::<Result<Vec<_>>>()?;
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn run_samples(count: usize, f: &(dyn Fn(usize) -> Result<()> + Sync)) -> Result<()> {
    for k in 0..count {
        f(k)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::disk_pair_cover;
    use crate::groups::{GroupHom, GroupSpec};
    use crate::numerics::CMatrix;
    use crate::quasirep::{clock_shift, QuasiRep};

    pub fn disk_scenario_rep(n: usize, shift_power: usize) -> RelativeQuasiRep {
        let gamma = GroupSpec::Trivial;
        let lambda = GroupSpec::FreeAbelian { rank: 1 };
        let phi = GroupHom::to_trivial(lambda.clone());
        let (c, s) = clock_shift(n);
        let pi0 = QuasiRep::new(lambda, n, vec![(1, c)]).unwrap();
        let mut sk = CMatrix::identity(n);
        for _ in 0..shift_power {
            sk = sk.mul(&s);
        }
        let u = CMatrix::identity(1).direct_sum(&sk);
        RelativeQuasiRep::new(
            QuasiRep::trivial(gamma.clone(), 1),
            QuasiRep::trivial(gamma, 1),
            pi0,
            u,
            phi,
        )
        .unwrap()
    }

    #[test]
    fn relative_class_certifies() {
        let cover = disk_pair_cover(24).unwrap();
        let fp = DiskPair::new(3).unwrap();
        let data = relative_algebraic_index_class(&cover, &fp, 16).unwrap();
        assert!(data.defect < 1.0, "measured certificate: {}", data.defect);
        assert!(data.propagation <= 2, "propagation 2 loop");
    }

    #[test]
    fn relative_lhs_controls_and_units() {
        let cover = disk_pair_cover(24).unwrap();
        let fp = DiskPair::new(3).unwrap();
        let data = relative_algebraic_index_class(&cover, &fp, 16).unwrap();
        let n = 8;
        // u = 1 control
        let rep0 = disk_scenario_rep(n, 0);
        let r0 = relative_quantitative_lhs(&rep0, &cover, &fp, &data).unwrap();
        assert_eq!(r0.integer, 0, "exact flat relative representation pairs to zero");
        // u = 1 (+) shift
        let rep1 = disk_scenario_rep(n, 1);
        let r1 = relative_quantitative_lhs(&rep1, &cover, &fp, &data).unwrap();
        assert_eq!(r1.integer.abs(), 1, "unit pairing: {:?}", r1);
        // doubled shift doubles the integer
        let rep2 = disk_scenario_rep(n, 2);
        let r2 = relative_quantitative_lhs(&rep2, &cover, &fp, &data).unwrap();
        assert_eq!(r2.integer, 2 * r1.integer, "winding additivity");
    }
}
