//! The almost monodromy correspondence: beta (quasi-representation to
//! almost flat cocycle), alpha (cocycle to quasi-representation), their
//! relative versions, and round-trip contract reports.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bundles::{
    spectral_frame, CechCocycle, StablyRelativeCocycle, GAP_MARGIN,
};
use crate::covers::{GoodCoverPair, YPart};
use crate::error::{KflatError, Result};
use crate::groups::{GroupSpec, NormalForm};
use crate::numerics::{polar_correct, CMatrix};
use crate::quasirep::{QuasiRep, RelativeQuasiRep};

/// Mishchenko field of a quasi-representation over a cover at one sample:
/// p_pi(x) = sum eta_mu(x) eta_nu(x) pi(gamma_{mu nu}) (x) e_{mu nu}.
pub fn mishchenko_field_at(
    rep: &QuasiRep,
    cover: &GoodCoverPair,
    sample: usize,
) -> CMatrix {
    let n = rep.dim;
    let k = cover.index_count;
    let mut out = CMatrix::zeros(k * n, k * n);
    for mu in 0..k {
        let wm = cover.eta[mu][sample];
        if wm == 0.0 {
            continue;
        }
        for nu in 0..k {
            let wn = cover.eta[nu][sample];
            if wn == 0.0 {
                continue;
            }
            let img = rep.eval(&cover.transition(mu, nu));
            out.set_block(mu * n, nu * n, &img.scale(Complex64::new(wm * wn, 0.0)));
        }
    }
    out
}

/// Same field over the Y cover of a pair, for a Lambda representation.
pub fn mishchenko_field_y_at(rep: &QuasiRep, y: &YPart, lambda: &GroupSpec, yi: usize) -> CMatrix {
    let n = rep.dim;
    let k = y.charts.len();
    let mut out = CMatrix::zeros(k * n, k * n);
    for a in 0..k {
        let wa = y.eta_y[a][yi];
        if wa == 0.0 {
            continue;
        }
        for b in 0..k {
            let wb = y.eta_y[b][yi];
            if wb == 0.0 {
                continue;
            }
            let word = if a == b {
                NormalForm::identity()
            } else if let Some(w) = y.transitions.get(&(a, b)) {
                w.clone()
            } else {
                lambda.inv_nf(y.transitions.get(&(b, a)).expect("Y transition"))
            };
            let img = rep.eval(&word);
            out.set_block(a * n, b * n, &img.scale(Complex64::new(wa * wb, 0.0)));
        }
    }
    out
}

struct FrameSet {
    /// per chart: frames at the overlap samples where the chart is active
    frames: Vec<std::collections::BTreeMap<usize, CMatrix>>,
}

/// The spectral-projection frames phi_mu(x): polar part of p(x) s_mu(x),
/// with s_mu the stacked approximate frame (eta_nu(x) pi(gamma_{nu mu}))_nu.
fn beta_frames(
    rep: &QuasiRep,
    field: &dyn Fn(usize) -> CMatrix,
    eta: &[Vec<f64>],
    transition: &dyn Fn(usize, usize) -> NormalForm,
    samples: usize,
    charts: usize,
) -> Result<FrameSet> {
    let n = rep.dim;
    let mut frames: Vec<std::collections::BTreeMap<usize, CMatrix>> = vec![Default::default(); charts];
    for s in 0..samples {
        let p = field(s);
        // spectral projection with a gap check
        let (proj_frame, _gap) = spectral_frame(&p, GAP_MARGIN)?;
        if proj_frame.cols() != n {
            return Err(KflatError::GapClosed { eigenvalue: 0.5 });
        }
        let projector = proj_frame.mul(&proj_frame.adjoint());
        for mu in 0..charts {
            if eta[mu][s] == 0.0 {
                continue;
            }
            let mut stacked = CMatrix::zeros(charts * n, n);
            for nu in 0..charts {
                if eta[nu][s] == 0.0 {
                    continue;
                }
                let img = rep.eval(&transition(nu, mu));
                stacked.set_block(nu * n, 0, &img.scale(Complex64::new(eta[nu][s], 0.0)));
            }
            let phi = polar_correct(&projector.mul(&stacked), 1e-9)?;
            frames[mu].insert(s, phi);
        }
    }
    Ok(FrameSet { frames })
}

/// beta: quasi-representation to an exact unitary cocycle over the cover.
/// The cocycle identity holds by construction; the proximity
/// ||v_{mu nu}(x) - pi(gamma_{mu nu})|| is measured and returned.
pub fn beta(rep: &QuasiRep, cover: &GoodCoverPair) -> Result<(CechCocycle, f64)> {
    if rep.group != cover.gamma {
        return Err(KflatError::GroupMismatch);
    }
    let field = |s: usize| mishchenko_field_at(rep, cover, s);
    let transition = |a: usize, b: usize| cover.transition(a, b);
    let fs = beta_frames(
        rep,
        &field,
        &cover.eta,
        &transition,
        cover.samples.len(),
        cover.index_count,
    )?;
    let mut out = CechCocycle::new(rep.dim, cover.index_count);
    let mut deviation = 0.0_f64;
    for mu in 0..cover.index_count {
        for nu in (mu + 1)..cover.index_count {
            let img = rep.eval(&cover.transition(mu, nu));
            for s in cover.overlap_samples(mu, nu) {
                let (fm, fn_) = (&fs.frames[mu][&s], &fs.frames[nu][&s]);
                let v = fm.adjoint().mul(fn_);
                deviation = deviation.max(v.sub(&img).op_norm());
                out.insert(mu, nu, s, v);
            }
        }
    }
    Ok((out, deviation))
}

/// beta over the Y cover for a Lambda quasi-representation.
pub fn beta_y(rep: &QuasiRep, cover: &GoodCoverPair) -> Result<(CechCocycle, f64)> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    if rep.group != cover.lambda {
        return Err(KflatError::GroupMismatch);
    }
    let lambda = cover.lambda.clone();
    let field = |yi: usize| mishchenko_field_y_at(rep, y, &lambda, yi);
    let transition = |a: usize, b: usize| {
        if a == b {
            NormalForm::identity()
        } else {
            y.transitions
                .get(&(a, b))
                .cloned()
                .unwrap_or_else(|| lambda.inv_nf(y.transitions.get(&(b, a)).unwrap()))
        }
    };
    let fs = beta_frames(rep, &field, &y.eta_y, &transition, y.samples.len(), y.charts.len())?;
    let mut out = CechCocycle::new(rep.dim, y.charts.len());
    let mut deviation = 0.0_f64;
    for a in 0..y.charts.len() {
        for b in (a + 1)..y.charts.len() {
            let img = rep.eval(&transition(a, b));
            for yi in 0..y.samples.len() {
                if y.eta_y[a][yi] > 0.0 && y.eta_y[b][yi] > 0.0 {
                    let (fa, fb) = (&fs.frames[a][&yi], &fs.frames[b][&yi]);
                    let v = fa.adjoint().mul(fb);
                    deviation = deviation.max(v.sub(&img).op_norm());
                    out.insert(a, b, yi, v);
                }
            }
        }
    }
    Ok((out, deviation))
}

const TREE_NORMALIZATION_MAX: f64 = 0.25;

/// Tree-path gauges w_mu: products of cocycle values along the maximal tree
/// from the root chart, evaluated at designated overlap basepoints.
fn tree_gauges(
    v: &CechCocycle,
    charts: usize,
    tree: &[(usize, usize)],
    basepoint: &dyn Fn(usize, usize) -> Option<usize>,
) -> Result<Vec<CMatrix>> {
    let d = v.fiber_dim;
    let mut gauges: Vec<Option<CMatrix>> = vec![None; charts];
    gauges[0] = Some(CMatrix::identity(d));
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in tree {
            let (known, unknown, mu, nu) = match (&gauges[a], &gauges[b]) {
                (Some(_), None) => (a, b, a, b),
                (None, Some(_)) => (b, a, b, a),
                _ => continue,
            };
            let s = basepoint(mu, nu).ok_or_else(|| {
                KflatError::Invalid(format!("no overlap basepoint for tree edge ({mu},{nu})"))
            })?;
            let val = v
                .value(mu, nu, s)
                .ok_or_else(|| KflatError::Invalid(format!("missing cocycle value on tree edge ({mu},{nu})")))?;
            let w = gauges[known].as_ref().unwrap().mul(&val);
            gauges[unknown] = Some(w);
            changed = true;
        }
    }
    gauges
        .into_iter()
        .map(|g| g.ok_or(KflatError::Invalid("tree does not reach every chart".into())))
        .collect()
}

/// alpha: holonomy quasi-representation of a tree-normalized cocycle.
/// Generator images are read off gauge-corrected transition values at the
/// designated basepoints; the first edge carrying each generator (in
/// lexicographic order) is used.
pub fn alpha(v: &CechCocycle, cover: &GoodCoverPair) -> Result<QuasiRep> {
    let dev = v.tree_deviation(&cover.tree);
    if dev >= TREE_NORMALIZATION_MAX {
        return Err(KflatError::NotNormalized { deviation: dev });
    }
    let basepoint = |a: usize, b: usize| cover.overlap_basepoint(a, b);
    let gauges = tree_gauges(v, cover.index_count, &cover.tree, &basepoint)?;
    let rank = cover.gamma.rank();
    let mut images: Vec<Option<CMatrix>> = vec![None; rank];
    for (&(mu, nu), _) in &cover.transitions {
        let word = cover.transition(mu, nu);
        if word.length() != 1 {
            continue;
        }
        let letter = word.letters()[0];
        let k = letter.unsigned_abs() as usize - 1;
        if images[k].is_some() {
            continue;
        }
        let s = basepoint(mu, nu)
            .ok_or_else(|| KflatError::Invalid(format!("no basepoint on edge ({mu},{nu})")))?;
        let val = v
            .value(mu, nu, s)
            .ok_or_else(|| KflatError::Invalid(format!("missing value on edge ({mu},{nu})")))?;
        let img = gauges[mu].mul(&val).mul(&gauges[nu].adjoint());
        let img = polar_correct(&img, 1e-9)?;
        images[k] = Some(if letter > 0 { img } else { img.adjoint() });
    }
    let gen_images: Vec<(i32, CMatrix)> = images
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            m.map(|img| ((k + 1) as i32, img)).ok_or_else(|| {
                KflatError::Invalid(format!("no single-generator edge realizes generator {}", k + 1))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QuasiRep::new(cover.gamma.clone(), v.fiber_dim, gen_images)
}

/// alpha over the Y cover.
pub fn alpha_y(v: &CechCocycle, cover: &GoodCoverPair) -> Result<QuasiRep> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    let dev = v.tree_deviation(&y.tree_y);
    if dev >= TREE_NORMALIZATION_MAX {
        return Err(KflatError::NotNormalized { deviation: dev });
    }
    let basepoint = |a: usize, b: usize| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for yi in 0..y.samples.len() {
            let w = y.eta_y[a][yi] * y.eta_y[b][yi];
            if w > 0.0 && best.map(|(_, bw)| w > bw + 1e-15).unwrap_or(true) {
                best = Some((yi, w));
            }
        }
        best.map(|(s, _)| s)
    };
    let gauges = tree_gauges(v, y.charts.len(), &y.tree_y, &basepoint)?;
    let rank = cover.lambda.rank();
    let mut images: Vec<Option<CMatrix>> = vec![None; rank];
    for (&(a, b), word) in &y.transitions {
        if word.length() != 1 || a > b {
            continue;
        }
        let letter = word.letters()[0];
        let k = letter.unsigned_abs() as usize - 1;
        if images[k].is_some() {
            continue;
        }
        let s = basepoint(a, b)
            .ok_or_else(|| KflatError::Invalid(format!("no basepoint on Y edge ({a},{b})")))?;
        let val = v
            .value(a, b, s)
            .ok_or_else(|| KflatError::Invalid(format!("missing value on Y edge ({a},{b})")))?;
        let img = gauges[a].mul(&val).mul(&gauges[b].adjoint());
        let img = polar_correct(&img, 1e-9)?;
        images[k] = Some(if letter > 0 { img } else { img.adjoint() });
    }
    let gen_images: Vec<(i32, CMatrix)> = images
        .into_iter()
        .enumerate()
        .map(|(k, m)| {
            m.map(|img| ((k + 1) as i32, img)).ok_or_else(|| {
                KflatError::Invalid(format!("no single-generator Y edge realizes generator {}", k + 1))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QuasiRep::new(cover.lambda.clone(), v.fiber_dim, gen_images)
}

/// Componentwise beta with the diagonal constant-u assignment.
pub fn beta_relative(
    rep: &RelativeQuasiRep,
    cover: &GoodCoverPair,
) -> Result<(StablyRelativeCocycle, f64)> {
    let (v1, d1) = beta(&rep.pi1, cover)?;
    let (v2, d2) = beta(&rep.pi2, cover)?;
    let (v0, d0) = beta_y(&rep.pi0, cover)?;
    let y = cover.ypart.as_ref().unwrap();
    let u = vec![rep.u.clone(); y.charts.len()];
    Ok((StablyRelativeCocycle { v1, v2, v0, u }, d1.max(d2).max(d0)))
}

/// Componentwise alpha plus the intertwiner at the designated basepoint
/// chart (the first Y chart).
pub fn alpha_relative(
    fv: &StablyRelativeCocycle,
    cover: &GoodCoverPair,
) -> Result<RelativeQuasiRep> {
    let pi1 = alpha(&fv.v1, cover)?;
    let pi2 = alpha(&fv.v2, cover)?;
    let pi0 = alpha_y(&fv.v0, cover)?;
    let u = fv.u.first().cloned().ok_or(KflatError::Invalid("no u data".into()))?;
    RelativeQuasiRep::new(pi1, pi2, pi0, u, cover.phi.clone())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub defect_in: f64,
    pub defect_out: f64,
    pub round_trip_distance: f64,
    /// measured ratio: round-trip distance over the input defect
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Round-trip report for a quasi-representation on the generator set:
/// d(alpha(beta(pi)), pi), thresholds recorded with the report.
pub fn round_trip_report(
    rep: &QuasiRep,
    cover: &GoodCoverPair,
    threshold_ratio: f64,
) -> Result<MonodromyReport> {
    let words = rep.group.ball(1);
    let defect_in = rep.defect(&words);
    let (v, _) = beta(rep, cover)?;
    let back = alpha(&v, cover)?;
    let dist = rep.distance(&back, &words)?;
    let defect_out = back.defect(&words);
    let denom = defect_in.max(1e-14);
    let ratio = dist / denom;
    let pass = if defect_in < 1e-12 { dist <= 1e-7 } else { ratio <= threshold_ratio };
    Ok(MonodromyReport {
        defect_in,
        defect_out,
        round_trip_distance: dist,
        ratio,
        threshold: threshold_ratio,
        pass,
    })
}

/// Cocycle-side round trip: d(beta(alpha(v)), v).
pub fn round_trip_report_cocycle(
    v: &CechCocycle,
    cover: &GoodCoverPair,
    threshold_ratio: f64,
) -> Result<MonodromyReport> {
    let defect_in = v.flatness_defect().max(v.tree_deviation(&cover.tree));
    let rep = alpha(v, cover)?;
    let (back, _) = beta(&rep, cover)?;
    let dist = v.distance(&back)?;
    let defect_out = back.flatness_defect();
    let denom = defect_in.max(1e-14);
    let ratio = dist / denom;
    let pass = if defect_in < 1e-12 { dist <= 1e-7 } else { ratio <= threshold_ratio };
    Ok(MonodromyReport {
        defect_in,
        defect_out,
        round_trip_distance: dist,
        ratio,
        threshold: threshold_ratio,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{disk_pair_cover, torus_cover};
    use crate::quasirep::{clock_shift_rep, commuting_rep};

    #[test]
    fn beta_of_exact_rep_is_flat() {
        let cover = torus_cover(24).unwrap();
        let rep = commuting_rep(4);
        let (v, dev) = beta(&rep, &cover).unwrap();
        assert!(dev <= 1e-8, "exact rep gives v close to pi(gamma): {dev}");
        assert!(v.flatness_defect() <= 1e-8);
        assert!(v.cocycle_defect(&cover) <= 1e-9, "beta output is an exact cocycle");
    }

    #[test]
    fn beta_clock_shift_exact_cocycle_and_logged_deviation() {
        let cover = torus_cover(24).unwrap();
        let rep = clock_shift_rep(16).self_adjointify_unchecked();
        let eps = rep.defect(&rep.group.ball(1));
        let (v, dev) = beta(&rep, &cover).unwrap();
        assert!(v.cocycle_defect(&cover) <= 1e-9, "triangle identity holds regardless of eps");
        // measured deviation against the characterization constant
        assert!(dev <= 4.0 * eps, "C_beta within the cited 4 eps at this scale: {dev} vs {eps}");
        assert!(v.flatness_defect() > 0.0);
    }

    #[test]
    fn alpha_recovers_exact_rep() {
        let cover = torus_cover(24).unwrap();
        let rep = commuting_rep(4);
        let (v, _) = beta(&rep, &cover).unwrap();
        let back = alpha(&v, &cover).unwrap();
        let d = rep.distance(&back, &rep.group.ball(1)).unwrap();
        assert!(d <= 1e-8, "flat holonomy recovers the rep: {d}");
    }

    #[test]
    fn alpha_of_constant_identity_is_trivial() {
        let cover = torus_cover(24).unwrap();
        let v = CechCocycle::constant(&cover, |_, _| CMatrix::identity(3));
        let rep = alpha(&v, &cover).unwrap();
        let ball = rep.group.ball(1);
        assert!(rep.defect(&ball) < 1e-12);
        let triv = QuasiRep::trivial(cover.gamma.clone(), 3);
        assert!(rep.distance(&triv, &ball).unwrap() < 1e-12);
    }

    #[test]
    fn round_trip_clock_shift_ratio() {
        let cover = torus_cover(24).unwrap();
        for n in [8usize, 16] {
            let rep = clock_shift_rep(n).self_adjointify_unchecked();
            let report = round_trip_report(&rep, &cover, 10.0).unwrap();
            assert!(report.pass, "n={n}: ratio {}", report.ratio);
        }
    }

    #[test]
    fn beta_relative_flat_class_and_sum_compat() {
        let cover = disk_pair_cover(24).unwrap();
        use crate::quasirep::{clock_shift, RelativeQuasiRep};
        use crate::groups::GroupHom;
        let gamma = GroupSpec::Trivial;
        let lambda = GroupSpec::FreeAbelian { rank: 1 };
        let phi = GroupHom::to_trivial(lambda.clone());
        let (c, _s) = clock_shift(8);
        let pi0 = QuasiRep::new(lambda, 8, vec![(1, c)]).unwrap();
        let rep = RelativeQuasiRep::new(
            QuasiRep::trivial(gamma.clone(), 1),
            QuasiRep::trivial(gamma, 1),
            pi0,
            CMatrix::identity(9),
            phi,
        )
        .unwrap();
        let (fv, dev) = beta_relative(&rep, &cover).unwrap();
        assert!(dev <= 1e-8);
        // u = 1 and pi1 = pi2: class 0
        let c = crate::bundles::relative_class_clutching(&cover, &fv).unwrap();
        assert_eq!(c, 0);
        // direct-sum compatibility componentwise
        let sum = rep.direct_sum(&rep).unwrap();
        let (fv2, _) = beta_relative(&sum, &cover).unwrap();
        let direct = fv.v0.direct_sum(&fv.v0).unwrap();
        assert!(fv2.v0.distance(&direct).unwrap() <= 1e-9);
    }

    #[test]
    fn alpha_relative_round_trip() {
        let cover = disk_pair_cover(24).unwrap();
        use crate::quasirep::{clock_shift, RelativeQuasiRep};
        use crate::groups::GroupHom;
        let lambda = GroupSpec::FreeAbelian { rank: 1 };
        let phi = GroupHom::to_trivial(lambda.clone());
        let (c, s) = clock_shift(8);
        let pi0 = QuasiRep::new(lambda.clone(), 8, vec![(1, c)]).unwrap();
        let u = CMatrix::identity(1).direct_sum(&s);
        let rep = RelativeQuasiRep::new(
            QuasiRep::trivial(GroupSpec::Trivial, 1),
            QuasiRep::trivial(GroupSpec::Trivial, 1),
            pi0,
            u,
            phi,
        )
        .unwrap();
        let (fv, _) = beta_relative(&rep, &cover).unwrap();
        let back = alpha_relative(&fv, &cover).unwrap();
        let dist = rep
            .distance(&back, &GroupSpec::Trivial.ball(1), &lambda.ball(1))
            .unwrap();
        let eps = rep.intertwiner_defect(&lambda.ball(1));
        assert!(dist <= 10.0 * eps.max(1e-12), "round trip distance {dist} vs eps {eps}");
    }
}
