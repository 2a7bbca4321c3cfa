//! Exact-intertwiner correction on the boundary circle and the clutching
//! degree of stably relative cocycles on the disk pair.

use num_complex::Complex64;

use super::cocycle::StablyRelativeCocycle;
use crate::covers::GoodCoverPair;
use crate::error::{KflatError, Result};
use crate::numerics::{det_winding_int, polar_correct, polar_partial, unitary_log, CMatrix};

/// Exact bundle morphism data produced by the partition-of-unity average.
pub struct ExactIntertwiner {
    /// per Y-sample: the partial isometry wbar with wbar* wbar = p1,
    /// wbar wbar* = p2 (joint projections of v1|Y (+) v0 and v2|Y (+) v0)
    pub wbar: Vec<CMatrix>,
    /// per (Y-chart, Y-sample): the chartwise exact unitary ubar_mu(x)
    /// (present where the chart is active)
    pub ubar: Vec<Vec<Option<CMatrix>>>,
    /// max over charts and samples of ||ubar_mu(x) - u_mu||
    pub max_u_deviation: f64,
    /// measured ||wbar - p2 diag(u_mu)|| against the remark bound
    pub wbar_deviation: f64,
    pub wbar_bound: f64,
    /// worst exactness residues (intertwining and partial-isometry checks)
    pub exactness: f64,
}

/// Joint Y-cocycle value (v_i|Y (+) v0)_{jk} at a Y-sample, in the
/// interleaved per-chart block layout of size p + q.
fn joint_value(
    cover: &GoodCoverPair,
    fv: &StablyRelativeCocycle,
    which: u8,
    j: usize,
    k: usize,
    yi: usize,
) -> Result<CMatrix> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    let (p, q) = (fv.dim_p(), fv.dim_q());
    if j == k {
        return Ok(CMatrix::identity(p + q));
    }
    let vx = if which == 1 { &fv.v1 } else { &fv.v2 };
    let xs = y.samples[yi];
    let top = vx.value(y.charts[j], y.charts[k], xs).ok_or_else(|| {
        KflatError::Invalid(format!("v{} missing on Y edge ({j},{k}) sample {yi}", which))
    })?;
    let bot = fv.v0.value(j, k, yi).ok_or_else(|| {
        KflatError::Invalid(format!("v0 missing on Y edge ({j},{k}) sample {yi}"))
    })?;
    Ok(top.direct_sum(&bot))
}

/// Joint projection p_{v_i|Y (+) v0}(x) over the Y cover.
pub fn joint_projection_at(
    cover: &GoodCoverPair,
    fv: &StablyRelativeCocycle,
    which: u8,
    yi: usize,
) -> Result<CMatrix> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    let d = fv.dim_p() + fv.dim_q();
    let k = y.charts.len();
    let mut out = CMatrix::zeros(k * d, k * d);
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
            let val = joint_value(cover, fv, which, a, b, yi)?;
            out.set_block(a * d, b * d, &val.scale(Complex64::new(wa * wb, 0.0)));
        }
    }
    Ok(out)
}

/// Joint frame psi_a(x) of the joint projection, per the partition formula.
pub fn joint_frame_at(
    cover: &GoodCoverPair,
    fv: &StablyRelativeCocycle,
    which: u8,
    chart: usize,
    yi: usize,
) -> Result<CMatrix> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    let d = fv.dim_p() + fv.dim_q();
    let k = y.charts.len();
    let mut out = CMatrix::zeros(k * d, d);
    for a in 0..k {
        let wa = y.eta_y[a][yi];
        if wa == 0.0 {
            continue;
        }
        let val = joint_value(cover, fv, which, a, chart, yi)?;
        out.set_block(a * d, 0, &val.scale(Complex64::new(wa, 0.0)));
    }
    Ok(out)
}

const EXACTNESS_TOL: f64 = 1e-8;

/// Fiberwise partition-of-unity average T(x) = sum eta_mu^2 psi2_mu u_mu
/// psi1_mu*, polar-corrected to the exact bundle morphism wbar, with the
/// chartwise unitaries ubar_mu recovered through the frames.
pub fn exact_intertwiner(
    cover: &GoodCoverPair,
    fv: &StablyRelativeCocycle,
) -> Result<ExactIntertwiner> {
    let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
    let d = fv.dim_p() + fv.dim_q();
    let charts = y.charts.len();
    let ny = y.samples.len();
    if fv.u.len() != charts {
        return Err(KflatError::DimMismatch { left: fv.u.len(), right: charts });
    }
    for u in &fv.u {
        if u.rows() != d {
            return Err(KflatError::DimMismatch { left: u.rows(), right: d });
        }
    }
    let mut wbar = Vec::with_capacity(ny);
    let mut ubar: Vec<Vec<Option<CMatrix>>> = vec![vec![None; ny]; charts];
    let mut exactness = 0.0_f64;
    let mut max_dev = 0.0_f64;
    let mut wdev = 0.0_f64;
    for yi in 0..ny {
        let p1 = joint_projection_at(cover, fv, 1, yi)?;
        let p2 = joint_projection_at(cover, fv, 2, yi)?;
        let mut t = CMatrix::zeros(charts * d, charts * d);
        for a in 0..charts {
            let w = y.eta_y[a][yi];
            if w == 0.0 {
                continue;
            }
            let f2 = joint_frame_at(cover, fv, 2, a, yi)?;
            let f1 = joint_frame_at(cover, fv, 1, a, yi)?;
            t = t.add(&f2.mul(&fv.u[a]).mul(&f1.adjoint()).scale(Complex64::new(w * w, 0.0)));
        }
        let (w, rank) = polar_partial(&t, 1e-6);
        if rank != d {
            let smin = crate::numerics::polar::sigma_min(&t).unwrap_or(0.0);
            return Err(KflatError::AveragingSingular { sigma_min: smin });
        }
        exactness = exactness
            .max(w.adjoint().mul(&w).sub(&p1).op_norm())
            .max(w.mul(&w.adjoint()).sub(&p2).op_norm());
        // chartwise exact unitaries and the deviation report
        for a in 0..charts {
            if y.eta_y[a][yi] == 0.0 {
                continue;
            }
            let f2 = joint_frame_at(cover, fv, 2, a, yi)?;
            let f1 = joint_frame_at(cover, fv, 1, a, yi)?;
            let ua = f2.adjoint().mul(&w).mul(&f1);
            max_dev = max_dev.max(ua.sub(&fv.u[a]).op_norm());
            ubar[a][yi] = Some(ua);
        }
        // remark bound: || wbar - p2 diag(u_mu) ||
        let mut diag_u = CMatrix::zeros(charts * d, charts * d);
        for a in 0..charts {
            diag_u.set_block(a * d, a * d, &fv.u[a]);
        }
        wdev = wdev.max(w.sub(&p2.mul(&diag_u)).op_norm());
        wbar.push(w);
    }
    // exact intertwining on Y edges through the frames
    for yi in 0..ny {
        for a in 0..charts {
            for b in 0..charts {
                if a == b || y.eta_y[a][yi] == 0.0 || y.eta_y[b][yi] == 0.0 {
                    continue;
                }
                let (ua, ub) = match (&ubar[a][yi], &ubar[b][yi]) {
                    (Some(x), Some(yv)) => (x, yv),
                    _ => continue,
                };
                let w1 = joint_value(cover, fv, 1, a, b, yi)?;
                let w2 = joint_value(cover, fv, 2, a, b, yi)?;
                exactness = exactness.max(ua.mul(&w1).mul(&ub.adjoint()).sub(&w2).op_norm());
            }
        }
    }
    if exactness > EXACTNESS_TOL * 10.0 {
        return Err(KflatError::Invalid(format!(
            "exact intertwiner failed its exactness contract ({exactness:.3e})"
        )));
    }
    let bound = (charts * charts) as f64 * max_dev;
    Ok(ExactIntertwiner {
        wbar,
        ubar,
        max_u_deviation: max_dev,
        wbar_deviation: wdev,
        wbar_bound: bound,
        exactness,
    })
}

/// Layout of the polar disk sample grid (rings x angles, boundary last).
struct DiskLayout {
    n_theta: usize,
    n_rings: usize,
}

impl DiskLayout {
    fn of(cover: &GoodCoverPair) -> Result<Self> {
        let y = cover.ypart.as_ref().ok_or(KflatError::Invalid("cover has no Y part".into()))?;
        let n_theta = y.samples.len();
        let total = cover.samples.len();
        if n_theta == 0 || total % n_theta != 0 {
            return Err(KflatError::Invalid("disk sample grid is not ring-major".into()));
        }
        Ok(DiskLayout { n_theta, n_rings: total / n_theta })
    }

    fn sample(&self, ring: usize, j: usize) -> usize {
        ring * self.n_theta + j
    }
}

/// Continuous frame transport: the polar part of p_next * frame.
fn transport(p_next: &CMatrix, frame: &CMatrix) -> Result<CMatrix> {
    polar_correct(&p_next.mul(frame), 1e-10)
}

/// Periodic loop frames of a projection field along the boundary circle:
/// path transport around the loop with the holonomy distributed by its
/// principal logarithm.
fn loop_frames(projs: &[CMatrix], start: CMatrix) -> Result<Vec<CMatrix>> {
    let n = projs.len();
    let mut raw = Vec::with_capacity(n);
    raw.push(start);
    for j in 1..n {
        let prev = raw[j - 1].clone();
        raw.push(transport(&projs[j], &prev)?);
    }
    let back = transport(&projs[0], &raw[n - 1])?;
    let holonomy = raw[0].adjoint().mul(&back);
    let log_h = unitary_log(&holonomy)?;
    let out = (0..n)
        .map(|j| -> Result<CMatrix> {
            let t = j as f64 / n as f64;
            let corr = crate::numerics::skew_exp(&log_h.scale(Complex64::new(-t, 0.0)))?;
            Ok(raw[j].mul(&corr))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out)
}

/// First frame of a projection by its spectral decomposition (gauge fixed
/// only up to a unitary; always used as a transport seed).
fn seed_frame(p: &CMatrix, rank: usize) -> Result<CMatrix> {
    let (f, _) = super::projection::spectral_frame(p, 1e-6)?;
    if f.cols() != rank {
        return Err(KflatError::GapClosed { eigenvalue: 0.5 });
    }
    Ok(f)
}

/// Clutching degree of a stably relative cocycle on the disk pair: the
/// winding of the boundary gluing loop in disk-extended trivializations.
/// Zero when v1 = v2 and u = 1.
pub fn relative_class_clutching(
    cover: &GoodCoverPair,
    fv: &StablyRelativeCocycle,
) -> Result<i64> {
    let loop_path = clutching_loop(cover, fv)?;
    det_winding_int(&loop_path, true)
}

/// The boundary gluing loop L(theta) = F2(theta)* wbar(theta) F1(theta),
/// where F_i are boundary restrictions of disk-extended trivializations of
/// E_i joined with a periodic trivialization of E_0.
pub fn clutching_loop(
    cover: &GoodCoverPair,
    fv: &StablyRelativeCocycle,
) -> Result<Vec<CMatrix>> {
    let layout = DiskLayout::of(cover)?;
    let y = cover.ypart.as_ref().unwrap();
    let (p, q) = (fv.dim_p(), fv.dim_q());
    let nt = layout.n_theta;
    let charts = y.charts.len();
    let x_charts = cover.index_count;
    let intertwiner = exact_intertwiner(cover, fv)?;

    // disk-extended boundary frames of v1 and v2: innermost periodic loop,
    // then radial transport outward along each angular ray
    let mut boundary_frames: Vec<Vec<CMatrix>> = Vec::with_capacity(2);
    for which in [1u8, 2u8] {
        let v = if which == 1 { &fv.v1 } else { &fv.v2 };
        let inner_projs: Vec<CMatrix> = (0..nt)
            .map(|j| super::projection::cocycle_projection_at(v, cover, layout.sample(0, j)))
            .collect::<Result<Vec<_>>>()?;
        let seed = seed_frame(&inner_projs[0], p)?;
        let mut frames = loop_frames(&inner_projs, seed)?;
        for ring in 1..layout.n_rings {
            for (j, frame) in frames.iter_mut().enumerate() {
                let pr = super::projection::cocycle_projection_at(
                    v,
                    cover,
                    layout.sample(ring, j),
                )?;
                *frame = transport(&pr, frame)?;
            }
        }
        boundary_frames.push(frames);
    }

    // periodic E0 loop frames on the circle
    let v0_projs: Vec<CMatrix> = (0..nt)
        .map(|j| {
            let d = fv.dim_q();
            let mut out = CMatrix::zeros(charts * d, charts * d);
            for a in 0..charts {
                let wa = y.eta_y[a][j];
                if wa == 0.0 {
                    continue;
                }
                for b in 0..charts {
                    let wb = y.eta_y[b][j];
                    if wb == 0.0 {
                        continue;
                    }
                    let val = if a == b {
                        CMatrix::identity(d)
                    } else {
                        fv.v0.value(a, b, j).ok_or_else(|| {
                            KflatError::Invalid(format!("v0 missing on edge ({a},{b})"))
                        })?
                    };
                    out.set_block(a * d, b * d, &val.scale(Complex64::new(wa * wb, 0.0)));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<CMatrix>>>()?;
    let seed0 = seed_frame(&v0_projs[0], q)?;
    let phi0 = loop_frames(&v0_projs, seed0)?;

    // assemble the clutching loop L(theta) = F2* wbar F1 in U(p + q)
    let mut loop_path = Vec::with_capacity(nt + 1);
    for j in 0..nt {
        let mut f = [CMatrix::zeros(charts * (p + q), p + q), CMatrix::zeros(charts * (p + q), p + q)];
        for (wi, fr) in f.iter_mut().enumerate() {
            let wx = &boundary_frames[wi][j];
            // drop the center-chart block (identically zero on the boundary)
            for (a, &xa) in y.charts.iter().enumerate() {
                let _ = x_charts;
                let top = wx.submatrix(xa * p, 0, p, p);
                fr.set_block(a * (p + q), 0, &top);
                let bot = phi0[j].submatrix(a * q, 0, q, q);
                fr.set_block(a * (p + q) + p, p, &bot);
            }
        }
        let l = f[1].adjoint().mul(&intertwiner.wbar[j]).mul(&f[0]);
        loop_path.push(l);
    }
    loop_path.push(loop_path[0].clone());
    Ok(loop_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundles::cocycle::CechCocycle;
    use crate::covers::disk_pair_cover;
    use crate::quasirep::clock_shift;

    /// Flat stably relative cocycle for the disk scenario: v1 = v2 trivial
    /// of rank p, v0 the flat clock cocycle, u = 1 (+) shift^k per chart.
    fn disk_fv(cover: &GoodCoverPair, n: usize, shift_power: usize) -> StablyRelativeCocycle {
        let y = cover.ypart.as_ref().unwrap();
        let p = 1usize;
        let v1 = CechCocycle::constant(cover, |_, _| CMatrix::identity(p));
        let v2 = v1.clone();
        let (c, s) = clock_shift(n);
        let pi0 = |w: &crate::groups::NormalForm| -> CMatrix {
            let e = w.exponents(1)[0];
            let mut acc = CMatrix::identity(n);
            for _ in 0..e.abs() {
                acc = if e > 0 { acc.mul(&c) } else { acc.mul(&c.adjoint()) };
            }
            acc
        };
        let mut v0 = CechCocycle::new(n, 3);
        for a in 0..3usize {
            for b in (a + 1)..3 {
                let w = y.transitions.get(&(a, b)).unwrap();
                let val = pi0(w);
                for (yi, _) in y.samples.iter().enumerate() {
                    if y.eta_y[a][yi] > 0.0 && y.eta_y[b][yi] > 0.0 {
                        v0.insert(a, b, yi, val.clone());
                    }
                }
            }
        }
        let mut sk = CMatrix::identity(n);
        for _ in 0..shift_power {
            sk = sk.mul(&s);
        }
        let u = CMatrix::identity(p).direct_sum(&sk);
        StablyRelativeCocycle { v1, v2, v0, u: vec![u; 3] }
    }

    #[test]
    fn exact_intertwiner_trivial_input() {
        let cover = disk_pair_cover(24).unwrap();
        let fv = disk_fv(&cover, 8, 0);
        let out = exact_intertwiner(&cover, &fv).unwrap();
        assert!(out.exactness < 1e-8);
        assert!(out.max_u_deviation < 1e-8, "u = 1 is already exact");
    }

    #[test]
    fn exact_intertwiner_shift_measured() {
        let cover = disk_pair_cover(24).unwrap();
        let n = 8;
        let fv = disk_fv(&cover, n, 1);
        let out = exact_intertwiner(&cover, &fv).unwrap();
        let eps = 2.0 * (std::f64::consts::PI / n as f64).sin();
        assert!(out.exactness < 1e-8);
        assert!(out.max_u_deviation > 1e-4, "shift genuinely deviates");
        assert!(out.max_u_deviation <= 2.0 * eps, "deviation within C * eps");
        assert!(out.wbar_deviation <= out.wbar_bound + 1e-9);
    }

    #[test]
    fn clutching_trivial_is_zero() {
        let cover = disk_pair_cover(24).unwrap();
        let fv = disk_fv(&cover, 8, 0);
        assert_eq!(relative_class_clutching(&cover, &fv).unwrap(), 0);
    }

    #[test]
    fn clutching_shift_is_unit_and_additive() {
        // the doubled shift twists the gluing loop twice as fast, so the
        // winding precondition needs the finer circle grid
        let cover = disk_pair_cover(48).unwrap();
        let c1 = relative_class_clutching(&cover, &disk_fv(&cover, 8, 1)).unwrap();
        let c2 = relative_class_clutching(&cover, &disk_fv(&cover, 8, 2)).unwrap();
        assert_eq!(c1.abs(), 1, "clutching of the clock/shift pair is a unit");
        assert_eq!(c2, 2 * c1, "doubling the shift doubles the degree");
        // block direct sum of the u-data adds degrees
        let fv1 = disk_fv(&cover, 8, 1);
        let mut fv_sum = disk_fv(&cover, 8, 1);
        fv_sum.v1 = fv1.v1.direct_sum(&fv1.v1).unwrap();
        fv_sum.v2 = fv1.v2.direct_sum(&fv1.v2).unwrap();
        fv_sum.v0 = fv1.v0.direct_sum(&fv1.v0).unwrap();
        fv_sum.u = fv1
            .u
            .iter()
            .map(|u| {
                // reorder (P1+Q1)+(P2+Q2) -> (P1+P2)+(Q1+Q2)
                let d = u.rows();
                let (p, q) = (1usize, d - 1);
                let mut perm = CMatrix::zeros(2 * d, 2 * d);
                let src: Vec<usize> = (0..p)
                    .map(|i| i)
                    .chain((0..p).map(|i| d + i))
                    .chain((0..q).map(|i| p + i))
                    .chain((0..q).map(|i| d + p + i))
                    .collect();
                for (dst, &sc) in src.iter().enumerate() {
                    perm.set(dst, sc, num_complex::Complex64::new(1.0, 0.0));
                }
                perm.mul(&u.direct_sum(u)).mul(&perm.adjoint())
            })
            .collect();
        let csum = relative_class_clutching(&cover, &fv_sum).unwrap();
        assert_eq!(csum, 2 * c1, "additive under block direct sum of the u-data");
    }

    #[test]
    fn clutching_ranks_mismatch_rejected() {
        let cover = disk_pair_cover(24).unwrap();
        let mut fv = disk_fv(&cover, 8, 1);
        // deliberately incompatible u size
        fv.u = vec![CMatrix::identity(3); 3];
        assert!(matches!(
            exact_intertwiner(&cover, &fv),
            Err(KflatError::DimMismatch { .. })
        ));
    }
}
