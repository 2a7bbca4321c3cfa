//! Partition-of-unity projections with their frames, and the
//! link-variable first Chern number on closed-surface covers.

use num_complex::Complex64;

use super::cocycle::CechCocycle;
use crate::covers::GoodCoverPair;
use crate::error::{KflatError, Result};
use crate::numerics::{hermitian_eigen, polar_correct, CMatrix};

/// Minimal admissible distance from 1/2 to the spectrum in the Chern and
/// projection-rounding routines.
pub const GAP_MARGIN: f64 = 0.02;

/// p_v(x) = sum_{mu nu} eta_mu(x) eta_nu(x) v_{mu nu}(x) (x) e_{mu nu}
/// assembled at one sample. Exact cocycles give exact projections.
pub fn cocycle_projection_at(
    v: &CechCocycle,
    cover: &GoodCoverPair,
    sample: usize,
) -> Result<CMatrix> {
    let d = v.fiber_dim;
    let k = cover.index_count;
    let mut out = CMatrix::zeros(k * d, k * d);
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
            let val = if mu == nu {
                CMatrix::identity(d)
            } else {
                v.value(mu, nu, sample).ok_or_else(|| {
                    KflatError::Invalid(format!(
                        "cocycle missing value on edge ({mu},{nu}) at sample {sample}"
                    ))
                })?
            };
            out.set_block(mu * d, nu * d, &val.scale(Complex64::new(wm * wn, 0.0)));
        }
    }
    Ok(out)
}

/// The local frame psi_mu(x) = sum_nu eta_nu(x) v_{nu mu}(x) (x) e_nu; an
/// isometry onto the range of p_v(x) with psi_mu* psi_nu = v_{mu nu}(x).
pub fn cocycle_frame_at(
    v: &CechCocycle,
    cover: &GoodCoverPair,
    sample: usize,
    chart: usize,
) -> Result<CMatrix> {
    let d = v.fiber_dim;
    let k = cover.index_count;
    if cover.eta[chart][sample] <= 0.0 {
        return Err(KflatError::Invalid(format!(
            "frame requested outside chart {chart} at sample {sample}"
        )));
    }
    let mut out = CMatrix::zeros(k * d, d);
    for nu in 0..k {
        let wn = cover.eta[nu][sample];
        if wn == 0.0 {
            continue;
        }
        let val = if nu == chart {
            CMatrix::identity(d)
        } else {
            v.value(nu, chart, sample).ok_or_else(|| {
                KflatError::Invalid(format!(
                    "cocycle missing value on edge ({nu},{chart}) at sample {sample}"
                ))
            })?
        };
        out.set_block(nu * d, 0, &val.scale(Complex64::new(wn, 0.0)));
    }
    Ok(out)
}

/// Spectral frame: orthonormal columns spanning the eigenspace above 1/2,
/// plus the measured gap. Errors with GapClosed when an eigenvalue sits
/// within `margin` of 1/2.
pub fn spectral_frame(m: &CMatrix, margin: f64) -> Result<(CMatrix, f64)> {
    let spec = hermitian_eigen(m)?;
    let mut gap = f64::INFINITY;
    let mut cols = Vec::new();
    for (i, &l) in spec.eigenvalues.iter().enumerate() {
        gap = gap.min((l - 0.5).abs());
        if l > 0.5 {
            cols.push(i);
        }
    }
    if gap < margin {
        return Err(KflatError::GapClosed { eigenvalue: 0.5 + gap });
    }
    let n = m.rows();
    let mut f = CMatrix::zeros(n, cols.len());
    for (jj, &j) in cols.iter().enumerate() {
        for i in 0..n {
            f.set(i, jj, spec.eigenvectors.get(i, j));
        }
    }
    Ok((f, gap))
}

/// Lattice field-strength (link-variable) first Chern number of a sampled
/// projection field over a closed-surface cover. Integer by construction
/// and stable under grid refinement when the gap stays open.
pub fn chern_number(
    cover: &GoodCoverPair,
    field: &(dyn Fn(usize) -> Result<CMatrix> + Sync),
) -> Result<i64> {
    let n = cover.samples.len();
    let frames = compute_frames(cover, field, n)?;
    let rank0 = frames[0].cols();
    if frames.iter().any(|f| f.cols() != rank0) {
        return Err(KflatError::GapClosed { eigenvalue: 0.5 });
    }
    let mut total = 0.0_f64;
    for s in 0..n {
        let Some([r, u]) = cover.samples[s].plaquette else {
            return Err(KflatError::Invalid("chern evaluator needs plaquette adjacency".into()));
        };
        let Some([ru, _]) = cover.samples[r].plaquette.map(|p| [p[1], 0]) else {
            return Err(KflatError::Invalid("broken plaquette adjacency".into()));
        };
        let l1 = link(&frames[s], &frames[r])?;
        let l2 = link(&frames[r], &frames[ru])?;
        let l3 = link(&frames[ru], &frames[u])?;
        let l4 = link(&frames[u], &frames[s])?;
        total += (l1 * l2 * l3 * l4).arg();
    }
    let w = total / (2.0 * std::f64::consts::PI);
    let rounded = w.round();
    if (w - rounded).abs() > 1e-6 {
        return Err(KflatError::TruncationTooCoarse { defect: 0.0, residue: (w - rounded).abs() });
    }
    Ok(rounded as i64)
}

fn link(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    let overlap = a.adjoint().mul(b);
    let (logabs, arg) = overlap.slogdet();
    if logabs < -25.0 {
        return Err(KflatError::Invalid("degenerate link variable: frames nearly orthogonal".into()));
    }
    Ok(Complex64::from_polar(logabs.exp(), arg))
}

#[cfg(feature = "parallel")]
fn compute_frames(
    cover: &GoodCoverPair,
    field: &(dyn Fn(usize) -> Result<CMatrix> + Sync),
    n: usize,
) -> Result<Vec<CMatrix>> {
    use rayon::prelude::*;
    let _ = cover;
    (0..n)
        .into_par_iter()
        .map(|s| spectral_frame(&field(s)?, GAP_MARGIN).map(|(f, _)| f))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn compute_frames(
    cover: &GoodCoverPair,
    field: &(dyn Fn(usize) -> Result<CMatrix> + Sync),
    n: usize,
) -> Result<Vec<CMatrix>> {
    let _ = cover;
    (0..n)
        .map(|s| spectral_frame(&field(s)?, GAP_MARGIN).map(|(f, _)| f))
        .collect()
}

/// The frames of an exact-cocycle projection, polar-corrected onto the
/// range of a given reference projection (used by the monodromy map).
pub fn project_frame(p: &CMatrix, candidate: &CMatrix, tol: f64) -> Result<CMatrix> {
    polar_correct(&p.mul(candidate), tol)
}

/// The analytic sign-convention fixture: the lower band of the two-band
/// monopole Hamiltonian sin(2 pi x) s1 + sin(2 pi y) s2 + (1 - cos - cos) s3
/// carries first Chern number +1 in this crate's orientation.
pub fn monopole_band(x: f64, y: f64) -> CMatrix {
    let tau = 2.0 * std::f64::consts::PI;
    let hx = (tau * x).sin();
    let hy = (tau * y).sin();
    let hz = 1.0 - (tau * x).cos() - (tau * y).cos();
    let h = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(hz, 0.0),
        (0, 1) => Complex64::new(hx, -hy),
        (1, 0) => Complex64::new(hx, hy),
        _ => Complex64::new(-hz, 0.0),
    });
    let spec = hermitian_eigen(&h).expect("fixture eigen");
    let q = &spec.eigenvectors;
    let lam = CMatrix::diag(
        &spec
            .eigenvalues
            .iter()
            .map(|&l| if l < 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect::<Vec<_>>(),
    );
    q.mul(&lam).mul(&q.adjoint())
}

/// Binary dump of a sampled projection field with a JSON index manifest.
pub fn dump_projection_field(
    dir: &std::path::Path,
    name: &str,
    cover: &GoodCoverPair,
    field: &(dyn Fn(usize) -> Result<CMatrix> + Sync),
) -> Result<()> {
    use std::io::Write;
    std::fs::create_dir_all(dir).map_err(|e| KflatError::Invalid(e.to_string()))?;
    let n = cover.samples.len();
    let first = field(0)?;
    let dim = first.rows();
    let bin_path = dir.join(format!("{name}.bin"));
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(&bin_path).map_err(|e| KflatError::Invalid(e.to_string()))?,
    );
    for s in 0..n {
        let m = field(s)?;
        for i in 0..dim {
            for j in 0..dim {
                let z = m.get(i, j);
                f.write_all(&z.re.to_le_bytes()).map_err(|e| KflatError::Invalid(e.to_string()))?;
                f.write_all(&z.im.to_le_bytes()).map_err(|e| KflatError::Invalid(e.to_string()))?;
            }
        }
    }
    let manifest = serde_json::json!({
        "samples": n,
        "dim": dim,
        "layout": "per-sample row-major complex128 (little-endian re, im)",
        "bin": format!("{name}.bin"),
    });
    std::fs::write(dir.join(format!("{name}.manifest.json")), manifest.to_string())
        .map_err(|e| KflatError::Invalid(e.to_string()))?;
    Ok(())
}
