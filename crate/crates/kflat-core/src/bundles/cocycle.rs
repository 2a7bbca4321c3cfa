//! Sampled Čech cocycles and stably relative cocycles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::covers::GoodCoverPair;
use crate::error::{KflatError, Result};
use crate::numerics::{CMatrix, MatrixJson};

/// Unitary transition data v_{mu nu}(x) sampled on overlaps. Values are
/// stored for ordered pairs mu < nu; the reverse orientation is the
/// samplewise adjoint and the diagonal is the identity.
#[derive(Clone, Debug)]
pub struct CechCocycle {
    pub fiber_dim: usize,
    pub chart_count: usize,
    /// edge (mu < nu) -> (sample id -> unitary)
    pub values: BTreeMap<(usize, usize), BTreeMap<usize, CMatrix>>,
}

impl CechCocycle {
    pub fn new(fiber_dim: usize, chart_count: usize) -> Self {
        CechCocycle { fiber_dim, chart_count, values: BTreeMap::new() }
    }

    pub fn insert(&mut self, mu: usize, nu: usize, sample: usize, v: CMatrix) {
        debug_assert!(mu < nu);
        self.values.entry((mu, nu)).or_default().insert(sample, v);
    }

    /// v_{mu nu}(x); identity on the diagonal, adjoint across orientation.
    pub fn value(&self, mu: usize, nu: usize, sample: usize) -> Option<CMatrix> {
        if mu == nu {
            return Some(CMatrix::identity(self.fiber_dim));
        }
        if mu < nu {
            self.values.get(&(mu, nu)).and_then(|m| m.get(&sample)).cloned()
        } else {
            self.values
                .get(&(nu, mu))
                .and_then(|m| m.get(&sample))
                .map(|v| v.adjoint())
        }
    }

    /// Constant cocycle from per-edge unitaries (e.g. a flat holonomy
    /// cocycle); samples are the cover's overlap samples.
    pub fn constant(cover: &GoodCoverPair, assign: impl Fn(usize, usize) -> CMatrix) -> Self {
        let dim = assign(0, 0).rows();
        let mut out = CechCocycle::new(dim, cover.index_count);
        for mu in 0..cover.index_count {
            for nu in (mu + 1)..cover.index_count {
                for s in cover.overlap_samples(mu, nu) {
                    out.insert(mu, nu, s, assign(mu, nu));
                }
            }
        }
        out
    }

    /// Max sample-pair oscillation over each edge: the flatness defect.
    pub fn flatness_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for samples in self.values.values() {
            let mats: Vec<&CMatrix> = samples.values().collect();
            for i in 0..mats.len() {
                for j in (i + 1)..mats.len() {
                    worst = worst.max(mats[i].sub(mats[j]).op_norm());
                }
            }
        }
        worst
    }

    /// Worst deviation ||v_{mu nu}(x) - 1|| over tree edges.
    pub fn tree_deviation(&self, tree: &[(usize, usize)]) -> f64 {
        let mut worst = 0.0_f64;
        let one = CMatrix::identity(self.fiber_dim);
        for &(a, b) in tree {
            let (mu, nu) = if a < b { (a, b) } else { (b, a) };
            if let Some(samples) = self.values.get(&(mu, nu)) {
                for v in samples.values() {
                    worst = worst.max(v.sub(&one).op_norm());
                }
            }
        }
        worst
    }

    /// Worst triangle deviation ||v_{mu nu} v_{nu sigma} - v_{mu sigma}||
    /// over triple-overlap samples.
    pub fn cocycle_defect(&self, cover: &GoodCoverPair) -> f64 {
        let mut worst = 0.0_f64;
        for &(a, b, c) in &cover.triangles {
            for s in 0..cover.samples.len() {
                if cover.eta[a][s] > 0.0 && cover.eta[b][s] > 0.0 && cover.eta[c][s] > 0.0 {
                    if let (Some(vab), Some(vbc), Some(vac)) =
                        (self.value(a, b, s), self.value(b, c, s), self.value(a, c, s))
                    {
                        worst = worst.max(vab.mul(&vbc).sub(&vac).op_norm());
                    }
                }
            }
        }
        worst
    }

    pub fn check_exact(&self, cover: &GoodCoverPair, tol: f64) -> Result<()> {
        let dev = self.cocycle_defect(cover);
        if dev > tol {
            return Err(KflatError::InexactCocycle { deviation: dev });
        }
        Ok(())
    }

    /// Samplewise unitary-defect of the stored values (diagnostics).
    pub fn worst_unitary_defect(&self) -> f64 {
        self.values
            .values()
            .flat_map(|m| m.values())
            .map(|v| v.unitary_defect())
            .fold(0.0, f64::max)
    }

    /// Block direct sum with another cocycle over the same cover.
    pub fn direct_sum(&self, other: &CechCocycle) -> Result<CechCocycle> {
        if self.chart_count != other.chart_count {
            return Err(KflatError::DimMismatch { left: self.chart_count, right: other.chart_count });
        }
        let mut out = CechCocycle::new(self.fiber_dim + other.fiber_dim, self.chart_count);
        for (&(mu, nu), samples) in &self.values {
            for (&s, v) in samples {
                let w = other
                    .value(mu, nu, s)
                    .ok_or_else(|| KflatError::Invalid("direct sum: overlap sample sets differ".into()))?;
                out.insert(mu, nu, s, v.direct_sum(&w));
            }
        }
        Ok(out)
    }

    /// Samplewise distance d(v, v') = max ||v_{mu nu}(x) - v'_{mu nu}(x)||.
    pub fn distance(&self, other: &CechCocycle) -> Result<f64> {
        if self.fiber_dim != other.fiber_dim {
            return Err(KflatError::DimMismatch { left: self.fiber_dim, right: other.fiber_dim });
        }
        let mut worst = 0.0_f64;
        for (&(mu, nu), samples) in &self.values {
            for (&s, v) in samples {
                if let Some(w) = other.value(mu, nu, s) {
                    worst = worst.max(v.sub(&w).op_norm());
                }
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> CocycleJson {
        CocycleJson {
            fiber_dim: self.fiber_dim,
            chart_count: self.chart_count,
            edges: self
                .values
                .iter()
                .map(|(&(mu, nu), samples)| EdgeJson {
                    mu,
                    nu,
                    samples: samples
                        .iter()
                        .map(|(&s, m)| (s, MatrixJson::from(m)))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CocycleJson) -> Result<Self> {
        let mut out = CechCocycle::new(j.fiber_dim, j.chart_count);
        for e in &j.edges {
            for (s, mj) in &e.samples {
                out.insert(e.mu, e.nu, *s, CMatrix::try_from(mj)?);
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
pub struct CocycleJson {
    pub fiber_dim: usize,
    pub chart_count: usize,
    pub edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
pub struct EdgeJson {
    pub mu: usize,
    pub nu: usize,
    pub samples: Vec<(usize, MatrixJson)>,
}

/// The quadruple (v1, v2, v0, u): two cocycles on X, one on Y, and constant
/// per-chart unitaries u_mu of size p + q on the Y charts.
#[derive(Clone, Debug)]
pub struct StablyRelativeCocycle {
    pub v1: CechCocycle,
    pub v2: CechCocycle,
    /// cocycle over the Y cover (chart indices are Y-chart indices)
    pub v0: CechCocycle,
    /// one unitary of size p + q per Y chart
    pub u: Vec<CMatrix>,
}

impl StablyRelativeCocycle {
    pub fn dim_p(&self) -> usize {
        self.v1.fiber_dim
    }

    pub fn dim_q(&self) -> usize {
        self.v0.fiber_dim
    }
}

/// Morphism defect: max over edges and overlap samples of
/// || u_mu v1_{mu nu}(x) u_nu* - v2_{mu nu}(x) ||.
pub fn morphism_defect(u: &[CMatrix], v1: &CechCocycle, v2: &CechCocycle) -> Result<f64> {
    if v1.fiber_dim != v2.fiber_dim {
        return Err(KflatError::DimMismatch { left: v1.fiber_dim, right: v2.fiber_dim });
    }
    if u.iter().any(|m| m.rows() != v1.fiber_dim) {
        return Err(KflatError::DimMismatch {
            left: u.first().map(|m| m.rows()).unwrap_or(0),
            right: v1.fiber_dim,
        });
    }
    let mut worst = 0.0_f64;
    for (&(mu, nu), samples) in &v1.values {
        for (&s, v) in samples {
            let Some(w) = v2.value(mu, nu, s) else { continue };
            let d = u[mu].mul(v).mul(&u[nu].adjoint()).sub(&w).op_norm();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::torus_cover;
    use num_complex::Complex64;

    #[test]
    fn constant_cocycle_is_flat() {
        let cover = torus_cover(24).unwrap();
        let v = CechCocycle::constant(&cover, |_, _| CMatrix::identity(2));
        assert_eq!(v.flatness_defect(), 0.0);
        assert_eq!(v.tree_deviation(&cover.tree), 0.0);
        assert!(v.cocycle_defect(&cover) < 1e-15);
    }

    #[test]
    fn twisted_tree_edge_detected() {
        let cover = torus_cover(24).unwrap();
        let anti = CMatrix::identity(1).scale(Complex64::new(-1.0, 0.0));
        let tree_edge = cover.tree[0];
        let v = CechCocycle::constant(&cover, |mu, nu| {
            if (mu, nu) == tree_edge || (nu, mu) == tree_edge {
                anti.clone()
            } else {
                CMatrix::identity(1)
            }
        });
        let dev = v.tree_deviation(&cover.tree);
        assert!((dev - 2.0).abs() < 1e-12, "antipodal unitary on a tree edge: {dev}");
    }

    #[test]
    fn morphism_defect_examples() {
        let cover = torus_cover(24).unwrap();
        let v = CechCocycle::constant(&cover, |_, _| CMatrix::identity(2));
        let u = vec![CMatrix::identity(2); 9];
        assert_eq!(morphism_defect(&u, &v, &v).unwrap(), 0.0);
        // a global unitary conjugating v to w exactly
        let g = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(1.0, 0.0),
            (1, 0) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, 0.0),
        });
        let base = CMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, 0.4 + i as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let v1 = CechCocycle::constant(&cover, |_, _| base.clone());
        let v2 = CechCocycle::constant(&cover, |_, _| g.mul(&base).mul(&g.adjoint()));
        let us = vec![g.clone(); 9];
        assert!(morphism_defect(&us, &v1, &v2).unwrap() < 1e-12);
    }

    #[test]
    fn direct_sum_and_distance() {
        let cover = torus_cover(24).unwrap();
        let v = CechCocycle::constant(&cover, |_, _| CMatrix::identity(1));
        let w = CechCocycle::constant(&cover, |_, _| {
            CMatrix::identity(1).scale(Complex64::from_polar(1.0, 0.2))
        });
        let sum = v.direct_sum(&w).unwrap();
        assert_eq!(sum.fiber_dim, 2);
        let d = v.distance(&w).unwrap();
        assert!((d - (Complex64::from_polar(1.0, 0.2) - Complex64::new(1.0, 0.0)).norm()).abs() < 1e-12);
    }
}
