//! Finite good covers of the built-in spaces with sampled partitions of
//! unity, nerve data, maximal trees, and transition words.

mod disk;
pub mod profile;
mod torus;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{KflatError, Result};
use crate::groups::{GroupHom, GroupSpec, NormalForm};

pub use disk::disk_pair_cover;
pub use profile::{collar_profile, CollarProfile};
pub use torus::torus_cover;

pub const PARTITION_TOL: f64 = 1e-12;
pub const MIN_GRID: usize = 24;

/// Smooth compactly supported taper: 1 at t <= 0, 0 at t >= 1.
pub(crate) fn taper(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 0.999_999 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Distance on the unit circle (coordinates in turns).
pub(crate) fn circ_dist(x: f64, c: f64) -> f64 {
    let d = (x - c).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Halfwidth of the three standard arcs.
pub(crate) const ARC_HALFWIDTH: f64 = 0.3;

/// Arc centers (2k+1)/6, k = 0,1,2.
pub(crate) fn arc_center(k: usize) -> f64 {
    (2.0 * k as f64 + 1.0) / 6.0
}

pub(crate) fn arc_bump(x: f64, k: usize) -> f64 {
    taper(circ_dist(x, arc_center(k)) / ARC_HALFWIDTH)
}

/// Normalized circle partition: eta_k with sum eta^2 = 1.
pub(crate) fn circle_partition(x: f64) -> [f64; 3] {
    let b = [arc_bump(x, 0), arc_bump(x, 1), arc_bump(x, 2)];
    let s = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    [b[0] / s, b[1] / s, b[2] / s]
}

/// Lift of x into the interval around arc k's center.
pub(crate) fn arc_lift(x: f64, k: usize) -> f64 {
    let c = arc_center(k);
    x - (x - c).round()
}

/// Transition exponent between arcs j and k on their overlap.
pub(crate) fn arc_transition(j: usize, k: usize) -> i64 {
    if j == k {
        return 0;
    }
    // evaluate at the overlap midpoint (the overlap is connected)
    let cj = arc_center(j);
    let ck = arc_center(k);
    let mid = if (j, k) == (2, 0) || (j, k) == (0, 2) {
        0.0 // the wrap-around overlap sits at angle 0
    } else {
        (cj + ck) / 2.0
    };
    (arc_lift(mid, j) - arc_lift(mid, k)).round() as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceTag {
    Torus,
    DiskPair,
}

/// (de)serialize edge-keyed maps as lists of [mu, nu, word] triples:
/// JSON objects cannot key on tuples.
mod edge_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(usize, usize), NormalForm>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<(usize, usize, NormalForm)> =
            map.iter().map(|(&(a, b), w)| (a, b, w.clone())).collect();
        serde::Serialize::serialize(&entries, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<(usize, usize), NormalForm>, D::Error> {
        let entries: Vec<(usize, usize, NormalForm)> = serde::Deserialize::deserialize(de)?;
        Ok(entries.into_iter().map(|(a, b, w)| ((a, b), w)).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sample {
    pub coords: Vec<f64>,
    pub members: Vec<usize>,
    pub weight: f64,
    /// neighbor sample indices in the two grid directions, for the plaquette
    /// quadrature on closed surfaces
    pub plaquette: Option<[usize; 2]>,
}

/// Boundary data of the pair (X, Y).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct YPart {
    /// X-chart index of each Y-chart
    pub charts: Vec<usize>,
    /// indices into the sample grid lying on Y, ordered along the circle
    pub samples: Vec<usize>,
    /// partition of unity on Y: [y-chart][y-sample]
    pub eta_y: Vec<Vec<f64>>,
    /// Lambda transition words on ordered Y-chart pairs
    #[serde(with = "edge_map")]
    pub transitions: BTreeMap<(usize, usize), NormalForm>,
    pub edges_y: Vec<(usize, usize)>,
    pub tree_y: Vec<(usize, usize)>,
    /// formal collar Y x (1,2): radial ring coordinates
    pub collar_radii: Vec<f64>,
}

/// A good cover of X (or of the pair (X, Y)) with all sampled data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodCoverPair {
    pub space: SpaceTag,
    pub index_count: usize,
    pub samples: Vec<Sample>,
    /// [chart][sample]
    pub eta: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize)>,
    pub triangles: Vec<(usize, usize, usize)>,
    pub tree: Vec<(usize, usize)>,
    /// Gamma transition words on ordered chart pairs with overlap
    #[serde(with = "edge_map")]
    pub transitions: BTreeMap<(usize, usize), NormalForm>,
    pub gamma: GroupSpec,
    pub lambda: GroupSpec,
    pub phi: GroupHom,
    pub ypart: Option<YPart>,
}

impl GoodCoverPair {
    pub fn transition(&self, mu: usize, nu: usize) -> NormalForm {
        if mu == nu {
            return NormalForm::identity();
        }
        self.transitions
            .get(&(mu, nu))
            .cloned()
            .unwrap_or_else(NormalForm::identity)
    }

    pub fn overlap_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for mu in 0..self.index_count {
            for nu in 0..self.index_count {
                if mu == nu || self.transitions.contains_key(&(mu, nu)) {
                    out.push((mu, nu));
                }
            }
        }
        out
    }

    /// Overlap samples of an edge: samples where both eta's are nonzero.
    pub fn overlap_samples(&self, mu: usize, nu: usize) -> Vec<usize> {
        (0..self.samples.len())
            .filter(|&s| self.eta[mu][s] > 0.0 && self.eta[nu][s] > 0.0)
            .collect()
    }

    /// The designated overlap basepoint: the sample maximizing eta_mu eta_nu
    /// (lowest index on ties).
    pub fn overlap_basepoint(&self, mu: usize, nu: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for s in 0..self.samples.len() {
            let w = self.eta[mu][s] * self.eta[nu][s];
            if w > 0.0 {
                let better = match best {
                    None => true,
                    Some((_, bw)) => w > bw + 1e-15,
                };
                if better {
                    best = Some((s, w));
                }
            }
        }
        best.map(|(s, _)| s)
    }

    /// Validate every cover invariant; used on construction and on load.
    pub fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        if self.eta.len() != self.index_count {
            return Err(KflatError::Invalid("eta chart count mismatch".into()));
        }
        for (mu, row) in self.eta.iter().enumerate() {
            if row.len() != n {
                return Err(KflatError::Invalid("eta sample count mismatch".into()));
            }
            for (s, &v) in row.iter().enumerate() {
                if v < 0.0 || !v.is_finite() {
                    return Err(KflatError::Invalid(format!("eta[{mu}][{s}] negative")));
                }
                if v > 0.0 && !self.samples[s].members.contains(&mu) {
                    return Err(KflatError::Invalid(format!(
                        "eta[{mu}][{s}] positive outside chart membership"
                    )));
                }
            }
        }
        for s in 0..n {
            let total: f64 = (0..self.index_count).map(|mu| self.eta[mu][s].powi(2)).sum();
            if (total - 1.0).abs() > PARTITION_TOL {
                return Err(KflatError::Invalid(format!(
                    "partition of unity off by {:.3e} at sample {s}",
                    (total - 1.0).abs()
                )));
            }
        }
        // cocycle identity on triangles, by normal forms
        for &(a, b, c) in &self.triangles {
            let gab = self.transition(a, b);
            let gbc = self.transition(b, c);
            let gac = self.transition(a, c);
            if self.gamma.mul_nf(&gab, &gbc) != gac {
                return Err(KflatError::Invalid(format!(
                    "transition cocycle fails on triangle ({a},{b},{c})"
                )));
            }
        }
        // antisymmetry
        for (&(mu, nu), w) in &self.transitions {
            let back = self.transition(nu, mu);
            if self.gamma.inv_nf(w) != back {
                return Err(KflatError::Invalid(format!(
                    "transition antisymmetry fails on ({mu},{nu})"
                )));
            }
        }
        // tree: spanning and trivial transitions
        if !is_spanning_tree(self.index_count, &self.tree, |v| v) {
            return Err(KflatError::Invalid("tree is not spanning".into()));
        }
        for &(a, b) in &self.tree {
            if !self.transition(a, b).is_identity() {
                return Err(KflatError::Invalid(format!("tree edge ({a},{b}) carries a nontrivial word")));
            }
        }
        if let Some(y) = &self.ypart {
            let ny = y.samples.len();
            for row in &y.eta_y {
                if row.len() != ny {
                    return Err(KflatError::Invalid("eta_y sample count mismatch".into()));
                }
            }
            for s in 0..ny {
                let total: f64 = y.eta_y.iter().map(|row| row[s].powi(2)).sum();
                if (total - 1.0).abs() > PARTITION_TOL {
                    return Err(KflatError::Invalid(format!(
                        "Y partition of unity off by {:.3e}",
                        (total - 1.0).abs()
                    )));
                }
            }
            // the Y-restricted tree must span the Y-nerve
            let y_vertex_count = y.charts.len();
            if !is_spanning_tree(y_vertex_count, &y.tree_y, |v| v) {
                return Err(KflatError::Invalid("Y-restricted tree is not spanning".into()));
            }
            // Y-tree edges must be X-tree edges between Y-charts
            for &(a, b) in &y.tree_y {
                let xa = y.charts[a];
                let xb = y.charts[b];
                let in_x_tree = self
                    .tree
                    .iter()
                    .any(|&(u, v)| (u, v) == (xa, xb) || (u, v) == (xb, xa));
                if !in_x_tree {
                    return Err(KflatError::Invalid(format!(
                        "Y-tree edge ({a},{b}) is not an X-tree edge"
                    )));
                }
            }
            // lambda transitions push to the gamma transitions
            for (&(a, b), w) in &y.transitions {
                let pushed = self.phi.apply(w);
                let gx = self.transition(y.charts[a], y.charts[b]);
                if pushed != gx {
                    return Err(KflatError::Invalid(format!(
                        "phi(lambda) != gamma on Y-edge ({a},{b})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cover serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cover: GoodCoverPair =
            serde_json::from_str(s).map_err(|e| KflatError::ConfigInvalid(e.to_string()))?;
        cover.validate()?;
        Ok(cover)
    }
}

fn is_spanning_tree(vertices: usize, edges: &[(usize, usize)], _f: impl Fn(usize) -> usize) -> bool {
    if vertices == 0 {
        return false;
    }
    if edges.len() != vertices - 1 {
        return false;
    }
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for &(a, b) in edges {
        if a >= vertices || b >= vertices {
            return false;
        }
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra == rb {
            return false; // cycle
        }
        parent[ra] = rb;
    }
    true
}
