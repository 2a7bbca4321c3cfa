//! The 4-set good cover of the pair (D^2, S^1): one center disk and three
//! boundary-collar sets; the restriction to S^1 is the 3-arc cover.

use std::collections::BTreeMap;

use super::{
    arc_bump, arc_transition, circle_partition, taper, GoodCoverPair, Sample, SpaceTag, YPart,
    MIN_GRID,
};
use crate::error::{KflatError, Result};
use crate::groups::{GroupHom, GroupSpec, NormalForm, Word};

/// Radial reach of the center chart and start of the boundary charts.
const CENTER_PLATEAU: f64 = 0.30;
const CENTER_END: f64 = 0.75;
const COLLAR_RINGS: usize = 8;

/// Radial split: rho_c^2 + rho_b^2 = 1, rho_c = 1 near the center.
pub(crate) fn radial_center(r: f64) -> f64 {
    taper((r - CENTER_PLATEAU) / (CENTER_END - CENTER_PLATEAU))
}

pub(crate) fn radial_boundary(r: f64) -> f64 {
    let c = radial_center(r);
    (1.0 - c * c).max(0.0).sqrt()
}

/// Chart 0 is the center disk; charts 1..=3 are the boundary-collar sets.
pub fn disk_pair_cover(n_grid: usize) -> Result<GoodCoverPair> {
    if n_grid < MIN_GRID {
        return Err(KflatError::GridTooCoarse { got: n_grid, required: MIN_GRID });
    }
    let gamma = GroupSpec::Trivial;
    let lambda = GroupSpec::FreeAbelian { rank: 1 };
    let phi = GroupHom::to_trivial(lambda.clone());

    let n_theta = n_grid;
    let n_rings = n_grid / 3;
    let dr = 1.0 / n_rings as f64;
    let dth = 1.0 / n_theta as f64;

    let mut samples = Vec::new();
    let mut eta = vec![Vec::new(); 4];
    // interior rings at midpoints, then the boundary ring r = 1 (the Y part)
    let mut radii: Vec<(f64, f64)> = (0..n_rings)
        .map(|i| {
            let r = (i as f64 + 0.5) * dr;
            (r, r * dr * dth) // area weight
        })
        .collect();
    radii.push((1.0, dth)); // boundary ring, arc-length weight
    let mut y_samples = Vec::new();
    for &(r, w) in &radii {
        for j in 0..n_theta {
            let th = j as f64 * dth;
            let rc = radial_center(r);
            let rb = radial_boundary(r);
            let arcs = circle_partition(th);
            eta[0].push(rc);
            let mut members = Vec::new();
            if rc > 0.0 {
                members.push(0);
            }
            for k in 0..3 {
                let v = rb * arcs[k];
                eta[k + 1].push(v);
                if r > CENTER_PLATEAU && arc_bump(th, k) > 0.0 {
                    members.push(k + 1);
                }
            }
            if (r - 1.0).abs() < 1e-12 {
                y_samples.push(samples.len());
            }
            samples.push(Sample { coords: vec![r, th], members, weight: w, plaquette: None });
        }
    }

    // Gamma is trivial: every transition word is e.
    let mut transitions = BTreeMap::new();
    let mut edges = Vec::new();
    for mu in 0..4usize {
        for nu in 0..4usize {
            if mu == nu {
                continue;
            }
            // all chart pairs overlap: center meets each collar set in the
            // annulus, collar sets meet pairwise in arc overlaps
            transitions.insert((mu, nu), NormalForm::identity());
            if mu < nu {
                edges.push((mu, nu));
            }
        }
    }
    // triangles: {center, k, k'} for each arc pair; the three boundary sets
    // have empty triple intersection
    let triangles = vec![(0, 1, 2), (0, 2, 3), (0, 1, 3)];
    // tree: (1,2), (2,3) restrict to a spanning tree of the Y-nerve
    let tree = vec![(1, 2), (2, 3), (0, 1)];

    // Y part: Lambda transitions lambda_{jk} = a^{w(j,k)}
    let mut y_transitions = BTreeMap::new();
    let mut edges_y = Vec::new();
    for j in 0..3usize {
        for k in 0..3usize {
            if j == k {
                continue;
            }
            let w = arc_transition(j, k);
            let mut letters = Vec::new();
            for _ in 0..w.abs() {
                letters.push(if w > 0 { 1 } else { -1 });
            }
            y_transitions.insert((j, k), lambda.normal_form(&Word::new(letters)));
            if j < k {
                edges_y.push((j, k));
            }
        }
    }
    let eta_y: Vec<Vec<f64>> = (0..3)
        .map(|k| {
            y_samples
                .iter()
                .map(|&s| {
                    let th = samples[s].coords[1];
                    circle_partition(th)[k]
                })
                .collect()
        })
        .collect();
    let collar_radii: Vec<f64> =
        (0..COLLAR_RINGS).map(|i| 1.0 + (i as f64 + 0.5) / COLLAR_RINGS as f64).collect();
    let ypart = YPart {
        charts: vec![1, 2, 3],
        samples: y_samples,
        eta_y,
        transitions: y_transitions,
        edges_y,
        tree_y: vec![(0, 1), (1, 2)],
        collar_radii,
    };

    let cover = GoodCoverPair {
        space: SpaceTag::DiskPair,
        index_count: 4,
        samples,
        eta,
        edges,
        triangles,
        tree,
        transitions,
        gamma,
        lambda,
        phi,
        ypart: Some(ypart),
    };
    cover.validate()?;
    Ok(cover)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_validates() {
        let cover = disk_pair_cover(48).unwrap();
        assert_eq!(cover.index_count, 4);
        let y = cover.ypart.as_ref().unwrap();
        assert_eq!(y.charts.len(), 3);
        assert_eq!(y.samples.len(), 48);
    }

    #[test]
    fn lambda_holonomy_on_wrap_chain() {
        let cover = disk_pair_cover(24).unwrap();
        let y = cover.ypart.as_ref().unwrap();
        let lam = &cover.lambda;
        // the three boundary arcs have empty triple intersection, so the
        // cocycle identities on Y are vacuous; the chain around the circle
        // is the deck transformation generating Z
        let l01 = y.transitions.get(&(0, 1)).unwrap();
        let l12 = y.transitions.get(&(1, 2)).unwrap();
        let l20 = y.transitions.get(&(2, 0)).unwrap();
        let total = lam.mul_nf(&lam.mul_nf(l01, l12), l20);
        assert_eq!(total.length(), 1, "holonomy around the circle is a generator");
        // exactly one nontrivial edge in the chain (tree edges carry e)
        assert_eq!(l20.length() + l01.length() + l12.length(), 1);
    }

    #[test]
    fn boundary_restriction_matches_circle_partition() {
        let cover = disk_pair_cover(24).unwrap();
        let y = cover.ypart.as_ref().unwrap();
        for (yi, &s) in y.samples.iter().enumerate() {
            // center bump vanishes on the boundary circle
            assert_eq!(cover.eta[0][s], 0.0);
            for k in 0..3 {
                assert!((cover.eta[k + 1][s] - y.eta_y[k][yi]).abs() < 1e-14);
            }
        }
    }
}
