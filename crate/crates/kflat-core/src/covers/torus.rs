//! The 3x3 product good cover of the torus.

use std::collections::BTreeMap;

use super::{
    arc_bump, arc_transition, circle_partition, GoodCoverPair, Sample, SpaceTag, MIN_GRID,
};
use crate::error::{KflatError, Result};
use crate::groups::{GroupHom, GroupSpec, Word};

/// Chart index of the (jx, jy) product arc.
pub(crate) fn chart_id(jx: usize, jy: usize) -> usize {
    3 * jx + jy
}

/// 3x3 product cover of T^2 = [0,1)^2 from three overlapping arcs per circle
/// factor; |I| = 9, transitions generate Z^2, tree edges carry e.
pub fn torus_cover(n_grid: usize) -> Result<GoodCoverPair> {
    if n_grid < MIN_GRID {
        return Err(KflatError::GridTooCoarse { got: n_grid, required: MIN_GRID });
    }
    let gamma = GroupSpec::FreeAbelian { rank: 2 };
    let lambda = GroupSpec::Trivial;
    let phi = GroupHom::new(lambda.clone(), gamma.clone(), vec![])?;

    let g = n_grid;
    let mut samples = Vec::with_capacity(g * g);
    let mut eta = vec![Vec::with_capacity(g * g); 9];
    for ix in 0..g {
        for iy in 0..g {
            let x = ix as f64 / g as f64;
            let y = iy as f64 / g as f64;
            let px = circle_partition(x);
            let py = circle_partition(y);
            let mut members = Vec::new();
            for jx in 0..3 {
                for jy in 0..3 {
                    let v = px[jx] * py[jy];
                    eta[chart_id(jx, jy)].push(v);
                    if arc_bump(x, jx) > 0.0 && arc_bump(y, jy) > 0.0 {
                        members.push(chart_id(jx, jy));
                    }
                }
            }
            let right = ((ix + 1) % g) * g + iy;
            let up = ix * g + (iy + 1) % g;
            samples.push(Sample {
                coords: vec![x, y],
                members,
                weight: 1.0 / (g * g) as f64,
                plaquette: Some([right, up]),
            });
        }
    }

    // transitions: gamma_{mu nu} = a^{w(jx1,jx2)} b^{w(jy1,jy2)}
    let mut transitions = BTreeMap::new();
    let mut edges = Vec::new();
    for mu in 0..9usize {
        for nu in 0..9usize {
            if mu == nu {
                continue;
            }
            let (jx1, jy1) = (mu / 3, mu % 3);
            let (jx2, jy2) = (nu / 3, nu % 3);
            let wa = arc_transition(jx1, jx2);
            let wb = arc_transition(jy1, jy2);
            let mut letters = Vec::new();
            for _ in 0..wa.abs() {
                letters.push(if wa > 0 { 1 } else { -1 });
            }
            for _ in 0..wb.abs() {
                letters.push(if wb > 0 { 2 } else { -2 });
            }
            transitions.insert((mu, nu), gamma.normal_form(&Word::new(letters)));
            if mu < nu {
                edges.push((mu, nu));
            }
        }
    }

    // triangles: triples whose x-arcs and y-arcs each span at most 2 values
    let mut triangles = Vec::new();
    for a in 0..9usize {
        for b in (a + 1)..9 {
            for c in (b + 1)..9 {
                let xs: std::collections::BTreeSet<usize> =
                    [a / 3, b / 3, c / 3].into_iter().collect();
                let ys: std::collections::BTreeSet<usize> =
                    [a % 3, b % 3, c % 3].into_iter().collect();
                if xs.len() <= 2 && ys.len() <= 2 {
                    triangles.push((a, b, c));
                }
            }
        }
    }

    // maximal tree with trivial transitions: a column plus rows
    // (0,0)-(1,0)-(2,0) along x (arc pairs (0,1),(1,2): transition e),
    // then (jx,0)-(jx,1)-(jx,2) along y.
    let mut tree = Vec::new();
    tree.push((chart_id(0, 0), chart_id(1, 0)));
    tree.push((chart_id(1, 0), chart_id(2, 0)));
    for jx in 0..3 {
        tree.push((chart_id(jx, 0), chart_id(jx, 1)));
        tree.push((chart_id(jx, 1), chart_id(jx, 2)));
    }

    let cover = GoodCoverPair {
        space: SpaceTag::Torus,
        index_count: 9,
        samples,
        eta,
        edges,
        triangles,
        tree,
        transitions,
        gamma,
        lambda,
        phi,
        ypart: None,
    };
    cover.validate()?;
    Ok(cover)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_validates() {
        let cover = torus_cover(48).unwrap();
        assert_eq!(cover.index_count, 9);
        assert_eq!(cover.samples.len(), 48 * 48);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(matches!(torus_cover(12), Err(KflatError::GridTooCoarse { .. })));
    }

    #[test]
    fn nontrivial_edges_carry_single_generators() {
        let cover = torus_cover(24).unwrap();
        let mut nontrivial = 0;
        for w in cover.transitions.values() {
            if !w.is_identity() {
                nontrivial += 1;
                assert!(w.length() <= 2, "product-cover transitions have length <= 2");
            }
        }
        assert!(nontrivial > 0);
        for &(a, b) in &cover.tree {
            assert!(cover.transition(a, b).is_identity());
        }
    }

    #[test]
    fn json_roundtrip() {
        let cover = torus_cover(24).unwrap();
        let s = cover.to_json();
        let back = GoodCoverPair::from_json(&s).unwrap();
        assert_eq!(back.samples.len(), cover.samples.len());
    }
}
