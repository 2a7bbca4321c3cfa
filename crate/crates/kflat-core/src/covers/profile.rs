//! Collar profile rho(r, s) = min{1, 2s + 2r - 3} and the clutching
//! interpolants f1, f2.

use serde::{Deserialize, Serialize};

use super::GoodCoverPair;

/// rho on the attached collar Y x [1,2]; on X itself rho(x, s) = 2s - 1.
pub fn rho_collar(r: f64, s: f64) -> f64 {
    (2.0 * s + 2.0 * r - 3.0).min(1.0)
}

pub fn rho_interior(s: f64) -> f64 {
    2.0 * s - 1.0
}

/// f1(r) = min{1, max{0, 1 - 3r}} on the inner collar coordinate.
pub fn f1(r: f64) -> f64 {
    (1.0 - 3.0 * r).clamp(0.0, 1.0)
}

/// f2(r) = min{1, max{0, 3r - 2}}.
pub fn f2(r: f64) -> f64 {
    (3.0 * r - 2.0).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollarProfile {
    /// uniform s-grid on [0,1)
    pub s_grid: Vec<f64>,
    /// rho on X per s (constant across X samples)
    pub rho_x: Vec<f64>,
    /// rho on the collar: [s][collar ring]
    pub rho_collar: Vec<Vec<f64>>,
    pub collar_radii: Vec<f64>,
    /// f1, f2 sampled on the inner collar coordinate [0,1]
    pub f_grid: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

/// Sample the collar profile for a cover. Covers without a Y part get the
/// constant 2s - 1 field and an empty collar.
pub fn collar_profile(cover: &GoodCoverPair, s_count: usize) -> CollarProfile {
    let s_grid: Vec<f64> = (0..s_count).map(|k| k as f64 / s_count as f64).collect();
    let collar_radii = cover
        .ypart
        .as_ref()
        .map(|y| y.collar_radii.clone())
        .unwrap_or_default();
    let rho_x = s_grid.iter().map(|&s| rho_interior(s)).collect();
    let rho_col = s_grid
        .iter()
        .map(|&s| collar_radii.iter().map(|&r| rho_collar(r, s)).collect())
        .collect();
    let f_grid: Vec<f64> = (0..=s_count).map(|k| k as f64 / s_count as f64).collect();
    CollarProfile {
        s_grid,
        rho_x,
        rho_collar: rho_col,
        collar_radii,
        f1: f_grid.iter().map(|&r| f1(r)).collect(),
        f2: f_grid.iter().map(|&r| f2(r)).collect(),
        f_grid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_paper_values() {
        // continuity at r = 1: min{1, 2s - 1} = 2s - 1
        for s in [0.0, 0.25, 0.6, 1.0] {
            assert!((rho_collar(1.0, s) - rho_interior(s)).abs() < 1e-15);
        }
        // (r = 2, s = 0) -> 1
        assert_eq!(rho_collar(2.0, 0.0), 1.0);
        // (r = 1.5, s = 0) -> 0
        assert_eq!(rho_collar(1.5, 0.0), 0.0);
    }

    #[test]
    fn profile_bounds_and_interpolants() {
        for i in 0..=60 {
            let r = 1.0 + i as f64 / 60.0;
            for j in 0..=20 {
                let s = j as f64 / 20.0;
                assert!(rho_collar(r, s).abs() <= 1.0 + 1e-15);
            }
        }
        for i in 0..=30 {
            let r = i as f64 / 30.0;
            let (a, b) = (f1(r), f2(r));
            assert!(a * a + b * b <= 1.0 + 1e-15);
        }
        // f1 = 1 near the r = 0 boundary side
        assert_eq!(f1(0.0), 1.0);
        assert_eq!(f1(0.05), 0.85);
        assert_eq!(f2(1.0), 1.0);
    }

    #[test]
    fn sampled_profile_shapes() {
        let cover = crate::covers::disk_pair_cover(24).unwrap();
        let p = collar_profile(&cover, 16);
        assert_eq!(p.s_grid.len(), 16);
        assert_eq!(p.rho_collar.len(), 16);
        assert_eq!(p.rho_collar[0].len(), p.collar_radii.len());
        let torus = crate::covers::torus_cover(24).unwrap();
        let pt = collar_profile(&torus, 8);
        assert!(pt.collar_radii.is_empty());
        assert!((pt.rho_x[4] - (2.0 * 0.5 - 1.0)).abs() < 1e-15);
    }
}
