//! Built-in Fredholm-module providers: finite quantization pairs whose
//! count/winding asymmetry realizes the fundamental-class pairings.
//!
//! Torus: flux quantization on the fuzzy torus (clock/shift at flux 2pi/G)
//! against exact point evaluation; the count of a quantized projection
//! shifts by the Chern number per the Streda flux-counting identity.
//! Disk pair: lowest-Landau-level coherent compression on the doubled disk
//! against point evaluation; determinant flow of compressed loops carries
//! the boundary clutching degree.

use num_complex::Complex64;

use crate::covers::GoodCoverPair;
use crate::error::{KflatError, Result};
use crate::numerics::CMatrix;

/// Torus provider: phi_1 = evaluation at G grid points (exactly
/// multiplicative, flux-blind), phi_2 = Weyl quantization on M_G with
/// G = 4N + 1 and modes |m|_inf <= 2N. The orientation (which leg carries
/// the flux) is pinned by the monopole fixture.
pub struct TorusPair {
    pub truncation: usize,
    pub g: usize,
    grid: usize,
    /// flux-blind evaluation points, snapped to the sample grid
    pub points: Vec<(usize, usize)>,
}

impl TorusPair {
    pub fn new(truncation: usize, cover: &GoodCoverPair) -> Result<Self> {
        if truncation < 2 {
            return Err(KflatError::TruncationTooCoarse { defect: 1.0, residue: 0.0 });
        }
        let grid = (cover.samples.len() as f64).sqrt().round() as usize;
        if grid * grid != cover.samples.len() {
            return Err(KflatError::Invalid("torus cover grid is not square".into()));
        }
        let g = 4 * truncation + 1;
        let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
        let points = (0..g)
            .map(|t| {
                let x = (t as f64 / g as f64 * grid as f64).round() as usize % grid;
                let y = ((t as f64 * golden) * grid as f64).round() as usize % grid;
                (x, y)
            })
            .collect();
        Ok(TorusPair { truncation, g, grid, points })
    }

    /// Fourier coefficients of a grid field for |m|_inf <= 2N, precomposed
    /// with the orientation-reversing automorphism y -> -y (this pins the
    /// pairing sign to the monopole fixture).
    fn fourier(&self, field_raw: &[f64]) -> Vec<Vec<Complex64>> {
        let g = self.grid;
        let mut field = vec![0.0; field_raw.len()];
        for ix in 0..g {
            for iy in 0..g {
                field[ix * g + iy] = field_raw[ix * g + (g - iy) % g];
            }
        }
        let field = &field;
        let m_max = 2 * self.truncation as i64;
        let size = (2 * m_max + 1) as usize;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); size]; size];
        let tau = -2.0 * std::f64::consts::PI / g as f64;
        // precompute row/column phase tables
        for (im, m1) in (-m_max..=m_max).enumerate() {
            for (jm, m2) in (-m_max..=m_max).enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for ix in 0..g {
                    let ph1 = Complex64::from_polar(1.0, tau * (m1 * ix as i64) as f64);
                    let mut row = Complex64::new(0.0, 0.0);
                    for iy in 0..g {
                        let v = field[ix * g + iy];
                        if v != 0.0 {
                            row += Complex64::from_polar(v, tau * (m2 * iy as i64) as f64);
                        }
                    }
                    acc += ph1 * row;
                }
                out[im][jm] = acc / (g * g) as f64;
            }
        }
        out
    }

    /// The flux leg: Weyl operator sum f_hat(m) e^{-i pi m1 m2 / G} C^{m1} S^{m2}.
    pub fn quantize_flux(&self, field: &[f64]) -> CMatrix {
        let g = self.g;
        let m_max = 2 * self.truncation as i64;
        let fh = self.fourier(field);
        let omega = 2.0 * std::f64::consts::PI / g as f64;
        let mut out = CMatrix::zeros(g, g);
        for (im, m1) in (-m_max..=m_max).enumerate() {
            for (jm, m2) in (-m_max..=m_max).enumerate() {
                let c = fh[im][jm];
                if c.norm() < 1e-16 {
                    continue;
                }
                let half = Complex64::from_polar(1.0, -std::f64::consts::PI * (m1 * m2) as f64 / g as f64);
                // (C^{m1} S^{m2})[i, j] = omega^{m1 i} delta_{i, j + m2 mod G}
                for j in 0..g {
                    let i = ((j as i64 + m2).rem_euclid(g as i64)) as usize;
                    let phase = Complex64::from_polar(1.0, omega * (m1 * i as i64) as f64);
                    let v = out.get(i, j) + c * half * phase;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// The blind leg: exact evaluation at the G snapped sample points.
    pub fn quantize_blind(&self, field: &[f64]) -> CMatrix {
        let g = self.g;
        CMatrix::from_fn(g, g, |i, j| {
            if i == j {
                let (x, y) = self.points[i];
                Complex64::new(field[x * self.grid + y], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Multiplicativity defect of the flux leg on a pair of fields
    /// (the compactness surrogate reported per truncation).
    pub fn flux_defect(&self, f: &[f64], g_field: &[f64]) -> CMatrix {
        let fg: Vec<f64> = f.iter().zip(g_field).map(|(a, b)| a * b).collect();
        let qf = self.quantize_flux(f);
        let qg = self.quantize_flux(g_field);
        let qfg = self.quantize_flux(&fg);
        qf.mul(&qg).sub(&qfg)
    }

    pub fn grid(&self) -> usize {
        self.grid
    }
}

/// Disk provider: lowest-Landau-level states z^k e^{-r^2 / 4 ell^2},
/// k < states, on the doubled disk (radius 2 plus margin), against exact
/// point evaluation at `states` spread points.
pub struct DiskPair {
    pub truncation: usize,
    pub states: usize,
    pub ell: f64,
    /// radial quadrature grid on [0, r_max]
    pub radii: Vec<f64>,
    pub dr: f64,
    /// blind evaluation points (theta in turns, r)
    pub points: Vec<(f64, f64)>,
    /// radial weights w_ab(r) = N_a N_b r^{a+b+1} e^{-r^2 / 2 ell^2} * 2 pi dr
    weights: Vec<Vec<Vec<f64>>>,
}

impl DiskPair {
    pub fn new(truncation: usize) -> Result<Self> {
        if truncation < 2 {
            return Err(KflatError::TruncationTooCoarse { defect: 1.0, residue: 0.0 });
        }
        let states = 4 * truncation + 4;
        let ell = 0.30;
        let r_max = 2.4_f64;
        let nr = 16 * truncation;
        let dr = r_max / nr as f64;
        let radii: Vec<f64> = (0..nr).map(|i| (i as f64 + 0.5) * dr).collect();
        // log-normalized radial weights
        let mut lognorm = vec![0.0_f64; states];
        let mut lgamma = 0.0_f64; // ln k!
        for (k, ln) in lognorm.iter_mut().enumerate() {
            if k > 0 {
                lgamma += (k as f64).ln();
            }
            *ln = 0.5
                * (std::f64::consts::PI.ln() + (k as f64 + 1.0) * (2.0_f64 * ell * ell).ln() + lgamma);
        }
        let mut weights = vec![vec![vec![0.0; radii.len()]; states]; states];
        for a in 0..states {
            for b in 0..states {
                for (ri, &r) in radii.iter().enumerate() {
                    let lw = (a + b) as f64 * r.ln() - r * r / (2.0 * ell * ell)
                        - lognorm[a]
                        - lognorm[b];
                    weights[a][b][ri] = 2.0 * std::f64::consts::PI * lw.exp() * r * dr;
                }
            }
        }
        let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
        let points = (0..states)
            .map(|t| ((t as f64 * golden) % 1.0, 0.2 + 2.0 * t as f64 / states as f64))
            .collect();
        Ok(DiskPair { truncation, states, ell, radii, dr, points, weights })
    }

    /// LLL compression of a radially-weighted theta-mode field:
    /// T[f]_{ab} = sum_r w_ab(r) g(r) fhat_{a-b}, for separable fields
    /// f(theta, r) = g(r) h(theta) summed over terms by the caller.
    /// `radial` evaluates g at the quadrature radii; `mode` gives the
    /// theta-Fourier block for each needed mode index.
    pub fn compress_separable(
        &self,
        block_dim: usize,
        terms: &[(Vec<f64>, std::collections::BTreeMap<i64, CMatrix>)],
    ) -> CMatrix {
        let d = block_dim;
        let n = self.states * d;
        let mut out = CMatrix::zeros(n, n);
        for (radial, modes) in terms {
            // radial integrals per (a, b)
            for a in 0..self.states {
                for b in 0..self.states {
                    let m = a as i64 - b as i64;
                    let Some(block) = modes.get(&m) else { continue };
                    let w = &self.weights[a][b];
                    let mut coeff = 0.0;
                    for (ri, &g) in radial.iter().enumerate() {
                        if g != 0.0 {
                            coeff += w[ri] * g;
                        }
                    }
                    if coeff.abs() < 1e-300 {
                        continue;
                    }
                    for i in 0..d {
                        for j in 0..d {
                            let v = out.get(a * d + i, b * d + j)
                                + block.get(i, j) * Complex64::new(coeff, 0.0);
                            out.set(a * d + i, b * d + j, v);
                        }
                    }
                }
            }
        }
        out
    }

    /// Blind evaluation of a pointwise field closure at the spread points.
    pub fn evaluate_blind(
        &self,
        block_dim: usize,
        field: &dyn Fn(f64, f64) -> CMatrix,
    ) -> CMatrix {
        let d = block_dim;
        let n = self.states * d;
        let mut out = CMatrix::zeros(n, n);
        for (t, &(theta, r)) in self.points.iter().enumerate() {
            out.set_block(t * d, t * d, &field(theta, r));
        }
        out
    }
}
