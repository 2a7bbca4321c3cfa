//! Dense complex-matrix kernel: norms, Hermitian spectral calculus, polar
//! decomposition, unitary logarithms, determinant winding, inertia counts.

mod cmatrix;
pub mod eigen;
pub mod inertia;
pub mod polar;
pub mod winding;

pub use cmatrix::{CMatrix, MatrixJson, C64, I, ONE, ZERO};
pub use eigen::{
    hermitian_eigen, skew_exp, spec_fun, spectral_projection_above, unitary_eigen, unitary_log,
    HermitianSpectrum,
};
pub use inertia::{eigencount_above, inertia_shifted, min_eigen_distance, Inertia};
pub use polar::{polar, polar_correct, polar_partial, polar_unitary, sigma_min, TOL_SING};
pub use winding::{det_phase_path, det_winding, det_winding_int};
