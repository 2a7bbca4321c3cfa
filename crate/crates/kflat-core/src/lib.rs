//! Quantitative almost-flat index machinery at finite matrix scale:
//! quasi-representations of finitely generated groups, almost flat Čech
//! bundles over sampled good covers, the monodromy correspondence between
//! them, quantitative K-theory elements with (defect, propagation)
//! certificates, and the algebraic Mishchenko–Fomenko index classes whose
//! integer pairings are verified against topological evaluators.

pub mod error;
pub mod groups;
pub mod index;
pub mod monodromy;
pub mod numerics;

pub mod bundles;
pub mod covers;
pub mod qk;
pub mod quasirep;

pub use error::{KflatError, Result};
