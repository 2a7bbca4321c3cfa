//! Quasi-representations and relative quasi-representations: defects,
//! distances, self-adjointification, group-algebra evaluation, the
//! mapping-cone almost-homomorphism, and finite-rank compression.

mod rep;
mod relative;

pub use rep::{
    clock_shift, clock_shift_rep, commuting_rep, QuasiRep, QuasiRepJson, SELF_ADJOINT_EPS_MAX,
    UNITARY_TOL,
};
pub use relative::{compress, MappingConeEngine, MappingConeSamples, RelativeQuasiRep};
