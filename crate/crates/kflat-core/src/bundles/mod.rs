//! Sampled Čech cocycles, flatness defects, cocycle projections and frames,
//! stably relative cocycles, exact-intertwiner correction, and the
//! characteristic-number evaluators.

mod clutching;
mod cocycle;
mod projection;

pub use clutching::{
    clutching_loop, exact_intertwiner, joint_frame_at, joint_projection_at,
    relative_class_clutching, ExactIntertwiner,
};
pub use cocycle::{morphism_defect, CechCocycle, CocycleJson, EdgeJson, StablyRelativeCocycle};
pub use projection::{
    chern_number, cocycle_frame_at, cocycle_projection_at, dump_projection_field, monopole_band,
    spectral_frame, GAP_MARGIN,
};
