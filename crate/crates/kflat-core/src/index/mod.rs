//! Algebraic Mishchenko–Fomenko index classes (absolute and relative),
//! built-in Fredholm-module providers, and both sides of the quantitative
//! index theorems.

mod classes;
mod fredholm;
mod relative;

pub use classes::{
    algebraic_index_class, bott_index, constants_report, evaluated_class_defect,
    mishchenko_projection, pairing_rhs_torus, quantitative_lhs, trace_pairing, ConstantsReport,
    LhsReport, MishchenkoSymbol, TorusClassData, CHARACTER_GRID, FULL_CLASS_DIM_MAX,
};
pub use fredholm::{DiskPair, TorusPair};
pub use relative::{
    relative_algebraic_index_class, relative_quantitative_lhs, RelativeClassData,
    RelativeLhsReport, RELATIVE_ORIENTATION,
};
