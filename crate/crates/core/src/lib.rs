//! Minimal displacement vectors of compositions and convex combinations of
//! averaged operators on ℝᵈ.
//!
//! Operators are built as [`OperatorExpr`] trees, estimated with
//! [`estimate_displacement`], and checked against the composition and
//! convex-combination bounds. The [`product`] module lifts an `m`-tuple of
//! operators to the product space and synthesises near fixed points of the
//! shifted cyclic map.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod displacement;
pub mod dsl;
pub mod error;
pub mod family;
pub mod hyperbola;
mod linalg;
pub mod operator;
pub mod product;
pub mod resolvent;
pub mod sampling;
pub mod scalar;
pub mod vector;

pub use checks::{check_averaged, check_firm_nonexpansive, check_nonexpansive, ClassReport};
pub use displacement::{
    check_composition_bound, check_convex_combo_bound, compare_cyclic_rotations, cyclic_rotations, diagnose_attainment,
    estimate_displacement, estimate_displacement_observed, exact_displacement, AttainmentReport,
    CompositionBoundReport, ConvexComboBoundReport, CyclicReport, DisplacementEstimate, EstimatorConfig,
};
pub use error::{Error, Result};
pub use operator::{compose, convex_combination, Node, OperatorExpr};
pub use product::{
    block_apply, cyclic_shift, shifted_cyclic_map, synthesize_near_fixed_point, verify_telescoping, ProductPoint,
    Synthesis, WitnessCertificate,
};
pub use resolvent::{
    block_resolvent, resolvent, shift_operator, verify_resolvent_shift, BlockOperatorSpec, MonotoneKind, MonotoneSpec,
    ResolventMap, ShiftReport,
};
pub use scalar::Real;
pub use vector::Vector;

pub type Vector64 = Vector<f64>;
pub type Vector32 = Vector<f32>;
pub type Operator64 = OperatorExpr<f64>;
pub type Operator32 = OperatorExpr<f32>;
pub type Spec64 = MonotoneSpec<f64>;
pub type Spec32 = MonotoneSpec<f32>;
pub type Estimate64 = DisplacementEstimate<f64>;
pub type Estimate32 = DisplacementEstimate<f32>;
pub type ProductPoint64 = ProductPoint<f64>;
