//! Multispecies BGK kinetic models and their diffusion limits.
//!
//! Two kinetic models on a periodic slab with a Chu-reduced velocity
//! representation: the Gross–Krook mixture model and a single-relaxation
//! model with a Brinkman force. Each has a macroscopic limit solver
//! (Maxwell–Stefan and Busenberg–Travis) for ε-sweep comparisons.

// `!(x > 0.0)` is used on purpose so NaN is rejected; index loops mirror the
// componentwise formulas.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kinetic;
pub mod macro_bt;
pub mod macro_ms;
pub mod maxwellian;
pub mod mixture;
pub mod params;
pub mod state;

pub use error::{Error, Result};
pub use grid::{Grid1D, VelocityGrid1D};
pub use params::{
    scaling_from_physical, validate_params, MixtureParams, RegimeKind, ScalingRegime,
};
pub use state::{init_kinetic_state, KineticState, MacroStateBT, MacroStateMS, ThetaConvention};
