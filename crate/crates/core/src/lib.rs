//! Phase structure of two-parameter exponential random graph models.
//!
//! The limiting free energy of the edge/`H2` model is the maximum of a
//! scalar functional `l(u; β1, β2)` over edge densities `u ∈ [0, 1]`. This
//! crate locates its maximizers, traces the V-shaped bistability region and
//! the first-order transition curve inside it, evaluates the free energy
//! with its derivatives, and checks the predictions against finite graphs
//! sampled from the exact Gibbs measure.

// `!(x < y)` is used on purpose so that NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod emit;
pub mod error;
pub mod free_energy;
pub mod maximizer;
pub mod phase;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use free_energy::{
    jump_across_curve, psi_gradient, psi_hessian, psi_infinity, psi_report, PsiReport, Validity,
};
pub use maximizer::{
    classify, global_maximizers, inflection_points, local_maximizers, InflectionPair, LocalMax,
    MaximizerReport, Region,
};
pub use phase::{
    asymptote_gap, trace_curves, transition_q, transition_q_inverse, v_bounds, CurvePoint, VBounds,
};
pub use scalar::{
    critical_point, entropy_term, find_root, l, l_double_prime, l_prime, m, n_func, CriticalPoint,
    ModelParams,
};
