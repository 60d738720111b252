//! Optimal p-value weights for multiple testing when effect sizes carry
//! Gaussian prior uncertainty.
//!
//! The [`weights`] module solves for the weights, [`alt`] provides the
//! baseline schemes, [`power`] evaluates them, and [`study`] runs the
//! weighted testing procedure on delimited study files.

pub mod alt;
pub mod error;
pub mod normal;
mod par;
pub mod power;
pub mod root;
pub mod sim;
pub mod study;
pub mod weights;

pub use error::{Error, Result};
pub use weights::{
    bayes_weights_general, bayes_weights_small_q, spjotvoll_weights, PriorEffect, SolverPath,
    WeightSolution,
};
