//! Likelihood-ratio testing of `lambda = 0` in the common-shock Poisson
//! model `Y_j = U + X_j`, with Bartlett-corrected critical values.
//!
//! The numerical core is generic over the scalar type; the aliases below fix
//! it to `f64` or to [`Extended`] precision.

pub mod bartlett;
pub mod cli;
pub mod data;
pub mod error;
mod extended;
pub mod likelihood;
pub mod lrt;
pub mod mle;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod scalar;

pub use error::{Error, Result};
pub use lrt::{run_test, CriticalValueScheme, LrtResult, SchemeKind, TestDecision};
pub use model::{CountMatrix, ModelParams, SufficientStats};
pub use montecarlo::{run_null_experiment, ExperimentConfig, ExperimentResult};

/// Double-double arithmetic, about 32 significant digits.
pub type Extended = scalar::DoubleDouble;
pub type Likelihood<'a> = likelihood::LikelihoodContext<'a, f64>;
pub type ExtendedLikelihood<'a> = likelihood::LikelihoodContext<'a, Extended>;
pub type Fit = mle::MleResult<f64>;
pub type Notation = bartlett::NotationContext<f64>;
pub type ExtendedNotation = bartlett::NotationContext<Extended>;
