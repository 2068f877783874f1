//! Bayesian spatio-temporal disease mapping: piecewise-constant risk-class
//! detection combined with spatially smooth random effects, two standard
//! comparison models, fit diagnostics and a synthetic simulation study.
//!
//! Counts are modelled as `y_it ~ Poisson(e_it * theta_it)` over `N` areas and
//! `T` periods, and every model is fitted by Metropolis-within-Gibbs MCMC.

pub mod baseline;
#[cfg(feature = "cli")]
pub mod cli;
pub mod cluster;
pub mod dataset;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod graph;
pub mod output;
pub mod simulation;
pub mod smoothing;
pub mod stats;
pub mod tuning;

pub use dataset::StDataset;
pub use engine::{FitResult, McmcConfig, ModelKind};
pub use error::{Error, Result};
pub use graph::ArealGraph;
