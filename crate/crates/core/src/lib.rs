//! Bayesian profile regression for censored survival outcomes.
//!
//! Individuals are clustered jointly on their exposure profiles and their
//! excess risk through a Dirichlet-process mixture, fitted by a slice
//! sampler optionally coupled with parallel tempering. Posterior partition
//! samples are summarized by Binder loss, PAM or variation of information.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod likelihood;
pub mod math;
pub mod model;
pub mod postprocess;
pub mod sampler;
pub mod simgen;
pub mod tempering;

pub use error::{Error, Result};
