//! Decide whether imputing missing values is necessary before training.
//!
//! Given a training set with missing cells, the checkers in [`certain`]
//! determine whether one model is optimal for every way of filling the
//! gaps (a *certain model*), and [`acm`] searches for a model whose loss is
//! within a user threshold of optimal for every fill (an *approximately
//! certain model*). [`oracle`] provides brute-force ground truth on small
//! inputs.

pub mod acm;
pub mod baselines;
pub mod certain;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod oracle;
pub mod report;
pub mod trainers;

pub use error::{Error, Result};
