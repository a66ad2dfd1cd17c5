//! Reliability quantification for probabilistic generative classifiers over
//! discrete features: per-instance uncertainty and robustness measures,
//! accuracy-rejection evaluation, and hybrid uncertainty/robustness orderings.

#![forbid(unsafe_code)]

pub mod data;
pub mod error;
pub mod evaluation;
pub mod hybrid;
pub mod measure;
pub mod model;
pub mod robustness;
pub mod seeding;
pub mod uncertainty;

pub use error::{Error, Result};
