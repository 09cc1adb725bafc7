//! Explicit non-asymptotic bounds on the CDF of the log-likelihood ratio
//! statistic for the MLE of a categorical distribution, with exact and Monte
//! Carlo oracles to validate them.
//!
//! The statistic is Lambda_n = 2 (sup log-likelihood minus log-likelihood at
//! the true parameter); Wilks' theorem gives Lambda_n -> chi^2_r in law, and
//! this crate computes closed-form finite-n sandwich bounds on
//! P*_n = P(Lambda_n < a) around the chi-square CDF, tunable via two free
//! parameters (delta, delta').

pub mod bounds;
pub mod error;
pub mod llr;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod special;

pub use bounds::{BoundInputs, BoundResult, ComparatorResult, RatePoint, RateProfile, TableOneValues};
pub use error::{Error, Result};
pub use llr::{Counts, DrawDiagnostics};
pub use model::{Model, SymMatrix};
pub use optimizer::{Direction, OptResult};
pub use oracle::{BoundCase, CaseResult, CdfEstimate, Method, ValidationReport};
