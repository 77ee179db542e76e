//! q-series special functions with certified truncation, closed-form
//! envelope inequalities, and a sweep harness that audits the envelopes
//! against direct evaluation.
//!
//! Modules:
//! - [`qcore`]: q-shifted factorials and Gaussian binomials
//! - [`series`]: evaluators for the confluent class, `_r phi_s`,
//!   Ramanujan's `A_q`, the theta function and Laurent series
//! - [`bounds`]: envelopes in log space
//! - [`verify`]: audits, tightness search and identity residuals
//! - [`cli`]: the `qineq` command-line front end

pub mod bounds;
pub mod cli;
pub mod error;
pub mod qcore;
mod scaled;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use qcore::QBase;
