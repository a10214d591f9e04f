//! Quadrature on the two-parameter rule family
//! `(1-θ)(λ f(a) + (1-λ) f(b)) + θ f((1-λ)a + λb)` with certified a-priori error
//! bounds for functions whose `|f'|^q` is quasi-convex.
//!
//! - [`expr`]: expression parser with forward-mode derivatives
//! - [`rules`]: the rule family and its named presets
//! - [`bounds`]: power-mean and Hölder error bounds, kernel moments
//! - [`analysis`]: reference integrator, quasi-convexity test, identity checks, sweeps
//! - [`means`]: special means and their inequality instances
//! - [`integrate`]: composite integration with a certified total bound
//! - [`cli`]: the `qbound` command line

pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod expr;
pub mod integrate;
pub mod means;
pub mod output;
pub mod rules;

pub use error::{Error, Result};
pub use expr::{DualValue, Expr};
pub use rules::{Interval, Preset, RuleParams};
