//! Robust mean-variance portfolio construction.
//!
//! The crate estimates the mean vector and covariance matrix of asset
//! returns by minimum pseudodistance estimation — an exponentially
//! reweighted family that coincides with maximum likelihood at tuning
//! parameter zero and gains resistance to outliers as the parameter grows —
//! and feeds the estimates into closed-form Markowitz optimization. Around
//! that core it provides influence-function diagnostics, analytic asymptotic
//! covariances and efficiency tables, and a Monte Carlo harness for
//! contamination studies.
//!
//! Start with [`estimators::mpd_estimate`] for robust fits,
//! [`portfolio::optimal_weights`] for the optimizer, and the runnable
//! programs under `examples/` for end-to-end walkthroughs.

// index loops over matrix coordinates read better than iterator chains here
#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod influence;
pub mod io;
pub mod linalg;
pub mod monte_carlo;
pub mod portfolio;
pub mod pseudodistance;

pub use error::{Error, Result};
pub use estimators::{mle, mpd_estimate, Estimate, EstimatorConfig, Init, Sample};
pub use linalg::{cholesky, mahalanobis_sq, vech, vecs, Matrix, SymMatrix};
pub use portfolio::{efficient_frontier, optimal_weights, FrontierPoint, PortfolioProblem};
pub use pseudodistance::{Alpha, ModelParams};
