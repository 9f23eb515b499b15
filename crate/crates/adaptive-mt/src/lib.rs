//! Massive multiple hypothesis testing toolkit.
//!
//! Given a vector of m P values, this crate estimates the proportion of true
//! null hypotheses by fitting a smooth convex backbone to the empirical
//! quantile function, and derives a data-adaptive significance threshold
//! calibrated against the Bonferroni adjustment. Classical procedures
//! (Benjamini-Hochberg step-up, adaptive BH, q-values, Storey and BH-slope
//! null-proportion estimators) are included for comparison, together with a
//! Monte Carlo simulation kit that reproduces a gene-pathway ANOVA benchmark.
//!
//! The typical entry points are:
//!
//! - [`ecdf::PValueSample`] — validated P-value container with EDF/EQF access
//! - [`backbone::pi0_backbone`] — the convex-backbone null-proportion estimator
//! - [`thresholds::alpha_hat_cal`] — the calibrated adaptive threshold
//! - [`procedures::bh_stepup`] / [`procedures::qvalues`] — FDR control
//! - [`simkit::mc_harness`] — seeded, parallel Monte Carlo benchmark runs
//!
//! Runnable demonstrations of each capability live in `examples/`; the
//! `adaptive-mt` binary exposes the same machinery for batch use.

pub mod backbone;
pub mod cli;
pub mod ecdf;
pub mod error;
pub mod numeric;
pub mod pi0;
pub mod procedures;
pub mod simkit;
pub mod splines;
pub mod thresholds;

pub use backbone::{pi0_backbone, ConvexBackbone};
pub use ecdf::PValueSample;
pub use error::{Error, Result};
pub use numeric::RngStream;
pub use pi0::{Pi0Estimate, Pi0Method};
pub use procedures::{bh_stepup, qvalues, OutcomeTable};
pub use thresholds::{alpha_hat_cal, ThresholdResult};
