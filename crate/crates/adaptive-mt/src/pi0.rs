//! Null-proportion estimators: the Storey EDF-ratio estimator (fixed lambda
//! and bootstrap-tuned), and the Benjamini-Hochberg slope estimator.

use crate::backbone::ConvexBackbone;
use crate::ecdf::PValueSample;
use crate::error::{Error, Result};
use crate::numeric::RngStream;

/// Which estimator produced a [`Pi0Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pi0Method {
    Backbone,
    StoreyLambda,
    StoreyBootstrap,
    BhSlope,
}

impl Pi0Method {
    pub fn label(&self) -> &'static str {
        match self {
            Pi0Method::Backbone => "backbone",
            Pi0Method::StoreyLambda => "storey",
            Pi0Method::StoreyBootstrap => "storey-boot",
            Pi0Method::BhSlope => "bh-slope",
        }
    }
}

/// An estimate of the proportion of true null hypotheses, always in (0, 1].
#[derive(Debug, Clone)]
pub struct Pi0Estimate {
    pub value: f64,
    pub method: Pi0Method,
    /// A clamp, fallback, or near-uniform guard fired while producing the
    /// value.
    pub flagged: bool,
    /// Tuning parameter lambda for the Storey estimators.
    pub lambda: Option<f64>,
    /// Fit diagnostics for the backbone estimator.
    pub backbone: Option<ConvexBackbone>,
}

impl Pi0Estimate {
    /// An estimate pinned to a given value, useful as a plug-in.
    pub fn fixed(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 || value > 1.0 {
            return Err(Error::domain(
                "Pi0Estimate::fixed",
                format!("pi0 must lie in (0,1], got {value}"),
            ));
        }
        Ok(Pi0Estimate {
            value,
            method: Pi0Method::StoreyLambda,
            flagged: false,
            lambda: None,
            backbone: None,
        })
    }
}

/// Default lambda grid for the bootstrap estimator: 0.05, 0.10, ..., 0.95.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Default bootstrap replicate count.
pub const DEFAULT_BOOTSTRAP_REPS: usize = 100;

fn clamp_storey(raw: f64, m: usize) -> (f64, bool) {
    if raw == 0.0 {
        (1.0 / m as f64, true)
    } else if raw > 1.0 {
        (1.0, true)
    } else {
        (raw, false)
    }
}

/// Storey estimator (1 - F~(lambda)) / (1 - lambda), clamped into (0, 1];
/// a raw value of exactly 0 is replaced by 1/m with the flag set.
pub fn storey_pi0(sample: &PValueSample, lambda: f64) -> Result<Pi0Estimate> {
    if !lambda.is_finite() || lambda <= 0.0 || lambda >= 1.0 {
        return Err(Error::domain(
            "storey_pi0",
            format!("lambda must lie in (0,1), got {lambda}"),
        ));
    }
    let raw = (1.0 - sample.edf_eval(lambda)?) / (1.0 - lambda);
    let (value, flagged) = clamp_storey(raw, sample.len());
    Ok(Pi0Estimate {
        value,
        method: Pi0Method::StoreyLambda,
        flagged,
        lambda: Some(lambda),
        backbone: None,
    })
}

/// Bootstrap selection of Storey's lambda: for each grid value the
/// estimated MSE against the plug-in target min over the grid of the
/// full-sample estimate is computed from B resamples with replacement; the
/// returned estimate is the full-sample estimator at the MSE-minimizing
/// lambda. Deterministic given the stream.
pub fn storey_pi0_bootstrap(
    sample: &PValueSample,
    lambda_grid: &[f64],
    bootstrap_reps: usize,
    stream: &mut RngStream,
) -> Result<Pi0Estimate> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    if bootstrap_reps == 0 {
        return Err(Error::InvalidInput(
            "bootstrap requires at least one replicate".into(),
        ));
    }
    for &l in lambda_grid {
        if !l.is_finite() || l <= 0.0 || l >= 1.0 {
            return Err(Error::domain(
                "storey_pi0_bootstrap",
                format!("lambda grid values must lie in (0,1), got {l}"),
            ));
        }
    }

    let m = sample.len();
    let values = sample.values();
    let full: Vec<f64> = lambda_grid
        .iter()
        .map(|&l| storey_pi0(sample, l).map(|e| e.value))
        .collect::<Result<_>>()?;
    let target = full.iter().copied().fold(f64::INFINITY, f64::min);

    let mut mse = vec![0.0; lambda_grid.len()];
    let mut resample = vec![0.0; m];
    for _ in 0..bootstrap_reps {
        for slot in resample.iter_mut() {
            *slot = values[stream.index(m)];
        }
        for (i, &l) in lambda_grid.iter().enumerate() {
            let above = resample.iter().filter(|&&p| p > l).count();
            let raw = (above as f64 / m as f64) / (1.0 - l);
            let (est, _) = clamp_storey(raw, m);
            mse[i] += (est - target) * (est - target);
        }
    }

    let mut best = 0;
    for i in 1..mse.len() {
        if mse[i] < mse[best] {
            best = i;
        }
    }
    let mut out = storey_pi0(sample, lambda_grid[best])?;
    out.method = Pi0Method::StoreyBootstrap;
    Ok(out)
}

/// Benjamini-Hochberg slope estimator: scans the slopes
/// S_i = (1 - P_{i:m}) / (m + 1 - i) for the first strict decrease at index
/// j and returns min{1 + 1/S_j, m} / m. If no decrease occurs the estimate
/// is 1 with the flag set.
pub fn bh_pi0_slope(sample: &PValueSample) -> Result<Pi0Estimate> {
    let m = sample.len();
    if m < 2 {
        return Err(Error::InsufficientData {
            op: "bh_pi0_slope",
            need: 2,
            got: m,
        });
    }
    let sorted = sample.sorted();
    let slope = |i: usize| (1.0 - sorted[i - 1]) / (m + 1 - i) as f64; // 1-based i
    let mut prev = slope(1);
    for j in 2..=m {
        let s = slope(j);
        if s < prev {
            let m0 = if s > 0.0 {
                (1.0 + 1.0 / s).min(m as f64)
            } else {
                m as f64
            };
            return Ok(Pi0Estimate {
                value: m0 / m as f64,
                method: Pi0Method::BhSlope,
                flagged: false,
                lambda: None,
                backbone: None,
            });
        }
        prev = s;
    }
    Ok(Pi0Estimate {
        value: 1.0,
        method: Pi0Method::BhSlope,
        flagged: true,
        lambda: None,
        backbone: None,
    })
}
