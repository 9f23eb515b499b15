//! Adaptive significance thresholds: the API criterion, its closed-form
//! approximate minimizer, the Bonferroni-calibrated threshold, and the
//! data-driven plug-in that runs the backbone pipeline.

use crate::backbone::{pi0_backbone, ConvexBackbone};
use crate::ecdf::PValueSample;
use crate::error::{Error, Result};

/// Default calibration level; liberal enough to keep power in
/// discovery-oriented settings.
pub const DEFAULT_ALPHA0: f64 = 0.22;

/// Quadrature resolution for the API integral.
const API_QUAD_POINTS: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    ApiClosedForm,
    ApiGrid,
    Bonferroni,
    BhStepup,
    AdaptiveBh,
    Qvalue,
}

impl ThresholdMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ThresholdMethod::ApiClosedForm => "api",
            ThresholdMethod::ApiGrid => "api-grid",
            ThresholdMethod::Bonferroni => "bonferroni",
            ThresholdMethod::BhStepup => "bh",
            ThresholdMethod::AdaptiveBh => "abh",
            ThresholdMethod::Qvalue => "qvalue",
        }
    }
}

/// A significance threshold together with the method and parameters that
/// produced it and the rejection count it induced.
#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub alpha: f64,
    pub method: ThresholdMethod,
    /// Level parameter of the method: alpha0 for the API family and
    /// Bonferroni, the control level q* for the step-up family.
    pub alpha0: f64,
    pub pi0_used: f64,
    pub gamma_used: f64,
    pub rejections: usize,
}

fn check_xy(op: &'static str, x: f64, y: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 || x > 1.0 {
        return Err(Error::domain(op, format!("x must lie in (0,1], got {x}")));
    }
    if !y.is_finite() || y < 1.0 {
        return Err(Error::domain(op, format!("y must be at least 1, got {y}")));
    }
    Ok(())
}

/// Calibration coefficient
/// A(x, y) = [y / (4^(1/3) x)] alpha0 [(y+1)^(1+1/y) / (x y)]^(y/(2y+1)).
///
/// A(1, 1) = alpha0 holds bit-exactly: at (1, 1) the power term and the
/// 4^(1/3) factor are the same `powf` evaluation, so their ratio is 1.0.
pub fn coeff_a(x: f64, y: f64, alpha0: f64) -> Result<f64> {
    check_xy("coeff_a", x, y)?;
    if !alpha0.is_finite() || alpha0 <= 0.0 {
        return Err(Error::domain(
            "coeff_a",
            format!("alpha0 must be positive, got {alpha0}"),
        ));
    }
    let cbrt4 = 4.0_f64.powf(1.0 / 3.0);
    let pow_term = ((y + 1.0).powf(1.0 + 1.0 / y) / (x * y)).powf(y / (2.0 * y + 1.0));
    Ok(alpha0 * (y / x) * (pow_term / cbrt4))
}

/// Calibration exponent B(x, y) = (1 + 2 x^2 / y) y / (2y + 1); always in
/// [1/3, 1] on the domain, with B(1, 1) = 1 bit-exactly.
pub fn coeff_b(x: f64, y: f64) -> Result<f64> {
    check_xy("coeff_b", x, y)?;
    Ok((1.0 + 2.0 * x * x / y) * y / (2.0 * y + 1.0))
}

/// The approximate minimizer of the API criterion before calibration:
/// alpha* = [(gamma+1)^(1+1/gamma) / (pi0 gamma)]^(gamma/(2gamma+1))
///          m^(-(1 + 2 pi0^2/gamma) gamma/(2gamma+1)).
///
/// The backbone slope parameter d cancels against the penalty weight
/// lambda(m, pi0, d) = m^(2 pi0^2/gamma) / (1 - d); it is validated here but
/// does not enter the value.
pub fn alpha_star_uncalibrated(m: usize, pi0: f64, gamma: f64, d: f64) -> Result<f64> {
    check_xy("alpha_star_uncalibrated", pi0, gamma)?;
    if m == 0 {
        return Err(Error::domain("alpha_star_uncalibrated", "m must be >= 1"));
    }
    if !d.is_finite() || !(0.0..1.0).contains(&d) {
        return Err(Error::domain(
            "alpha_star_uncalibrated",
            format!("d must lie in [0,1), got {d}"),
        ));
    }
    let mf = m as f64;
    let expo = gamma / (2.0 * gamma + 1.0);
    let front = ((gamma + 1.0).powf(1.0 + 1.0 / gamma) / (pi0 * gamma)).powf(expo);
    Ok(front * mf.powf(-(1.0 + 2.0 * pi0 * pi0 / gamma) * expo))
}

/// The Bonferroni-calibrated threshold A(pi0, gamma) m^(-B(pi0, gamma)),
/// clamped into (0, 1); equals alpha0/m when pi0 = gamma = 1.
pub fn alpha_cal(m: usize, pi0: f64, gamma: f64, alpha0: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("alpha_cal", "m must be >= 1"));
    }
    let a = coeff_a(pi0, gamma, alpha0)?;
    let b = coeff_b(pi0, gamma)?;
    let raw = a * (m as f64).powf(-b);
    Ok(raw.clamp(f64::MIN_POSITIVE, 1.0 - 1e-12))
}

/// Convert a target family-wise error bound alpha1 into the calibration
/// level alpha0 = -log(1 - alpha1).
pub fn alpha0_from_target(alpha1: f64) -> Result<f64> {
    if !alpha1.is_finite() || alpha1 <= 0.0 || alpha1 >= 1.0 {
        return Err(Error::domain(
            "alpha0_from_target",
            format!("alpha1 must lie in (0,1), got {alpha1}"),
        ));
    }
    Ok(-(1.0 - alpha1).ln())
}

/// The Adaptive Profile Information criterion at threshold alpha: the
/// lack-of-uniformity term [integral_0^alpha (t - Q*(t))^gamma dt]^(-1/gamma)
/// plus the expected-false-positive penalty lambda(m, pi0, d) m pi0 alpha,
/// with lambda = m^(2 pi0^2/gamma) / (1 - d) and the integral by composite
/// trapezoid. Returns +infinity when the lack-of-fit integral vanishes
/// (Q* coincides with the identity on [0, alpha]) or d = 1.
pub fn api_value(alpha: f64, backbone: &ConvexBackbone, m: usize, pi0: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha >= 1.0 {
        return Err(Error::domain(
            "api_value",
            format!("alpha must lie in (0,1), got {alpha}"),
        ));
    }
    check_xy("api_value", pi0, 1.0)?;
    if m == 0 {
        return Err(Error::domain("api_value", "m must be >= 1"));
    }
    let gamma = backbone.gamma;
    let h = alpha / (API_QUAD_POINTS - 1) as f64;
    let mut integral = 0.0;
    for i in 0..API_QUAD_POINTS {
        let t = i as f64 * h;
        let gap = (t - backbone.eval(t)).max(0.0);
        let w = if i == 0 || i == API_QUAD_POINTS - 1 {
            0.5
        } else {
            1.0
        };
        integral += w * gap.powf(gamma);
    }
    integral *= h;
    if !integral.is_finite() || integral <= 0.0 || backbone.d >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let mf = m as f64;
    let lambda = mf.powf(2.0 * pi0 * pi0 / gamma) / (1.0 - backbone.d);
    Ok(integral.powf(-1.0 / gamma) + lambda * mf * pi0 * alpha)
}

/// The data-driven calibrated threshold: run the backbone pipeline for
/// (pi0, gamma), apply [`alpha_cal`], and count rejections. When the
/// near-uniform guard fires the estimates collapse to (1, 1) and the
/// threshold is exactly the Bonferroni alpha0/m.
pub fn alpha_hat_cal(sample: &PValueSample, alpha0: f64) -> Result<ThresholdResult> {
    let est = pi0_backbone(sample)?;
    let backbone = est
        .backbone
        .as_ref()
        .expect("backbone estimator always carries fit diagnostics");
    let pi0 = est.value;
    let gamma = backbone.gamma;
    let alpha = alpha_cal(sample.len(), pi0, gamma, alpha0)?;
    let rejections = sample.sorted().partition_point(|&p| p <= alpha);
    Ok(ThresholdResult {
        alpha,
        method: ThresholdMethod::ApiClosedForm,
        alpha0,
        pi0_used: pi0,
        gamma_used: gamma,
        rejections,
    })
}
