//! The adaptive threshold pipeline in slow motion: smooth the modified EQF,
//! locate the bend point, fit the convex backbone, and calibrate the
//! threshold, showing each intermediate quantity.
//!
//! Run with: cargo run --example adaptive_threshold

use adaptive_mt::backbone::{bend_point, fit_backbone, smooth_eqf, KS_BAND_SCALE};
use adaptive_mt::numeric::RngStream;
use adaptive_mt::thresholds::{alpha_cal, alpha_hat_cal};
use adaptive_mt::PValueSample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 3000;
    let mut rng = RngStream::new(12, 0);
    let ps: Vec<f64> = (0..m)
        .map(|_| {
            if rng.uniform() < 0.9 {
                rng.uniform()
            } else {
                rng.uniform().powf(10.0)
            }
        })
        .collect();
    let sample = PValueSample::new(ps)?;

    let spline = smooth_eqf(&sample, 3)?;
    println!(
        "smoothed EQF on {} basis functions",
        spline.coefficients().len()
    );
    for t in [0.01, 0.05, 0.1, 0.25, 0.5, 0.9] {
        println!(
            "  Q({t:.2}) = {:.5}   quantile density q({t:.2}) = {:.3}",
            spline.eval(t),
            spline.derivative(t)
        );
    }

    let tau = bend_point(&|t| spline.eval(t), KS_BAND_SCALE / (m as f64).sqrt());
    println!("\nbend point tau = {tau:.4}");

    let backbone = fit_backbone(&|t| spline.eval(t), tau)?;
    println!(
        "backbone: gamma = {:.3}, a = {:.3}, d = {:.3}, chord slope b1 = {:.4}",
        backbone.gamma, backbone.a, backbone.d, backbone.b1
    );
    println!("pi0 estimate (inverse chord slope) = {:.4}", backbone.pi0());

    let result = alpha_hat_cal(&sample, 0.22)?;
    println!(
        "\ncalibrated threshold = {:.3e} ({} rejections of {m})",
        result.alpha, result.rejections
    );
    println!(
        "Bonferroni reference alpha0/m = {:.3e}",
        alpha_cal(m, 1.0, 1.0, 0.22)?
    );
    Ok(())
}
