//! Comparing the null-proportion estimators on mixtures with a known truth.
//!
//! Run with: cargo run --example pi0_estimation

use adaptive_mt::backbone::pi0_backbone;
use adaptive_mt::numeric::RngStream;
use adaptive_mt::pi0::{
    bh_pi0_slope, default_lambda_grid, storey_pi0, storey_pi0_bootstrap, DEFAULT_BOOTSTRAP_REPS,
};
use adaptive_mt::PValueSample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 5000;
    println!(
        "{:<10} {:>9} {:>9} {:>12} {:>9}",
        "true pi0", "backbone", "storey", "storey-boot", "bh-slope"
    );
    for pi0_true in [1.0, 0.95, 0.85, 0.7] {
        let mut rng = RngStream::new(77, (pi0_true * 100.0) as u64);
        let ps: Vec<f64> = (0..m)
            .map(|_| {
                if rng.uniform() < pi0_true {
                    rng.uniform()
                } else {
                    // Alternatives: strongly concentrated small P values.
                    rng.uniform().powf(8.0)
                }
            })
            .collect();
        let sample = PValueSample::new(ps)?;

        let backbone = pi0_backbone(&sample)?;
        let storey = storey_pi0(&sample, 0.5)?;
        let mut stream = RngStream::new(78, 0);
        let boot = storey_pi0_bootstrap(
            &sample,
            &default_lambda_grid(),
            DEFAULT_BOOTSTRAP_REPS,
            &mut stream,
        )?;
        let slope = bh_pi0_slope(&sample)?;
        println!(
            "{:<10.2} {:>9.4} {:>9.4} {:>12.4} {:>9.4}{}",
            pi0_true,
            backbone.value,
            storey.value,
            boot.value,
            slope.value,
            if backbone.flagged {
                "   (guard fired)"
            } else {
                ""
            },
        );
    }
    Ok(())
}
