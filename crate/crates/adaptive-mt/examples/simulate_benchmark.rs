//! Run one benchmark scenario through the Monte Carlo harness and compare
//! procedures, like the `simulate` subcommand but scaled down for speed.
//!
//! Run with: cargo run --release --example simulate_benchmark

use adaptive_mt::simkit::{mc_harness, McMethod, SimModelConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Model 6 scaled to desk size: 1000 variables, 32 alternatives, low noise.
    let config = SimModelConfig::scaled(6, 1000, 32)?;
    let reps = 100;
    let seed = 42;
    println!(
        "model {} (m = {}, m1 = {}, sigma = {}), true pi0 = {:.4}, {reps} replicates",
        config.model_id,
        config.m,
        config.m1,
        config.sigma,
        config.pi0_true()
    );

    let methods = [
        McMethod::Api { alpha0: 0.22 },
        McMethod::Bh { q: 0.01 },
        McMethod::Bh { q: 0.05 },
        McMethod::Bh { q: 0.1 },
        McMethod::AdaptiveBh { q: 0.05 },
    ];
    println!(
        "{:<12} {:>8} {:>8} {:>8} {:>8}",
        "method", "FDR", "FNDP", "ERR", "pERR"
    );
    for method in methods {
        let report = mc_harness(&config, &method, reps, seed)?;
        println!(
            "{:<12} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            method.label(),
            report.fdr_hat,
            report.fndp_hat,
            report.err_hat,
            report.perr_hat
        );
    }
    Ok(())
}
