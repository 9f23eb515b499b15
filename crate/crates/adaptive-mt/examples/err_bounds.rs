//! Error-rate evaluators: the exact erroneous rejection ratio under
//! independence, the stylized tail bound and its large-m limit, and the
//! Monte Carlo positive-orthant-dependence check on a shared-base
//! generator.
//!
//! Run with: cargo run --example err_bounds

use adaptive_mt::numeric::RngStream;
use adaptive_mt::procedures::{err_exact, orthant_check, psi_bound, Marginal, StylizedTailModel};
use adaptive_mt::simkit::orthant_generator;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Exact ERR for ten tests, half null and half with cdf sqrt(t).
    let marginals: Vec<Marginal> = (0..10)
        .map(|i| {
            if i % 2 == 0 {
                Marginal::Null
            } else {
                Marginal::Alt(Box::new(|t: f64| t.sqrt()))
            }
        })
        .collect();
    println!("exact ERR of hard thresholding (5 nulls, 5 sqrt-cdf alternatives):");
    for alpha in [0.001, 0.01, 0.05, 0.2] {
        println!("  ERR({alpha}) = {:.5}", err_exact(&marginals, alpha)?);
    }

    // The all-null bound approaches 1 - exp(-alpha0) as m grows.
    println!("\nstylized bound, all-null case, alpha0 = 0.22:");
    for m in [1_000usize, 10_000, 100_000, 1_000_000] {
        let model = StylizedTailModel::new(1.0, 1.0, 1.0, 1.0, 1.0, m)?;
        println!("  m = {m:>8}: psi = {:.6}", psi_bound(&model, 1.0, 0.22)?);
    }
    println!("  limit 1 - exp(-0.22) = {:.6}", 1.0 - (-0.22f64).exp());

    // With visible average power (xi < 1) the bound decays with m.
    println!("\nstylized bound with pi0 = 0.9, gamma = 2, xi = 0.5:");
    for m in [1_000usize, 10_000, 100_000] {
        let model = StylizedTailModel::new(1.0, 1.0, 1.0, 0.5, 0.9, m)?;
        println!("  m = {m:>8}: psi = {:.6}", psi_bound(&model, 2.0, 0.22)?);
    }

    // Shared-base dependent P values: P_j = P0^(X_j) with exponential
    // exponents; the joint survival dominates the product of marginals.
    let mut stream = RngStream::new(99, 0);
    let check = orthant_check(
        || {
            orthant_generator(
                10,
                |s: &mut RngStream| s.uniform(),
                |s: &mut RngStream| -(1.0 - s.uniform()).ln(),
                &mut stream,
            )
            .unwrap()
        },
        0.05,
        100_000,
    )?;
    println!(
        "\northant check at alpha = 0.05: Pr(all > a) = {:.4} vs product {:.4} -> {}",
        check.lhs,
        check.rhs,
        if check.pass {
            "dependence confirmed"
        } else {
            "violated"
        }
    );
    Ok(())
}
