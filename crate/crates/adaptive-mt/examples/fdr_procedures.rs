//! The classical rejection procedures side by side: BH step-up, adaptive
//! BH with an estimated null proportion, and q-values.
//!
//! Run with: cargo run --example fdr_procedures

use adaptive_mt::numeric::RngStream;
use adaptive_mt::pi0::bh_pi0_slope;
use adaptive_mt::procedures::{adaptive_bh, bh_stepup, hard_threshold_outcome, qvalues};
use adaptive_mt::PValueSample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 2000;
    let m1 = 300;
    let mut rng = RngStream::new(3, 0);
    let mut ps = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    for i in 0..m {
        let alt = i < m1;
        truth.push(alt);
        ps.push(if alt {
            rng.uniform().powf(12.0)
        } else {
            rng.uniform()
        });
    }
    let sample = PValueSample::new(ps)?;
    let pi0 = bh_pi0_slope(&sample)?;
    println!("slope estimate of the null proportion: {:.4}\n", pi0.value);

    println!(
        "{:>6} {:>8} {:>8} {:>12} {:>10}",
        "q", "BH rej", "aBH rej", "qval<=q rej", "true FDP"
    );
    for q in [0.01, 0.05, 0.1, 0.2] {
        let bh = bh_stepup(&sample, q)?;
        let abh = adaptive_bh(&sample, q, &pi0)?;
        let qs = qvalues(&sample, Some(&pi0));
        let q_rej = qs.iter().filter(|&&v| v <= q).count();

        // With known truth, tabulate the realized false discovery proportion
        // of the BH threshold.
        let outcome = hard_threshold_outcome(&sample, bh.alpha, &truth)?;
        let fdp = if outcome.r > 0 {
            outcome.v as f64 / outcome.r as f64
        } else {
            0.0
        };
        println!(
            "{q:>6} {:>8} {:>8} {:>12} {:>10.4}",
            bh.rejections, abh.rejections, q_rej, fdp
        );
    }
    Ok(())
}
