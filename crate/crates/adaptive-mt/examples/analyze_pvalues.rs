//! End-to-end analysis of a P-value file, exactly what the `analyze`
//! subcommand does: null-proportion estimates by every method, the adaptive
//! threshold, and step-up baselines, written to a report directory.
//!
//! Run with: cargo run --example analyze_pvalues

use adaptive_mt::cli::{cmd_analyze, AnalyzeOptions};
use adaptive_mt::numeric::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Synthesize a mixture: 85% uniform nulls, 15% alternatives
    // concentrated near zero.
    let mut rng = RngStream::new(2024, 0);
    let mut content = String::from("p_value\n");
    for _ in 0..4000 {
        let p = if rng.uniform() < 0.85 {
            rng.uniform()
        } else {
            rng.uniform().powf(6.0)
        };
        content.push_str(&format!("{p}\n"));
    }
    let dir = std::env::temp_dir().join("adaptive-mt-analyze-example");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("pvalues.csv");
    std::fs::write(&input, content)?;

    let report = cmd_analyze(&input, &AnalyzeOptions::default(), &dir)?;
    print!("{}", report.render_text());
    println!("\nfull report: {}", dir.display());
    Ok(())
}
