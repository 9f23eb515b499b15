//! The B-spline machinery on its own: the data-driven knot design, the
//! variation-diminishing operator, and the spline derivative.
//!
//! Run with: cargo run --example spline_smoothing

use adaptive_mt::numeric::RngStream;
use adaptive_mt::splines::{bspline_basis, build_knots, vd_spline};
use adaptive_mt::PValueSample;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = RngStream::new(8, 0);
    let ps: Vec<f64> = (0..1500)
        .map(|_| {
            if rng.uniform() < 0.8 {
                rng.uniform()
            } else {
                rng.uniform().powf(5.0)
            }
        })
        .collect();
    let sample = PValueSample::new(ps)?;

    let knots = build_knots(&sample)?;
    println!("interior knots ({}):", knots.interior().len());
    for k in knots.interior() {
        print!(" {k:.5}");
    }
    println!("\nbasis dimension: {}", knots.basis_count());

    // Partition of unity at an arbitrary point.
    let u = 0.37;
    let total: f64 = (0..knots.basis_count())
        .map(|j| bspline_basis(&knots, j, u).unwrap())
        .sum();
    println!("sum of basis functions at u = {u}: {total:.15}");

    // Smooth the modified EQF once and inspect values and the quantile
    // density.
    let spline = vd_spline(|t| sample.modified_eqf_eval(t).unwrap(), &knots)?;
    println!(
        "\n{:>6} {:>10} {:>10} {:>12}",
        "t", "mod EQF", "spline", "density"
    );
    for i in 1..=10 {
        let t = i as f64 / 10.0;
        println!(
            "{t:>6.2} {:>10.5} {:>10.5} {:>12.4}",
            sample.modified_eqf_eval(t)?,
            spline.eval(t),
            spline.derivative(t)
        );
    }
    Ok(())
}
