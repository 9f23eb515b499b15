//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).

use adaptive_mt::backbone::{fit_backbone, ConvexBackbone};
use adaptive_mt::cli::{cmd_compare_pi0, ComparePi0Options, DEFAULT_Q_LEVELS};
use adaptive_mt::numeric::RngStream;
use adaptive_mt::pi0::Pi0Method;
use adaptive_mt::procedures::{bh_stepup, orthant_check, psi_bound, qvalues, StylizedTailModel};
use adaptive_mt::simkit::{mc_harness, orthant_generator, McMethod, SimModelConfig};
use adaptive_mt::splines::{bspline_basis, spline_derivative, vd_spline, KnotVector};
use adaptive_mt::thresholds::{alpha0_from_target, coeff_a, coeff_b};
use adaptive_mt::PValueSample;

fn report(criterion: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("acceptance criterion {criterion:02}: {status} — {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: the all-null calibration limit. The stylized bound at
/// m = 1e6 matches 1 - exp(-0.22) within 1e-4, and the Monte Carlo
/// family-wise error of hard thresholding at 0.22/m sits in 0.1975 ± 0.025.
#[test]
fn criterion_01_calibration_limit() {
    let model = StylizedTailModel::new(1.0, 1.0, 1.0, 1.0, 1.0, 1_000_000).unwrap();
    let psi = psi_bound(&model, 1.0, 0.22).unwrap();
    let limit = 1.0 - (-0.22f64).exp();
    let psi_ok = (psi - limit).abs() < 1e-4;

    let m = 10_000;
    let reps = 2000;
    let threshold = 0.22 / m as f64;
    let mut family_errors = 0usize;
    for rep in 0..reps {
        let mut stream = RngStream::new(20_240_101, rep as u64);
        let any = (0..m).any(|_| stream.uniform() <= threshold);
        if any {
            family_errors += 1;
        }
    }
    let fwe = family_errors as f64 / reps as f64;
    let mc_ok = (fwe - 0.1975).abs() <= 0.025;

    report(
        1,
        psi_ok && mc_ok,
        &format!("psi(1e6) = {psi:.6} vs {limit:.6}; MC FWE = {fwe:.4} in 0.1975 +/- 0.025"),
    );
}

/// Criterion 2: alpha0 conversions reproduce 0.05129, 0.1054, 0.2231 to
/// four significant digits.
#[test]
fn criterion_02_alpha0_conversions() {
    let cases = [(0.05, 0.05129), (0.10, 0.1054), (0.20, 0.2231)];
    let mut ok = true;
    let mut details = String::new();
    for (alpha1, want) in cases {
        let got = alpha0_from_target(alpha1).unwrap();
        // 4 significant digits: relative agreement to 5e-4.
        ok &= ((got - want) / want).abs() < 5e-4;
        details.push_str(&format!("{alpha1}->{got:.5} "));
    }
    report(2, ok, &details);
}

/// Criterion 3: A(1,1) = alpha0 and B(1,1) = 1 exactly; B stays in
/// [1/3, 1] and below (y+2)/(2y+1) over 1e4 random arguments.
#[test]
fn criterion_03_calibration_coefficients() {
    let exact = coeff_a(1.0, 1.0, 0.22).unwrap() == 0.22
        && coeff_a(1.0, 1.0, 0.05129329438755058).unwrap() == 0.05129329438755058
        && coeff_b(1.0, 1.0).unwrap() == 1.0;

    let mut stream = RngStream::new(3, 0);
    let mut range_ok = true;
    for _ in 0..10_000 {
        let x = (stream.uniform()).max(1e-6);
        let y = 1.0 + 49.0 * stream.uniform();
        let b = coeff_b(x, y).unwrap();
        range_ok &= (1.0 / 3.0..=1.0).contains(&b);
        range_ok &= b <= (y + 2.0) / (2.0 * y + 1.0) + 1e-15;
    }
    report(
        3,
        exact && range_ok,
        "A(1,1)=alpha0 and B(1,1)=1 bit-exact; B bounds hold on 1e4 draws",
    );
}

/// Criterion 4: q-value thresholding reproduces the BH step-up rejection
/// set exactly on 1000 random samples, both verified against a brute-force
/// step-up oracle.
#[test]
fn criterion_04_qvalue_bh_equivalence() {
    let mut stream = RngStream::new(44, 0);
    for trial in 0..1000 {
        let m = 1 + stream.index(200);
        let ps: Vec<f64> = (0..m)
            .map(|_| {
                if stream.uniform() < 0.3 {
                    stream.uniform().powf(3.0)
                } else {
                    stream.uniform()
                }
            })
            .collect();
        let sample = PValueSample::new(ps).unwrap();
        let q = 0.01 + 0.6 * stream.uniform();

        // Brute-force oracle: largest k with P_(k) <= q k / m.
        let sorted = sample.sorted();
        let k_oracle = (1..=m)
            .filter(|&k| sorted[k - 1] <= q * k as f64 / m as f64)
            .max()
            .unwrap_or(0);
        let threshold = if k_oracle > 0 {
            sorted[k_oracle - 1]
        } else {
            0.0
        };
        let oracle: Vec<bool> = if k_oracle == 0 {
            vec![false; m]
        } else {
            sample.values().iter().map(|&p| p <= threshold).collect()
        };

        let bh = bh_stepup(&sample, q).unwrap();
        let via_bh: Vec<bool> = if bh.rejections == 0 {
            vec![false; m]
        } else {
            sample.values().iter().map(|&p| p <= bh.alpha).collect()
        };
        let qs = qvalues(&sample, None);
        let via_q: Vec<bool> = qs.iter().map(|&v| v <= q).collect();

        assert_eq!(via_bh, oracle, "BH vs oracle disagreed on trial {trial}");
        assert_eq!(
            via_q, oracle,
            "q-values vs oracle disagreed on trial {trial}"
        );
    }
    report(
        4,
        true,
        "BH = q-value thresholding = brute force on 1000 samples",
    );
}

/// Criterion 5: BH at q = 0.05 controls the FDR on a pi0 = 0.8 mixture of
/// uniforms and Beta(0.3, 4) alternatives, within 3 standard errors.
#[test]
fn criterion_05_bh_fdr_control() {
    use rand_distr::{Beta, Distribution};
    let beta = Beta::new(0.3, 4.0).unwrap();
    let m = 1000;
    let m0 = 800;
    let reps = 500;
    let q = 0.05;

    let mut fdp_sum = 0.0;
    let mut fdp_sq = 0.0;
    for rep in 0..reps {
        let mut stream = RngStream::new(500_000 + rep as u64, 0);
        let mut ps = Vec::with_capacity(m);
        for _ in 0..m0 {
            ps.push(stream.uniform());
        }
        for _ in m0..m {
            let draw: f64 = beta.sample(stream.rng());
            ps.push(draw.clamp(0.0, 1.0));
        }
        let sample = PValueSample::new(ps).unwrap();
        let res = bh_stepup(&sample, q).unwrap();
        let fdp = if res.rejections > 0 {
            let false_rej = sample.values()[..m0]
                .iter()
                .filter(|&&p| p <= res.alpha)
                .count();
            false_rej as f64 / res.rejections as f64
        } else {
            0.0
        };
        fdp_sum += fdp;
        fdp_sq += fdp * fdp;
    }
    let fdr_hat = fdp_sum / reps as f64;
    let var = (fdp_sq / reps as f64 - fdr_hat * fdr_hat).max(0.0);
    let se = (var / reps as f64).sqrt();
    report(
        5,
        fdr_hat <= q + 3.0 * se,
        &format!("FDR = {fdr_hat:.4} vs bound {q} + 3*{se:.4}"),
    );
}

/// Criterion 6: spline suite. Partition of unity to 1e-12, linear
/// reproduction to 1e-10, derivative against central differences to 1e-4,
/// and monotone preservation on 100 random monotone coefficient inputs.
#[test]
fn criterion_06_spline_suite() {
    let mut stream = RngStream::new(66, 0);
    let grid: Vec<f64> = (0..1001).map(|i| i as f64 / 1000.0).collect();

    let mut unity_ok = true;
    let mut linear_ok = true;
    let mut deriv_ok = true;
    let mut monotone_ok = true;

    for trial in 0..100 {
        let n_knots = 2 + stream.index(10);
        let mut interior: Vec<f64> = (0..n_knots)
            .map(|_| 0.001 + 0.998 * stream.uniform())
            .collect();
        interior.sort_by(f64::total_cmp);
        interior.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let knots = KnotVector::clamped(interior).unwrap();
        let n = knots.basis_count();

        for &u in &grid {
            let total: f64 = (0..n).map(|j| bspline_basis(&knots, j, u).unwrap()).sum();
            unity_ok &= (total - 1.0).abs() <= 1e-12;
        }

        let alpha = stream.uniform() - 0.5;
        let beta = 2.0 * stream.uniform() - 1.0;
        let lin = vd_spline(|u| alpha + beta * u, &knots).unwrap();
        for &u in &grid {
            linear_ok &= (lin.eval(u) - (alpha + beta * u)).abs() <= 1e-10;
        }

        // Smooth nonlinear h for the derivative check.
        let c = 0.5 + stream.uniform();
        let s = vd_spline(|u| (c * u).sin() * 0.5 + 0.3 * u * u, &knots).unwrap();
        let eps = 1e-5;
        for _ in 0..20 {
            let u = eps + (1.0 - 2.0 * eps) * stream.uniform();
            let fd = (s.eval(u + eps) - s.eval(u - eps)) / (2.0 * eps);
            deriv_ok &= (spline_derivative(&s, u) - fd).abs() <= 1e-4;
        }

        // Random nondecreasing step function: cumulative sums of
        // nonnegative increments over 16 buckets.
        let steps: Vec<f64> = (0..16).map(|_| stream.uniform() * 0.1).collect();
        let monotone = |u: f64| {
            let idx = ((u * 15.99) as usize).min(15);
            steps[..=idx].iter().sum::<f64>()
        };
        let ms = vd_spline(monotone, &knots).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for &u in &grid {
            let v = ms.eval(u);
            monotone_ok &= v >= prev - 1e-12;
            prev = v;
        }
        let _ = trial;
    }

    report(
        6,
        unity_ok && linear_ok && deriv_ok && monotone_ok,
        &format!(
            "unity {unity_ok}, linear {linear_ok}, derivative {deriv_ok}, monotone {monotone_ok}"
        ),
    );
}

/// Criterion 7: refitting a curve generated exactly from a known backbone
/// recovers gamma within 0.05 and pi0 within 0.02.
#[test]
fn criterion_07_backbone_round_trip() {
    // Independent construction: a is solved from the smoothness constraints
    // and Q*(1) = 1 given (gamma, d, tau).
    let make = |gamma: f64, d: f64, tau: f64| -> ConvexBackbone {
        let a = (1.0 - d) / (tau.powf(gamma - 1.0) * (tau + gamma * (1.0 - tau)));
        let b1 = a * gamma * tau.powf(gamma - 1.0) + d;
        ConvexBackbone {
            gamma,
            a,
            d,
            b0: 1.0 - b1,
            b1,
            tau,
            objective: 0.0,
            fallback: false,
        }
    };
    let mut worst_gamma = 0.0f64;
    let mut worst_pi0 = 0.0f64;
    for (gamma, d, tau) in [
        (1.5, 0.10, 0.20),
        (2.0, 0.30, 0.30),
        (2.5, 0.05, 0.40),
        (3.0, 0.50, 0.35),
        (4.0, 0.20, 0.25),
        (5.0, 0.00, 0.30),
    ] {
        let truth = make(gamma, d, tau);
        let fitted = fit_backbone(&|t| truth.eval(t), tau).unwrap();
        worst_gamma = worst_gamma.max((fitted.gamma - gamma).abs());
        worst_pi0 = worst_pi0.max((fitted.pi0() - truth.pi0()).abs());
    }
    report(
        7,
        worst_gamma <= 0.05 && worst_pi0 <= 0.02,
        &format!("max |gamma error| = {worst_gamma:.4}, max |pi0 error| = {worst_pi0:.4}"),
    );
}

/// Criterion 8: desk-scale reproduction of the estimator comparison.
/// On models 2 and 4 scaled to m = 600 the backbone root-MSE is no worse
/// than each baseline's + 0.01, and on scaled model 1 the slope estimator
/// is at least as upward-biased as the backbone.
#[test]
fn criterion_08_pi0_estimator_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let configs = vec![
        SimModelConfig::scaled(2, 600, 100).unwrap(),
        SimModelConfig::scaled(4, 600, 50).unwrap(),
    ];
    let opts = ComparePi0Options { reps: 200, seed: 8 };
    let rows = cmd_compare_pi0(&configs, &opts, dir.path()).unwrap();

    let mut mse_ok = true;
    let mut details = String::new();
    for id in [2u8, 4] {
        let backbone = rows
            .iter()
            .find(|r| r.model_id == id && r.estimator == Pi0Method::Backbone)
            .unwrap();
        for baseline in [Pi0Method::StoreyBootstrap, Pi0Method::BhSlope] {
            let other = rows
                .iter()
                .find(|r| r.model_id == id && r.estimator == baseline)
                .unwrap();
            mse_ok &= backbone.root_mse <= other.root_mse + 0.01;
        }
        details.push_str(&format!(
            "model {id}: backbone rmse {:.4}; ",
            backbone.root_mse
        ));
    }

    let model1 = vec![SimModelConfig::scaled(1, 600, 100).unwrap()];
    let rows1 = cmd_compare_pi0(&model1, &opts, dir.path()).unwrap();
    let backbone_bias = rows1
        .iter()
        .find(|r| r.estimator == Pi0Method::Backbone)
        .unwrap()
        .bias;
    let slope_bias = rows1
        .iter()
        .find(|r| r.estimator == Pi0Method::BhSlope)
        .unwrap()
        .bias;
    let bias_ok = slope_bias >= backbone_bias;
    details.push_str(&format!(
        "model 1 bias: slope {slope_bias:.4} vs backbone {backbone_bias:.4}"
    ));

    report(8, mse_ok && bias_ok, &details);
}

/// Criterion 9: curve shape on scaled models 7 and 8 (m = 1000): FDR
/// nondecreasing and FNDP nonincreasing across the nine control levels for
/// both step-up procedures, and the API operating point reproducible
/// across seeds to within 0.03.
#[test]
fn criterion_09_curve_shapes() {
    let reps = 200;
    let mut ok = true;
    let mut details = String::new();
    for id in [7u8, 8] {
        let config = SimModelConfig::scaled(id, 1000, 6).unwrap();
        for adaptive in [false, true] {
            let mut prev_fdr = f64::NEG_INFINITY;
            let mut prev_fndp = f64::INFINITY;
            for &q in DEFAULT_Q_LEVELS.iter() {
                let method = if adaptive {
                    McMethod::AdaptiveBh { q }
                } else {
                    McMethod::Bh { q }
                };
                let rep = mc_harness(&config, &method, reps, 9).unwrap();
                ok &= rep.fdr_hat >= prev_fdr - 1e-12;
                ok &= rep.fndp_hat <= prev_fndp + 1e-12;
                prev_fdr = rep.fdr_hat;
                prev_fndp = rep.fndp_hat;
            }
        }

        let api = McMethod::Api { alpha0: 0.22 };
        let a = mc_harness(&config, &api, reps, 9).unwrap();
        let b = mc_harness(&config, &api, reps, 77).unwrap();
        let fdr_diff = (a.fdr_hat - b.fdr_hat).abs();
        let fndp_diff = (a.fndp_hat - b.fndp_hat).abs();
        ok &= fdr_diff <= 0.03 && fndp_diff <= 0.03;
        details.push_str(&format!(
            "model {id}: API seed spread FDR {fdr_diff:.4}, FNDP {fndp_diff:.4}; "
        ));
    }
    report(9, ok, &details);
}

/// Criterion 10: the shared-base generator satisfies positive orthant
/// dependence at alpha in {0.01, 0.05, 0.2} with card 10 and 1e5 draws,
/// within 3 standard errors.
#[test]
fn criterion_10_orthant_dependence() {
    let mut ok = true;
    let mut details = String::new();
    for (i, alpha) in [0.01, 0.05, 0.2].into_iter().enumerate() {
        let mut stream = RngStream::new(1010, i as u64);
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
            alpha,
            100_000,
        )
        .unwrap();
        ok &= check.pass;
        details.push_str(&format!(
            "alpha {alpha}: lhs {:.4} rhs {:.4}; ",
            check.lhs, check.rhs
        ));
    }
    report(10, ok, &details);
}

/// Criterion 11: the stylized bound strictly decreases in m when the
/// average power stays visible (xi = 0.5 < 1).
#[test]
fn criterion_11_psi_decay() {
    let mut prev = f64::INFINITY;
    let mut ok = true;
    let mut values = String::new();
    for m in [1_000usize, 10_000, 100_000] {
        let model = StylizedTailModel::new(1.0, 1.0, 1.0, 0.5, 0.9, m).unwrap();
        let psi = psi_bound(&model, 2.0, 0.22).unwrap();
        ok &= psi < prev;
        values.push_str(&format!("m={m}: {psi:.5}; "));
        prev = psi;
    }
    report(11, ok, &values);
}
