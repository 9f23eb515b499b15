//! Rejection procedures (hard thresholding, BH step-up, adaptive BH,
//! q-values) and the exact error evaluators used for verification: the
//! closed-form erroneous rejection ratio under independence, the stylized
//! tail bound, and the Monte Carlo positive-orthant-dependence check.

use crate::ecdf::PValueSample;
use crate::error::{Error, Result};
use crate::pi0::Pi0Estimate;
use crate::thresholds::{alpha_cal, ThresholdMethod, ThresholdResult};

/// Multiple-testing outcome counts: v false rejections, s correct
/// rejections, r = v + s total, against m0 true nulls and m1 alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeTable {
    pub v: usize,
    pub s: usize,
    pub r: usize,
    pub m0: usize,
    pub m1: usize,
    pub m: usize,
}

/// Reject H_0i iff P_i <= alpha; returns the rejection indicators in input
/// order.
pub fn hard_threshold(sample: &PValueSample, alpha: f64) -> Result<Vec<bool>> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(
            "hard_threshold",
            format!("alpha must lie in [0,1], got {alpha}"),
        ));
    }
    Ok(sample.values().iter().map(|&p| p <= alpha).collect())
}

/// Hard thresholding with known truth: tabulates (V, S, R).
pub fn hard_threshold_outcome(
    sample: &PValueSample,
    alpha: f64,
    truth: &[bool],
) -> Result<OutcomeTable> {
    let rejections = hard_threshold(sample, alpha)?;
    outcome_from_rejections(&rejections, truth)
}

/// Tabulate (V, S, R) from rejection indicators and the truth vector
/// (true marks an alternative hypothesis).
pub fn outcome_from_rejections(rejections: &[bool], truth: &[bool]) -> Result<OutcomeTable> {
    if rejections.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "truth length {} does not match {} tests",
            truth.len(),
            rejections.len()
        )));
    }
    let mut v = 0;
    let mut s = 0;
    let mut m1 = 0;
    for (&rej, &alt) in rejections.iter().zip(truth) {
        if alt {
            m1 += 1;
            if rej {
                s += 1;
            }
        } else if rej {
            v += 1;
        }
    }
    let m = truth.len();
    Ok(OutcomeTable {
        v,
        s,
        r: v + s,
        m0: m - m1,
        m1,
        m,
    })
}

/// Benjamini-Hochberg step-up at level q: rejects the k* smallest P values
/// where k* = max{k : P_{k:m} <= q k/m}; the induced threshold is P_{k*:m}
/// (reported as 0 when nothing is rejected).
pub fn bh_stepup(sample: &PValueSample, q: f64) -> Result<ThresholdResult> {
    if !q.is_finite() || q <= 0.0 || q >= 1.0 {
        return Err(Error::domain(
            "bh_stepup",
            format!("q must lie in (0,1), got {q}"),
        ));
    }
    step_up(sample, q, sample.len(), ThresholdMethod::BhStepup, 1.0)
}

/// Adaptive BH: the step-up criterion with k/m replaced by k/m0_hat, where
/// m0_hat = round(pi0 * m) floored at 1.
pub fn adaptive_bh(sample: &PValueSample, q: f64, pi0: &Pi0Estimate) -> Result<ThresholdResult> {
    if !q.is_finite() || q <= 0.0 || q >= 1.0 {
        return Err(Error::domain(
            "adaptive_bh",
            format!("q must lie in (0,1), got {q}"),
        ));
    }
    let m = sample.len();
    let m0_hat = ((pi0.value * m as f64).round() as usize).max(1);
    step_up(sample, q, m0_hat, ThresholdMethod::AdaptiveBh, pi0.value)
}

fn step_up(
    sample: &PValueSample,
    q: f64,
    m0_hat: usize,
    method: ThresholdMethod,
    pi0_used: f64,
) -> Result<ThresholdResult> {
    let sorted = sample.sorted();
    let m0f = m0_hat as f64;
    let mut k_star = 0;
    for k in (1..=sorted.len()).rev() {
        if sorted[k - 1] <= q * k as f64 / m0f {
            k_star = k;
            break;
        }
    }
    let alpha = if k_star > 0 { sorted[k_star - 1] } else { 0.0 };
    Ok(ThresholdResult {
        alpha,
        method,
        alpha0: q,
        pi0_used,
        gamma_used: 1.0,
        rejections: k_star,
    })
}

/// q-values: q_(k) = min_{j >= k} pi0 m P_{j:m} / j, clamped to <= 1 and
/// mapped back to input order. Thresholding the q-values at q* reproduces
/// the BH step-up rejection set when pi0 = 1.
pub fn qvalues(sample: &PValueSample, pi0: Option<&Pi0Estimate>) -> Vec<f64> {
    let pi0v = pi0.map_or(1.0, |e| e.value);
    let values = sample.values();
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut qs = vec![0.0; m];
    let mut running = f64::INFINITY;
    for rank in (1..=m).rev() {
        let idx = order[rank - 1];
        let raw = pi0v * m as f64 * values[idx] / rank as f64;
        running = running.min(raw);
        qs[idx] = running.min(1.0);
    }
    qs
}

/// A per-test marginal P-value cdf under the two-group model: nulls are
/// exactly uniform, alternatives carry an arbitrary cdf on [0, 1].
pub enum Marginal {
    Null,
    Alt(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Marginal {
    fn cdf(&self, t: f64) -> f64 {
        match self {
            Marginal::Null => t,
            Marginal::Alt(f) => f(t),
        }
    }
}

/// Exact erroneous rejection ratio of hard thresholding at alpha under
/// independence: ERR(alpha) = [pi0 alpha / F_m(alpha)] Pr(P_{1:m} <= alpha)
/// with F_m the average marginal cdf and
/// Pr(P_{1:m} <= alpha) = 1 - prod(1 - G_i(alpha)).
/// F_m(alpha) = 0 returns 0 under the a*0 = 0 convention.
pub fn err_exact(marginals: &[Marginal], alpha: f64) -> Result<f64> {
    if marginals.is_empty() {
        return Err(Error::InvalidInput("no marginal cdfs supplied".into()));
    }
    if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
        return Err(Error::domain(
            "err_exact",
            format!("alpha must lie in (0,1], got {alpha}"),
        ));
    }
    let m = marginals.len() as f64;
    let mut null_count = 0usize;
    let mut sum_g = 0.0;
    let mut prod_surv = 1.0;
    for marg in marginals {
        let g = marg.cdf(alpha);
        if !g.is_finite() || !(0.0..=1.0).contains(&g) {
            return Err(Error::domain(
                "err_exact",
                format!("marginal cdf returned {g} at {alpha}"),
            ));
        }
        if matches!(marg, Marginal::Null) {
            null_count += 1;
        }
        sum_g += g;
        prod_surv *= 1.0 - g;
    }
    let pi0 = null_count as f64 / m;
    let f_m = sum_g / m;
    if f_m == 0.0 {
        return Ok(0.0);
    }
    Ok((pi0 * alpha / f_m) * (1.0 - prod_surv))
}

/// Stylized Beta-like tail model: envelope cdf F(t) ~ beta t^eta and
/// average alternative cdf H(t) ~ psi t^xi near zero, for m tests with
/// null proportion pi0.
#[derive(Debug, Clone, Copy)]
pub struct StylizedTailModel {
    pub beta: f64,
    pub eta: f64,
    pub psi: f64,
    pub xi: f64,
    pub pi0: f64,
    pub m: usize,
}

impl StylizedTailModel {
    pub fn new(beta: f64, eta: f64, psi: f64, xi: f64, pi0: f64, m: usize) -> Result<Self> {
        let ok = beta > 0.0
            && beta.is_finite()
            && (0.0..=1.0).contains(&eta)
            && eta > 0.0
            && psi > 0.0
            && psi.is_finite()
            && (0.0..=1.0).contains(&xi)
            && xi > 0.0
            && pi0 > 0.0
            && pi0 <= 1.0
            && m >= 1;
        if !ok {
            return Err(Error::domain(
                "StylizedTailModel",
                format!(
                    "invalid parameters beta={beta} eta={eta} psi={psi} xi={xi} pi0={pi0} m={m}"
                ),
            ));
        }
        Ok(StylizedTailModel {
            beta,
            eta,
            psi,
            xi,
            pi0,
            m,
        })
    }
}

/// The ERR upper bound at the calibrated threshold:
/// Psi(a) = [pi0 a / (pi0 a + (1-pi0) H(a))] [1 - (1 - F(a))^m]
/// evaluated at a = alpha_cal(m, pi0, gamma, alpha0). An envelope value
/// above 1 is clamped to 1.
pub fn psi_bound(model: &StylizedTailModel, gamma: f64, alpha0: f64) -> Result<f64> {
    let alpha = alpha_cal(model.m, model.pi0, gamma, alpha0)?;
    let envelope = (model.beta * alpha.powf(model.eta)).min(1.0);
    let h = model.psi * alpha.powf(model.xi);
    let denom = model.pi0 * alpha + (1.0 - model.pi0) * h;
    let front = if denom > 0.0 {
        model.pi0 * alpha / denom
    } else {
        0.0
    };
    let tail = 1.0 - (1.0 - envelope).powf(model.m as f64);
    Ok(front * tail)
}

/// Result of the Monte Carlo positive-orthant-dependence check:
/// lhs estimates Pr(all P_i > alpha), rhs the product of marginal
/// probabilities, and the check passes when lhs >= rhs - 3 se.
#[derive(Debug, Clone, Copy)]
pub struct OrthantCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Estimate both sides of the orthant inequality from `n_draws` joint
/// samples of the P vector produced by `draw`.
pub fn orthant_check<S: FnMut() -> Vec<f64>>(
    mut draw: S,
    alpha: f64,
    n_draws: usize,
) -> Result<OrthantCheck> {
    if n_draws == 0 {
        return Err(Error::InvalidInput("n_draws must be >= 1".into()));
    }
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(
            "orthant_check",
            format!("alpha must lie in [0,1], got {alpha}"),
        ));
    }

    let first = draw();
    let dim = first.len();
    if dim == 0 {
        return Err(Error::InvalidInput(
            "sampler produced an empty vector".into(),
        ));
    }
    let mut joint = 0usize;
    let mut marginal = vec![0usize; dim];
    let mut tally = |vector: &[f64]| -> Result<()> {
        if vector.len() != dim {
            return Err(Error::InvalidInput(format!(
                "sampler dimension changed from {dim} to {}",
                vector.len()
            )));
        }
        let mut all = true;
        for (i, &p) in vector.iter().enumerate() {
            if p > alpha {
                marginal[i] += 1;
            } else {
                all = false;
            }
        }
        if all {
            joint += 1;
        }
        Ok(())
    };
    tally(&first)?;
    for _ in 1..n_draws {
        let v = draw();
        tally(&v)?;
    }

    let n = n_draws as f64;
    let lhs = joint as f64 / n;
    let probs: Vec<f64> = marginal.iter().map(|&c| c as f64 / n).collect();
    let rhs: f64 = probs.iter().product();
    let se_lhs = (lhs * (1.0 - lhs) / n).sqrt();
    // Delta method on the product: relative variances of the factors add.
    let se_rhs = if probs.iter().all(|&p| p > 0.0) {
        rhs * probs
            .iter()
            .map(|&p| (1.0 - p) / (n * p))
            .sum::<f64>()
            .sqrt()
    } else {
        0.0
    };
    let se = (se_lhs * se_lhs + se_rhs * se_rhs).sqrt();
    let margin = lhs - rhs;
    Ok(OrthantCheck {
        lhs,
        rhs,
        se,
        margin,
        pass: margin >= -3.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RngStream;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> PValueSample {
        PValueSample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn hard_threshold_counts() {
        let s = sample(&[0.01, 0.04, 0.2]);
        let t = hard_threshold_outcome(&s, 0.05, &[true, false, true]).unwrap();
        assert_eq!((t.v, t.s, t.r), (1, 1, 2));
        assert_eq!((t.m0, t.m1, t.m), (1, 2, 3));

        let t = hard_threshold_outcome(&s, 0.0, &[true, false, true]).unwrap();
        assert_eq!(t.r, 0);
        let t = hard_threshold_outcome(&s, 1.0, &[true, false, true]).unwrap();
        assert_eq!((t.v, t.s, t.r), (t.m0, t.m1, t.m));

        assert!(hard_threshold_outcome(&s, 0.05, &[true]).is_err());
        assert!(hard_threshold(&s, 1.5).is_err());
    }

    /// Brute-force step-up oracle: max over k of the criterion.
    fn bh_oracle(sorted: &[f64], q: f64) -> usize {
        let m = sorted.len();
        (1..=m)
            .filter(|&k| sorted[k - 1] <= q * k as f64 / m as f64)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn bh_stepup_examples() {
        let s = sample(&[0.01, 0.02, 0.03, 0.5]);
        let r = bh_stepup(&s, 0.05).unwrap();
        assert_eq!(r.rejections, 3);
        assert_eq!(r.alpha, 0.03);
        assert_eq!(bh_oracle(s.sorted(), 0.05), 3);

        let s = sample(&[0.9, 0.9, 0.9]);
        let r = bh_stepup(&s, 0.05).unwrap();
        assert_eq!(r.rejections, 0);
        assert_eq!(r.alpha, 0.0);

        let s = sample(&[0.04]);
        assert_eq!(bh_stepup(&s, 0.05).unwrap().rejections, 1);
    }

    #[test]
    fn adaptive_bh_examples() {
        let s = sample(&[0.01, 0.02, 0.03, 0.5]);
        let pi0 = Pi0Estimate::fixed(0.5).unwrap();
        let r = adaptive_bh(&s, 0.05, &pi0).unwrap();
        // m0_hat = 2; k = 4 fails (0.5 > 0.1), k = 3 passes (0.03 <= 0.075).
        assert_eq!(r.rejections, 3);

        let one = Pi0Estimate::fixed(1.0).unwrap();
        let plain = bh_stepup(&s, 0.05).unwrap();
        let adaptive = adaptive_bh(&s, 0.05, &one).unwrap();
        assert_eq!(plain.rejections, adaptive.rejections);
        assert_eq!(plain.alpha, adaptive.alpha);
    }

    #[test]
    fn qvalue_basics() {
        let s = sample(&[0.2]);
        assert_eq!(qvalues(&s, None), vec![0.2]);

        // Monotone in P order.
        let s = sample(&[0.9, 0.01, 0.3, 0.04]);
        let qs = qvalues(&s, None);
        let mut pairs: Vec<(f64, f64)> = s.values().iter().copied().zip(qs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            assert!(w[0].1 <= w[1].1 + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn qvalue_thresholding_equals_bh(ps in proptest::collection::vec(0.0f64..=1.0, 1..200),
                                         q in 0.01f64..0.99) {
            let s = PValueSample::new(ps).unwrap();
            let bh = bh_stepup(&s, q).unwrap();
            let qs = qvalues(&s, None);
            let via_q: Vec<bool> = qs.iter().map(|&x| x <= q).collect();
            let via_bh: Vec<bool> = if bh.rejections == 0 {
                vec![false; s.len()]
            } else {
                s.values().iter().map(|&p| p <= bh.alpha).collect()
            };
            prop_assert_eq!(via_q, via_bh);
        }

        #[test]
        fn bh_rejections_nondecreasing_in_q(ps in proptest::collection::vec(0.0f64..=1.0, 1..150)) {
            let s = PValueSample::new(ps).unwrap();
            let mut prev = 0;
            for q in [0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8] {
                let r = bh_stepup(&s, q).unwrap().rejections;
                prop_assert!(r >= prev);
                prev = r;
            }
        }

        #[test]
        fn adaptive_bh_no_less_powerful(ps in proptest::collection::vec(0.0f64..=1.0, 2..150),
                                        q in 0.01f64..0.5, pi0v in 0.2f64..0.99) {
            let s = PValueSample::new(ps).unwrap();
            let pi0 = Pi0Estimate::fixed(pi0v).unwrap();
            let plain = bh_stepup(&s, q).unwrap().rejections;
            let adapt = adaptive_bh(&s, q, &pi0).unwrap().rejections;
            prop_assert!(adapt >= plain);
        }
    }

    #[test]
    fn err_exact_examples() {
        // All-null: ERR equals the family-wise error 1 - (1-alpha)^m.
        let nulls: Vec<Marginal> = (0..5).map(|_| Marginal::Null).collect();
        let alpha = 0.1;
        let got = err_exact(&nulls, alpha).unwrap();
        let want = 1.0 - (1.0 - alpha).powi(5);
        assert!((got - want).abs() < 1e-14);

        // Single alternative: pi0 = 0 makes ERR vanish.
        let alt = vec![Marginal::Alt(Box::new(|t: f64| t.sqrt()))];
        assert_eq!(err_exact(&alt, 0.3).unwrap(), 0.0);

        // Hand-computed two-test mixture.
        let mixed = vec![Marginal::Null, Marginal::Alt(Box::new(|t: f64| t.sqrt()))];
        let got = err_exact(&mixed, 0.25).unwrap();
        let want = (0.5 * 0.25 / 0.375) * (1.0 - 0.75 * 0.5);
        assert!((got - want).abs() < 1e-14);
        assert!((got - 5.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn err_exact_monte_carlo_oracle() {
        // The hand value above cross-checked by simulation: P1 uniform,
        // P2 = U^2 so that its cdf is sqrt(t).
        let mut rng = RngStream::new(404, 0);
        let n = 200_000;
        let alpha = 0.25;
        let mut v_sum = 0.0;
        let mut r_sum = 0.0;
        let mut any = 0.0;
        for _ in 0..n {
            let p1 = rng.uniform();
            let p2 = rng.uniform().powi(2);
            let rej1 = p1 <= alpha;
            let rej2 = p2 <= alpha;
            v_sum += rej1 as u8 as f64;
            r_sum += (rej1 as u8 + rej2 as u8) as f64;
            any += (rej1 || rej2) as u8 as f64;
        }
        let mc = (v_sum / r_sum) * (any / n as f64);
        let exact = err_exact(
            &[Marginal::Null, Marginal::Alt(Box::new(|t: f64| t.sqrt()))],
            alpha,
        )
        .unwrap();
        assert!((mc - exact).abs() < 0.01, "mc {mc} vs exact {exact}");
    }

    #[test]
    fn psi_bound_all_null_limit() {
        // pi0 = 1, gamma = 1, beta = eta = 1: the bound is
        // 1 - (1 - alpha0/m)^m, approaching 1 - exp(-alpha0).
        let model = StylizedTailModel::new(1.0, 1.0, 1.0, 1.0, 1.0, 1_000_000).unwrap();
        let psi = psi_bound(&model, 1.0, 0.22).unwrap();
        let limit = 1.0 - (-0.22f64).exp();
        assert!((psi - limit).abs() < 1e-4, "psi {psi} vs limit {limit}");

        let psi1 = psi_bound(&model, 1.0, 1.0).unwrap();
        let limit1 = 1.0 - (-1.0f64).exp();
        assert!((psi1 - limit1).abs() < 1e-4);
        assert!((limit1 - 0.6321).abs() < 1e-4);
    }

    #[test]
    fn psi_bound_decreasing_in_m_with_visible_power() {
        let mut prev = f64::INFINITY;
        for m in [1_000usize, 10_000, 100_000] {
            let model = StylizedTailModel::new(1.0, 1.0, 1.0, 0.5, 0.9, m).unwrap();
            let psi = psi_bound(&model, 2.0, 0.22).unwrap();
            assert!(psi < prev, "psi not decreasing at m={m}: {psi} vs {prev}");
            prev = psi;
        }
    }

    #[test]
    fn orthant_check_independent_uniforms() {
        let mut rng = RngStream::new(808, 0);
        let m = 6;
        let check = orthant_check(|| (0..m).map(|_| rng.uniform()).collect(), 0.1, 50_000).unwrap();
        assert!(check.pass);
        // Both sides near (1 - 0.1)^6.
        let want = 0.9f64.powi(6);
        assert!((check.lhs - want).abs() < 0.01);
        assert!((check.rhs - want).abs() < 0.01);
    }

    #[test]
    fn orthant_check_single_component_trivial() {
        let mut rng = RngStream::new(809, 0);
        let check = orthant_check(|| vec![rng.uniform()], 0.3, 20_000).unwrap();
        assert_eq!(check.lhs, check.rhs);
        assert!(check.pass);
    }
}
