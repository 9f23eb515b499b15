//! Simulation benchmark: a seven-variable gene-pathway generator observed
//! in four groups of three, one-way ANOVA P values, a dependent P-vector
//! generator for the orthant-dependence checks, and the seeded Monte Carlo
//! harness that aggregates FDR/FNDP/ERR performance estimates.

use rayon::prelude::*;

use crate::ecdf::PValueSample;
use crate::error::{Error, Result};
use crate::numeric::{reg_inc_beta, RngStream};
use crate::pi0::{bh_pi0_slope, default_lambda_grid, storey_pi0_bootstrap, DEFAULT_BOOTSTRAP_REPS};
use crate::procedures::{outcome_from_rejections, OutcomeTable};
use crate::thresholds::alpha_hat_cal;

/// Number of observation groups (K).
pub const GROUPS: usize = 4;
/// Observations per group (n_k).
pub const PER_GROUP: usize = 3;
/// Total observations per variable.
pub const OBS: usize = GROUPS * PER_GROUP;

/// Variance of the dedicated noise on the first pathway variable
/// (sigma = 0.28 fixed regardless of the model noise level).
const X1_NOISE_VAR: f64 = 0.0784;

/// Pathway variable ids (1-based) that are always true alternatives.
pub const PATHWAY_IDS: [usize; 6] = [1, 2, 3, 4, 190, 221];

/// A derived alternative variable: target = coeff * source + N(0, sigma^2),
/// with 1-based variable ids and source < target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltRule {
    pub target: usize,
    pub coeff: f64,
    pub source: usize,
}

/// One benchmark scenario: m tested variables of which m1 are true
/// alternatives (the six pathway variables plus the rule targets), with
/// noise level sigma.
#[derive(Debug, Clone)]
pub struct SimModelConfig {
    /// Base model id 1..=10; retained when a scenario is rescaled.
    pub model_id: u8,
    pub m: usize,
    pub m1: usize,
    pub sigma: f64,
    pub alt_rules: Vec<AltRule>,
}

fn block(target_range: std::ops::RangeInclusive<usize>, coeff: f64, source: usize) -> Vec<AltRule> {
    target_range
        .map(|target| AltRule {
            target,
            coeff,
            source,
        })
        .collect()
}

/// The Model 1 rule set: signed copies of the pathway variables covering
/// ids 5..=250, then a doubled echo of ids 1..=250 at 251..=500.
fn model_1_rules() -> Vec<AltRule> {
    let mut rules = Vec::with_capacity(494);
    rules.extend(block(5..=16, 1.0, 1));
    rules.extend(block(17..=25, -1.0, 1));
    rules.extend(block(26..=60, 1.0, 2));
    rules.extend(block(61..=70, -1.0, 2));
    rules.extend(block(71..=100, 1.0, 3));
    rules.extend(block(101..=110, -1.0, 3));
    rules.extend(block(111..=150, 1.0, 4));
    rules.extend(block(151..=189, -1.0, 4));
    rules.extend(block(191..=210, 1.0, 190));
    rules.extend(block(211..=220, -1.0, 190));
    rules.extend(block(222..=250, 1.0, 221));
    for target in 251..=500 {
        rules.push(AltRule {
            target,
            coeff: 2.0,
            source: target - 250,
        });
    }
    rules
}

fn model_5_rules() -> Vec<AltRule> {
    let mut rules = Vec::with_capacity(26);
    rules.extend(block(5..=8, 1.0, 1));
    rules.extend(block(9..=12, 1.0, 2));
    rules.extend(block(13..=16, 1.0, 3));
    rules.extend(block(17..=20, 1.0, 4));
    rules.extend(block(191..=195, 1.0, 190));
    rules.extend(block(222..=226, 1.0, 221));
    rules
}

fn model_9_rules() -> Vec<AltRule> {
    let mut rules = Vec::with_capacity(9);
    rules.extend(block(5..=6, 1.0, 1));
    rules.extend(block(7..=8, 1.0, 2));
    rules.extend(block(9..=10, 1.0, 3));
    rules.extend(block(11..=12, 1.0, 4));
    rules.extend(block(191..=191, 1.0, 190));
    rules
}

impl SimModelConfig {
    /// The ten benchmark scenarios. Odd ids are the high-noise (sigma = 3)
    /// variants, even ids the low-noise (sigma = 1) ones.
    pub fn table3(model_id: u8) -> Result<Self> {
        let (m, m1, sigma, rules) = match model_id {
            1 => (3000, 500, 3.0, model_1_rules()),
            2 => (3000, 500, 1.0, model_1_rules()),
            // Only the first 250 variables stay alternatives: the doubled
            // echo block is dropped and ids 251..=500 become plain nulls.
            3 => (
                3000,
                250,
                3.0,
                model_1_rules()
                    .into_iter()
                    .filter(|r| r.target <= 250)
                    .collect(),
            ),
            4 => (
                3000,
                250,
                1.0,
                model_1_rules()
                    .into_iter()
                    .filter(|r| r.target <= 250)
                    .collect(),
            ),
            5 => (3000, 32, 3.0, model_5_rules()),
            6 => (3000, 32, 1.0, model_5_rules()),
            7 => (3000, 6, 3.0, Vec::new()),
            8 => (3000, 6, 1.0, Vec::new()),
            9 => (10_000, 15, 3.0, model_9_rules()),
            10 => (10_000, 15, 1.0, model_9_rules()),
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown model id {other}; valid ids are 1..=10"
                )))
            }
        };
        let config = SimModelConfig {
            model_id,
            m,
            m1,
            sigma,
            alt_rules: rules,
        };
        config.validate()?;
        Ok(config)
    }

    /// A desk-scale variant of a Table-3 scenario: the six pathway
    /// alternatives are kept, the derived-rule list is truncated to
    /// m1_new - 6 rules in table order, and everything else becomes noise.
    /// Truncating by the same factor as m preserves the true pi0.
    pub fn scaled(model_id: u8, m: usize, m1: usize) -> Result<Self> {
        let base = Self::table3(model_id)?;
        if m1 < PATHWAY_IDS.len() {
            return Err(Error::InvalidInput(format!(
                "m1 must be at least {} (the pathway variables), got {m1}",
                PATHWAY_IDS.len()
            )));
        }
        let keep = m1 - PATHWAY_IDS.len();
        if keep > base.alt_rules.len() {
            return Err(Error::InvalidInput(format!(
                "model {model_id} supports at most m1 = {}",
                base.alt_rules.len() + PATHWAY_IDS.len()
            )));
        }
        let config = SimModelConfig {
            model_id,
            m,
            m1,
            sigma: base.sigma,
            alt_rules: base.alt_rules[..keep].to_vec(),
        };
        config.validate()?;
        Ok(config)
    }

    /// A custom scenario built like `scaled` but with an explicit noise
    /// level.
    pub fn custom(model_id: u8, m: usize, m1: usize, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let mut config = Self::scaled(model_id, m, m1)?;
        config.sigma = sigma;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let max_pathway = PATHWAY_IDS.iter().max().copied().unwrap_or(0);
        if self.m < max_pathway {
            return Err(Error::InvalidInput(format!(
                "m = {} cannot hold the pathway variables (need >= {max_pathway})",
                self.m
            )));
        }
        if self.m1 != self.alt_rules.len() + PATHWAY_IDS.len() {
            return Err(Error::InvalidInput(format!(
                "m1 = {} does not match 6 pathway variables + {} rules",
                self.m1,
                self.alt_rules.len()
            )));
        }
        for rule in &self.alt_rules {
            if rule.target > self.m || rule.source >= rule.target || rule.source == 0 {
                return Err(Error::InvalidInput(format!("invalid rule {rule:?}")));
            }
            if PATHWAY_IDS.contains(&rule.target) {
                return Err(Error::InvalidInput(format!(
                    "rule target {} collides with a pathway variable",
                    rule.target
                )));
            }
        }
        Ok(())
    }

    /// True null proportion 1 - m1/m.
    pub fn pi0_true(&self) -> f64 {
        1.0 - self.m1 as f64 / self.m as f64
    }

    /// Truth vector: theta_i = 1 for the pathway ids and rule targets.
    pub fn truth(&self) -> Vec<bool> {
        let mut truth = vec![false; self.m];
        for &id in &PATHWAY_IDS {
            truth[id - 1] = true;
        }
        for rule in &self.alt_rules {
            truth[rule.target - 1] = true;
        }
        truth
    }
}

/// One simulated dataset: m variables by 12 observations (groups of three),
/// plus the truth vector.
pub struct SimDataset {
    pub data: Vec<[f64; OBS]>,
    pub truth: Vec<bool>,
}

/// Generate one dataset from the pathway model. The latent X0 drives the
/// seven pathway variables per the fixed linear relations; rule targets are
/// signed/scaled copies of earlier variables plus noise; all remaining
/// variables are i.i.d. N(0, sigma^2). The latent variable itself is not
/// part of the tested set.
pub fn gen_pathway_dataset(config: &SimModelConfig, stream: &mut RngStream) -> Result<SimDataset> {
    let sigma = config.sigma;
    let m = config.m;

    // obs index = group k * PER_GROUP + j
    let mut x0 = [0.0; OBS];
    for k in 0..GROUPS {
        let mean = if k == 0 { 0.0 } else { 8.0 };
        for j in 0..PER_GROUP {
            x0[k * PER_GROUP + j] = stream.normal(mean, sigma)?;
        }
    }

    let mut data = vec![[0.0f64; OBS]; m];
    let x1_sigma = X1_NOISE_VAR.sqrt();
    for (idx, x) in x0.iter().enumerate() {
        data[0][idx] = x / 4.0 + stream.normal(0.0, x1_sigma)?;
    }
    // X2: group offsets (0, 0, +6, +14) on top of X0.
    for k in 0..GROUPS {
        let offset = [0.0, 0.0, 6.0, 14.0][k];
        for j in 0..PER_GROUP {
            let idx = k * PER_GROUP + j;
            data[1][idx] = x0[idx] + offset + stream.normal(0.0, sigma)?;
        }
    }
    // X3 follows X2 in every group.
    let x2 = data[1];
    for (idx, x) in x2.iter().enumerate() {
        data[2][idx] = x + stream.normal(0.0, sigma)?;
    }
    // X4: offsets (0, 0, -6, -8) on top of X2.
    for k in 0..GROUPS {
        let offset = [0.0, 0.0, -6.0, -8.0][k];
        for j in 0..PER_GROUP {
            let idx = k * PER_GROUP + j;
            data[3][idx] = data[1][idx] + offset + stream.normal(0.0, sigma)?;
        }
    }
    // X190: group-specific combinations of X3 and X4.
    for k in 0..GROUPS {
        for j in 0..PER_GROUP {
            let idx = k * PER_GROUP + j;
            let x3 = data[2][idx];
            let x4 = data[3][idx];
            let base = match k {
                0 => x3 + 24.0,
                1 => x3 + x4,
                2 => x3 - x4 - 6.0,
                _ => x3 - 14.0,
            };
            data[189][idx] = base + stream.normal(0.0, sigma)?;
        }
    }
    // X221: group-specific combinations of X3 and X4.
    for k in 0..GROUPS {
        for j in 0..PER_GROUP {
            let idx = k * PER_GROUP + j;
            let x3 = data[2][idx];
            let x4 = data[3][idx];
            let base = match k {
                0 | 1 => x3 + 24.0,
                2 => x3 - x4,
                _ => x3 + 2.0,
            };
            data[220][idx] = base + stream.normal(0.0, sigma)?;
        }
    }

    let mut rule_for = vec![None; m + 1];
    for rule in &config.alt_rules {
        rule_for[rule.target] = Some((rule.coeff, rule.source));
    }

    // Remaining variables in index order so the draw sequence is fixed.
    for id in 1..=m {
        if PATHWAY_IDS.contains(&id) {
            continue;
        }
        match rule_for[id] {
            Some((coeff, source)) => {
                let source_row = data[source - 1];
                for (idx, x) in source_row.iter().enumerate() {
                    data[id - 1][idx] = coeff * x + stream.normal(0.0, sigma)?;
                }
            }
            None => {
                for slot in data[id - 1].iter_mut() {
                    *slot = stream.normal(0.0, sigma)?;
                }
            }
        }
    }

    Ok(SimDataset {
        data,
        truth: config.truth(),
    })
}

/// One-way ANOVA F-test P value: P = Pr(F_{K-1, N-K} > f) via the
/// regularized incomplete beta function. Groups with no within-group
/// variation give P = 1 when the group means agree (F = 0 convention) and
/// P = 0 when they differ.
pub fn anova_f_pvalue(groups: &[&[f64]]) -> Result<f64> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::InvalidInput(
            "ANOVA needs at least two groups".into(),
        ));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::InvalidInput("empty ANOVA group".into()));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "need more observations ({n}) than groups ({k})"
        )));
    }

    let grand: f64 = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let mean: f64 = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand) * (mean - grand);
        ss_within += g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    }

    if ss_within == 0.0 {
        return Ok(if ss_between > 0.0 { 0.0 } else { 1.0 });
    }

    let d1 = (k - 1) as f64;
    let d2 = (n - k) as f64;
    let f = (ss_between / d1) / (ss_within / d2);
    // Survival function of the F distribution.
    reg_inc_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0)
}

/// P values for every variable of a dataset (each row split into the four
/// groups of three).
pub fn dataset_pvalues(dataset: &SimDataset) -> Result<PValueSample> {
    let mut pvalues = Vec::with_capacity(dataset.data.len());
    for row in &dataset.data {
        let groups: Vec<&[f64]> = row.chunks(PER_GROUP).collect();
        pvalues.push(anova_f_pvalue(&groups)?);
    }
    PValueSample::new(pvalues)
}

/// Dependent P-vector generator: P_j = P0^{X_j} with P0 drawn by `draw_p0`
/// and the exponents X_j >= 0 i.i.d. from `draw_x`, independent of P0.
/// Exponentiating a shared uniform base mimics a jointly activated pathway
/// and yields positive orthant dependence.
pub fn orthant_generator<P, X>(
    card: usize,
    mut draw_p0: P,
    mut draw_x: X,
    stream: &mut RngStream,
) -> Result<Vec<f64>>
where
    P: FnMut(&mut RngStream) -> f64,
    X: FnMut(&mut RngStream) -> f64,
{
    if card == 0 {
        return Err(Error::InvalidInput("card must be >= 1".into()));
    }
    let p0 = draw_p0(stream);
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::domain(
            "orthant_generator",
            format!("P0 draw {p0} outside [0,1]"),
        ));
    }
    (0..card)
        .map(|_| {
            let x = draw_x(stream);
            if x < 0.0 || !x.is_finite() {
                return Err(Error::domain(
                    "orthant_generator",
                    format!("exponent draw {x} outside [0,inf)"),
                ));
            }
            Ok(p0.powf(x))
        })
        .collect()
}

/// A rejection procedure the Monte Carlo harness can apply per replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McMethod {
    /// BH step-up at level q.
    Bh {
        q: f64,
    },
    /// Adaptive BH at level q with the slope estimator plugged in.
    AdaptiveBh {
        q: f64,
    },
    /// q-value thresholding at level q with the bootstrap Storey estimator.
    QValue {
        q: f64,
    },
    /// Hard thresholding at the calibrated adaptive threshold.
    Api {
        alpha0: f64,
    },
    /// Degenerate reference procedures.
    RejectAll,
    RejectNone,
}

impl McMethod {
    pub fn label(&self) -> String {
        match self {
            McMethod::Bh { q } => format!("bh:{q}"),
            McMethod::AdaptiveBh { q } => format!("abh:{q}"),
            McMethod::QValue { q } => format!("qvalue:{q}"),
            McMethod::Api { alpha0 } => format!("api:{alpha0}"),
            McMethod::RejectAll => "reject-all".into(),
            McMethod::RejectNone => "reject-none".into(),
        }
    }

    /// The control level the method runs at (alpha0 for API), for curve
    /// output.
    pub fn level(&self) -> f64 {
        match self {
            McMethod::Bh { q } | McMethod::AdaptiveBh { q } | McMethod::QValue { q } => *q,
            McMethod::Api { alpha0 } => *alpha0,
            McMethod::RejectAll => 1.0,
            McMethod::RejectNone => 0.0,
        }
    }

    /// Apply the procedure to one replicate's P values. Methods with inner
    /// randomness (the bootstrap) consume the replicate stream, keeping the
    /// replicate fully reproducible.
    pub fn apply(&self, sample: &PValueSample, stream: &mut RngStream) -> Result<Vec<bool>> {
        match self {
            McMethod::Bh { q } => {
                let res = crate::procedures::bh_stepup(sample, *q)?;
                Ok(reject_smallest(sample, res.rejections, res.alpha))
            }
            McMethod::AdaptiveBh { q } => {
                let pi0 = bh_pi0_slope(sample)?;
                let res = crate::procedures::adaptive_bh(sample, *q, &pi0)?;
                Ok(reject_smallest(sample, res.rejections, res.alpha))
            }
            McMethod::QValue { q } => {
                let grid = default_lambda_grid();
                let pi0 = storey_pi0_bootstrap(sample, &grid, DEFAULT_BOOTSTRAP_REPS, stream)?;
                let qs = crate::procedures::qvalues(sample, Some(&pi0));
                Ok(qs.iter().map(|&x| x <= *q).collect())
            }
            McMethod::Api { alpha0 } => {
                let res = alpha_hat_cal(sample, *alpha0)?;
                Ok(sample.values().iter().map(|&p| p <= res.alpha).collect())
            }
            McMethod::RejectAll => Ok(vec![true; sample.len()]),
            McMethod::RejectNone => Ok(vec![false; sample.len()]),
        }
    }
}

fn reject_smallest(sample: &PValueSample, count: usize, threshold: f64) -> Vec<bool> {
    if count == 0 {
        vec![false; sample.len()]
    } else {
        sample.values().iter().map(|&p| p <= threshold).collect()
    }
}

/// Monte Carlo summary over replicates: the FDR and FNDP estimators
/// averaged per replicate, plus the ratio-of-means ERR estimates.
#[derive(Debug, Clone)]
pub struct MCReport {
    pub fdr_hat: f64,
    pub fndp_hat: f64,
    pub err_hat: f64,
    pub perr_hat: f64,
    pub reps: usize,
    pub seed: u64,
    pub per_rep: Vec<OutcomeTable>,
}

impl MCReport {
    fn from_outcomes(per_rep: Vec<OutcomeTable>, seed: u64) -> Self {
        let reps = per_rep.len();
        let n = reps as f64;
        let mut fdr = 0.0;
        let mut fndp = 0.0;
        let mut v_sum = 0.0;
        let mut r_sum = 0.0;
        let mut any_rejection = 0.0;
        for t in &per_rep {
            if t.r > 0 {
                fdr += (t.r - t.s) as f64 / t.r as f64;
                any_rejection += 1.0;
            }
            if t.m1 > 0 {
                fndp += (t.m1 - t.s) as f64 / t.m1 as f64;
            }
            v_sum += t.v as f64;
            r_sum += t.r as f64;
        }
        let (err_hat, perr_hat) = if r_sum > 0.0 {
            let perr = v_sum / r_sum;
            (perr * (any_rejection / n), perr)
        } else {
            (0.0, 0.0)
        };
        MCReport {
            fdr_hat: fdr / n,
            fndp_hat: fndp / n,
            err_hat,
            perr_hat,
            reps,
            seed,
            per_rep,
        }
    }
}

/// Run `reps` independent replicates of a scenario under one rejection
/// procedure. Replicate r draws from stream id r of the given seed, so
/// reports are reproducible bit-for-bit regardless of thread scheduling.
pub fn mc_harness(
    config: &SimModelConfig,
    method: &McMethod,
    reps: usize,
    seed: u64,
) -> Result<MCReport> {
    if reps == 0 {
        return Err(Error::InvalidInput("reps must be >= 1".into()));
    }
    let per_rep: Vec<OutcomeTable> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<OutcomeTable> {
            let mut stream = RngStream::new(seed, rep as u64);
            let dataset = gen_pathway_dataset(config, &mut stream)?;
            let sample = dataset_pvalues(&dataset)?;
            let rejections = method.apply(&sample, &mut stream)?;
            outcome_from_rejections(&rejections, &dataset.truth)
        })
        .collect::<Result<_>>()?;
    Ok(MCReport::from_outcomes(per_rep, seed))
}
