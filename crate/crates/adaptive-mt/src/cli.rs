//! Batch front door: P-value file parsing, analysis reports, simulation
//! runs, and estimator comparisons, all writing plain-text and TSV outputs.
//! The `adaptive-mt` binary is a thin argument parser over these functions.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::backbone::pi0_backbone;
use crate::ecdf::PValueSample;
use crate::error::{Error, Result};
use crate::numeric::RngStream;
use crate::pi0::{
    bh_pi0_slope, default_lambda_grid, storey_pi0, storey_pi0_bootstrap, Pi0Estimate, Pi0Method,
    DEFAULT_BOOTSTRAP_REPS,
};
use crate::procedures::{adaptive_bh, bh_stepup, qvalues};
use crate::simkit::{
    dataset_pvalues, gen_pathway_dataset, mc_harness, MCReport, McMethod, SimModelConfig,
};
use crate::thresholds::{alpha0_from_target, alpha_hat_cal, ThresholdResult, DEFAULT_ALPHA0};

/// The nine control levels used by the benchmark figures.
pub const DEFAULT_Q_LEVELS: [f64; 9] = [0.01, 0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.60, 0.70];

/// Default Storey lambda for the fixed-lambda estimate in reports.
pub const DEFAULT_STOREY_LAMBDA: f64 = 0.5;

/// Read a P-value file: one value per line, `#` comments allowed, and a
/// single-column CSV header on the first line is skipped automatically.
/// Parse failures and out-of-range values name the offending line.
pub fn read_pvalue_file(path: &Path) -> Result<PValueSample> {
    let content = fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut saw_first_token = false;
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let token = line.trim_end_matches(',').trim();
        match token.parse::<f64>() {
            Ok(v) => {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: idx + 1,
                        detail: format!("P value {v} outside [0,1]"),
                    });
                }
                values.push(v);
                saw_first_token = true;
            }
            Err(_) => {
                if !saw_first_token {
                    // single-column CSV header
                    saw_first_token = true;
                    continue;
                }
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    detail: format!("cannot parse {token:?} as a P value"),
                });
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            detail: "no P values found".into(),
        });
    }
    PValueSample::new(values)
}

/// Write `key = value` pairs; [`read_kv`] restores them exactly (floats are
/// printed in shortest round-trip form).
pub fn write_kv(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in pairs {
        writeln!(out, "{k} = {v}").expect("string write");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a `key = value` file written by [`write_kv`]; `#` comments allowed.
pub fn read_kv(path: &Path) -> Result<Vec<(String, String)>> {
    let content = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                detail: "expected `key = value`".into(),
            });
        };
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Options for [`cmd_analyze`].
#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub alpha0: f64,
    /// When set, alpha0 is derived as -log(1 - alpha1).
    pub target_alpha1: Option<f64>,
    pub q_levels: Vec<f64>,
    pub pi0_methods: Vec<Pi0Method>,
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            alpha0: DEFAULT_ALPHA0,
            target_alpha1: None,
            q_levels: DEFAULT_Q_LEVELS.to_vec(),
            pi0_methods: vec![
                Pi0Method::Backbone,
                Pi0Method::StoreyLambda,
                Pi0Method::StoreyBootstrap,
                Pi0Method::BhSlope,
            ],
            seed: 1,
        }
    }
}

/// Everything `analyze` computes for one P-value file.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub m: usize,
    pub alpha0: f64,
    pub target_alpha1: Option<f64>,
    pub pi0_estimates: Vec<Pi0Estimate>,
    pub api: ThresholdResult,
    /// Per requested q level: the BH and adaptive-BH results.
    pub stepup: Vec<(f64, ThresholdResult, ThresholdResult)>,
    pub tau_hat: f64,
    pub gamma_hat: f64,
    pub guard_fired: bool,
    pub qvalues_path: PathBuf,
}

/// Analyze a P-value file and write `report.txt`, `report.kv`, and
/// `qvalues.tsv` into `out_dir`.
pub fn cmd_analyze(input: &Path, opts: &AnalyzeOptions, out_dir: &Path) -> Result<AnalysisReport> {
    let sample = read_pvalue_file(input)?;
    fs::create_dir_all(out_dir)?;

    let alpha0 = match opts.target_alpha1 {
        Some(alpha1) => alpha0_from_target(alpha1)?,
        None => opts.alpha0,
    };

    let backbone_est = pi0_backbone(&sample)?;
    let diag = backbone_est
        .backbone
        .as_ref()
        .expect("backbone diagnostics")
        .clone();

    let mut pi0_estimates = Vec::new();
    for method in &opts.pi0_methods {
        let est = match method {
            Pi0Method::Backbone => backbone_est.clone(),
            Pi0Method::StoreyLambda => storey_pi0(&sample, DEFAULT_STOREY_LAMBDA)?,
            Pi0Method::StoreyBootstrap => {
                let mut stream = RngStream::new(opts.seed, 0);
                storey_pi0_bootstrap(
                    &sample,
                    &default_lambda_grid(),
                    DEFAULT_BOOTSTRAP_REPS,
                    &mut stream,
                )?
            }
            Pi0Method::BhSlope => bh_pi0_slope(&sample)?,
        };
        pi0_estimates.push(est);
    }

    let api = alpha_hat_cal(&sample, alpha0)?;
    let slope_est = bh_pi0_slope(&sample)?;
    let mut stepup = Vec::new();
    for &q in &opts.q_levels {
        let bh = bh_stepup(&sample, q)?;
        let abh = adaptive_bh(&sample, q, &slope_est)?;
        stepup.push((q, bh, abh));
    }

    let qs = qvalues(&sample, None);
    let qvalues_path = out_dir.join("qvalues.tsv");
    let mut tsv = String::from("index\tp_value\tq_value\n");
    for (i, (&p, &q)) in sample.values().iter().zip(&qs).enumerate() {
        writeln!(tsv, "{i}\t{p}\t{q}").expect("string write");
    }
    fs::write(&qvalues_path, tsv)?;

    let report = AnalysisReport {
        m: sample.len(),
        alpha0,
        target_alpha1: opts.target_alpha1,
        pi0_estimates,
        api,
        stepup,
        tau_hat: diag.tau,
        gamma_hat: diag.gamma,
        guard_fired: backbone_est.flagged,
        qvalues_path,
    };
    write_kv(&out_dir.join("report.kv"), &report.to_kv())?;
    fs::write(out_dir.join("report.txt"), report.render_text())?;
    Ok(report)
}

impl AnalysisReport {
    /// Machine-readable key/value pairs; all floats round-trip exactly.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = vec![
            ("m".into(), self.m.to_string()),
            ("alpha0".into(), self.alpha0.to_string()),
        ];
        if let Some(a1) = self.target_alpha1 {
            kv.push(("target_alpha1".into(), a1.to_string()));
        }
        kv.push(("tau_hat".into(), self.tau_hat.to_string()));
        kv.push(("gamma_hat".into(), self.gamma_hat.to_string()));
        kv.push(("guard_fired".into(), self.guard_fired.to_string()));
        for est in &self.pi0_estimates {
            let label = est.method.label();
            kv.push((format!("pi0.{label}"), est.value.to_string()));
            kv.push((format!("pi0.{label}.flagged"), est.flagged.to_string()));
            if let Some(lambda) = est.lambda {
                kv.push((format!("pi0.{label}.lambda"), lambda.to_string()));
            }
        }
        kv.push(("threshold.api.alpha".into(), self.api.alpha.to_string()));
        kv.push((
            "threshold.api.rejections".into(),
            self.api.rejections.to_string(),
        ));
        kv.push((
            "threshold.api.pi0_used".into(),
            self.api.pi0_used.to_string(),
        ));
        kv.push((
            "threshold.api.gamma_used".into(),
            self.api.gamma_used.to_string(),
        ));
        for (q, bh, abh) in &self.stepup {
            kv.push((format!("threshold.bh.{q}.alpha"), bh.alpha.to_string()));
            kv.push((
                format!("threshold.bh.{q}.rejections"),
                bh.rejections.to_string(),
            ));
            kv.push((format!("threshold.abh.{q}.alpha"), abh.alpha.to_string()));
            kv.push((
                format!("threshold.abh.{q}.rejections"),
                abh.rejections.to_string(),
            ));
        }
        kv.push((
            "qvalues_path".into(),
            self.qvalues_path.display().to_string(),
        ));
        kv
    }

    /// Human-readable report.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "P-value analysis ({} tests)", self.m);
        let _ = writeln!(out, "alpha0 = {:.6}", self.alpha0);
        if let Some(a1) = self.target_alpha1 {
            let _ = writeln!(out, "  (derived from target alpha1 = {a1})");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "Null-proportion estimates");
        for est in &self.pi0_estimates {
            let flag = if est.flagged { "  [flagged]" } else { "" };
            let _ = writeln!(out, "  {:<12} {:.6}{flag}", est.method.label(), est.value);
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Backbone diagnostics: tau = {:.6}, gamma = {:.6}, near-uniform guard: {}",
            self.tau_hat, self.gamma_hat, self.guard_fired
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "Adaptive threshold (API): alpha = {:.6e}, rejections = {}",
            self.api.alpha, self.api.rejections
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>6} {:>14} {:>6} {:>14} {:>6}",
            "q", "BH alpha", "rej", "aBH alpha", "rej"
        );
        for (q, bh, abh) in &self.stepup {
            let _ = writeln!(
                out,
                "{:>6} {:>14.6e} {:>6} {:>14.6e} {:>6}",
                q, bh.alpha, bh.rejections, abh.alpha, abh.rejections
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "q-values: {}", self.qvalues_path.display());
        out
    }
}

/// Options for [`cmd_simulate`].
#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<McMethod>,
}

/// Run the Monte Carlo harness for each method, writing one report per
/// method plus a `curves.tsv` of (method, level, FDR, FNDP) rows.
pub fn cmd_simulate(
    config: &SimModelConfig,
    opts: &SimulateOptions,
    out_dir: &Path,
) -> Result<Vec<(McMethod, MCReport)>> {
    if opts.reps == 0 {
        return Err(Error::InvalidInput("reps must be >= 1".into()));
    }
    if opts.methods.is_empty() {
        return Err(Error::InvalidInput("no methods requested".into()));
    }
    fs::create_dir_all(out_dir)?;

    let mut results = Vec::new();
    for method in &opts.methods {
        let report = mc_harness(config, method, opts.reps, opts.seed)?;
        let name = method.label().replace(':', "_");
        write_kv(
            &out_dir.join(format!("mc_{name}.kv")),
            &mc_report_kv(config, method, &report),
        )?;
        results.push((*method, report));
    }

    let mut tsv = String::from("method\tlevel\tfdr_hat\tfndp_hat\n");
    for (method, report) in &results {
        writeln!(
            tsv,
            "{}\t{}\t{}\t{}",
            method.label(),
            method.level(),
            report.fdr_hat,
            report.fndp_hat
        )
        .expect("string write");
    }
    fs::write(out_dir.join("curves.tsv"), tsv)?;
    Ok(results)
}

fn mc_report_kv(
    config: &SimModelConfig,
    method: &McMethod,
    report: &MCReport,
) -> Vec<(String, String)> {
    vec![
        ("model".into(), config.model_id.to_string()),
        ("m".into(), config.m.to_string()),
        ("m1".into(), config.m1.to_string()),
        ("sigma".into(), config.sigma.to_string()),
        ("pi0_true".into(), config.pi0_true().to_string()),
        ("method".into(), method.label()),
        ("reps".into(), report.reps.to_string()),
        ("seed".into(), report.seed.to_string()),
        ("fdr_hat".into(), report.fdr_hat.to_string()),
        ("fndp_hat".into(), report.fndp_hat.to_string()),
        ("err_hat".into(), report.err_hat.to_string()),
        ("perr_hat".into(), report.perr_hat.to_string()),
    ]
}

/// Options for [`cmd_compare_pi0`].
#[derive(Debug, Clone)]
pub struct ComparePi0Options {
    pub reps: usize,
    pub seed: u64,
}

/// Accuracy of one estimator on one model.
#[derive(Debug, Clone)]
pub struct Pi0ComparisonRow {
    pub model_id: u8,
    pub estimator: Pi0Method,
    pub pi0_true: f64,
    pub root_mse: f64,
    pub bias: f64,
}

/// Root-MSE and bias of the backbone, bootstrap-Storey, and BH-slope
/// estimators against the true null proportion of each scenario. Writes
/// `pi0_compare.tsv`.
pub fn cmd_compare_pi0(
    configs: &[SimModelConfig],
    opts: &ComparePi0Options,
    out_dir: &Path,
) -> Result<Vec<Pi0ComparisonRow>> {
    use rayon::prelude::*;

    if opts.reps == 0 {
        return Err(Error::InvalidInput("reps must be >= 1".into()));
    }
    if configs.is_empty() {
        return Err(Error::InvalidInput("no models requested".into()));
    }
    fs::create_dir_all(out_dir)?;

    let estimators = [
        Pi0Method::Backbone,
        Pi0Method::StoreyBootstrap,
        Pi0Method::BhSlope,
    ];
    let mut rows = Vec::new();
    for config in configs {
        let truth = config.pi0_true();
        // One (sum of squared errors, sum of errors) accumulator per
        // estimator, reduced over replicates.
        let acc: Vec<(f64, f64)> = (0..opts.reps)
            .into_par_iter()
            .map(|rep| -> Result<Vec<(f64, f64)>> {
                let mut stream = RngStream::new(opts.seed, rep as u64);
                let dataset = gen_pathway_dataset(config, &mut stream)?;
                let sample = dataset_pvalues(&dataset)?;
                let mut out = Vec::with_capacity(estimators.len());
                for est in &estimators {
                    let value = match est {
                        Pi0Method::Backbone => pi0_backbone(&sample)?.value,
                        Pi0Method::StoreyBootstrap => {
                            storey_pi0_bootstrap(
                                &sample,
                                &default_lambda_grid(),
                                DEFAULT_BOOTSTRAP_REPS,
                                &mut stream,
                            )?
                            .value
                        }
                        Pi0Method::BhSlope => bh_pi0_slope(&sample)?.value,
                        Pi0Method::StoreyLambda => unreachable!(),
                    };
                    let err = value - truth;
                    out.push((err * err, err));
                }
                Ok(out)
            })
            .try_reduce(
                || vec![(0.0, 0.0); estimators.len()],
                |mut a, b| {
                    for (slot, item) in a.iter_mut().zip(b) {
                        slot.0 += item.0;
                        slot.1 += item.1;
                    }
                    Ok(a)
                },
            )?;

        for (est, (sq, sum)) in estimators.iter().zip(acc) {
            rows.push(Pi0ComparisonRow {
                model_id: config.model_id,
                estimator: *est,
                pi0_true: truth,
                root_mse: (sq / opts.reps as f64).sqrt(),
                bias: sum / opts.reps as f64,
            });
        }
    }

    let mut tsv = String::from("model\testimator\tpi0_true\troot_mse\tbias\n");
    for row in &rows {
        writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}",
            row.model_id,
            row.estimator.label(),
            row.pi0_true,
            row.root_mse,
            row.bias
        )
        .expect("string write");
    }
    fs::write(out_dir.join("pi0_compare.tsv"), tsv)?;
    Ok(rows)
}

/// Parse a simulation scenario file: `key = value` lines with keys
/// `base_model`, `m`, `m1`, and optional `sigma`.
pub fn read_sim_config(path: &Path) -> Result<SimModelConfig> {
    let pairs = read_kv(path)?;
    let mut base_model = None;
    let mut m = None;
    let mut m1 = None;
    let mut sigma = None;
    for (k, v) in &pairs {
        let parse_err = |detail: String| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            detail,
        };
        match k.as_str() {
            "base_model" => {
                base_model = Some(
                    v.parse::<u8>()
                        .map_err(|e| parse_err(format!("base_model: {e}")))?,
                )
            }
            "m" => {
                m = Some(
                    v.parse::<usize>()
                        .map_err(|e| parse_err(format!("m: {e}")))?,
                )
            }
            "m1" => {
                m1 = Some(
                    v.parse::<usize>()
                        .map_err(|e| parse_err(format!("m1: {e}")))?,
                )
            }
            "sigma" => {
                sigma = Some(
                    v.parse::<f64>()
                        .map_err(|e| parse_err(format!("sigma: {e}")))?,
                )
            }
            other => {
                return Err(parse_err(format!("unknown config key {other:?}")));
            }
        }
    }
    let base_model =
        base_model.ok_or_else(|| Error::InvalidInput("config missing base_model".into()))?;
    match (m, m1) {
        (Some(m), Some(m1)) => match sigma {
            Some(s) => SimModelConfig::custom(base_model, m, m1, s),
            None => SimModelConfig::scaled(base_model, m, m1),
        },
        (None, None) if sigma.is_none() => SimModelConfig::table3(base_model),
        _ => Err(Error::InvalidInput(
            "config must set both m and m1 (or neither)".into(),
        )),
    }
}

/// Parse a methods list such as `api,bh:0.05,abh:0.01..0.7`. A `lo..hi`
/// range expands to the nine benchmark levels restricted to [lo, hi]; `api`
/// takes its level from `alpha0`.
pub fn parse_methods(spec: &str, alpha0: f64) -> Result<Vec<McMethod>> {
    let mut methods = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (name, levels) = match item.split_once(':') {
            None => (item, None),
            Some((name, range)) => {
                let levels = match range.split_once("..") {
                    Some((lo, hi)) => {
                        let lo: f64 = lo.parse().map_err(|_| {
                            Error::InvalidInput(format!("bad level range in {item:?}"))
                        })?;
                        let hi: f64 = hi.parse().map_err(|_| {
                            Error::InvalidInput(format!("bad level range in {item:?}"))
                        })?;
                        DEFAULT_Q_LEVELS
                            .iter()
                            .copied()
                            .filter(|&q| q >= lo - 1e-12 && q <= hi + 1e-12)
                            .collect()
                    }
                    None => vec![range
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad level in {item:?}")))?],
                };
                (name, Some(levels))
            }
        };
        match (name, levels) {
            ("api", None) => methods.push(McMethod::Api { alpha0 }),
            ("api", Some(ls)) => {
                for l in ls {
                    methods.push(McMethod::Api { alpha0: l });
                }
            }
            ("bh", Some(ls)) => {
                for q in ls {
                    methods.push(McMethod::Bh { q });
                }
            }
            ("abh", Some(ls)) => {
                for q in ls {
                    methods.push(McMethod::AdaptiveBh { q });
                }
            }
            ("qvalue", Some(ls)) => {
                for q in ls {
                    methods.push(McMethod::QValue { q });
                }
            }
            ("reject-all", None) => methods.push(McMethod::RejectAll),
            ("reject-none", None) => methods.push(McMethod::RejectNone),
            (other, _) => {
                return Err(Error::InvalidInput(format!(
                    "unknown method {other:?}; expected api, bh:<q>, abh:<q>, or qvalue:<q>"
                )))
            }
        }
    }
    if methods.is_empty() {
        return Err(Error::InvalidInput("no methods requested".into()));
    }
    Ok(methods)
}

/// Parse `1,2,7` into model configs.
pub fn parse_models(spec: &str) -> Result<Vec<SimModelConfig>> {
    spec.split(',')
        .map(|s| {
            let id = s.trim().parse::<u8>().map_err(|_| {
                Error::InvalidInput(format!("bad model id {s:?}; valid ids are 1..=10"))
            })?;
            SimModelConfig::table3(id)
        })
        .collect()
}

/// Parse comma-separated q levels.
pub fn parse_q_levels(spec: &str) -> Result<Vec<f64>> {
    let levels: Vec<f64> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad q level {s:?}")))
        })
        .collect::<Result<_>>()?;
    for &q in &levels {
        if !(0.0..1.0).contains(&q) || q == 0.0 {
            return Err(Error::InvalidInput(format!("q level {q} outside (0,1)")));
        }
    }
    Ok(levels)
}

/// Parse the pi0-method selector: a comma list of
/// backbone|storey|storey-boot|bh-slope, or `all`.
pub fn parse_pi0_methods(spec: &str) -> Result<Vec<Pi0Method>> {
    if spec.trim() == "all" {
        return Ok(vec![
            Pi0Method::Backbone,
            Pi0Method::StoreyLambda,
            Pi0Method::StoreyBootstrap,
            Pi0Method::BhSlope,
        ]);
    }
    spec.split(',')
        .map(|s| match s.trim() {
            "backbone" => Ok(Pi0Method::Backbone),
            "storey" => Ok(Pi0Method::StoreyLambda),
            "storey-boot" => Ok(Pi0Method::StoreyBootstrap),
            "bh-slope" => Ok(Pi0Method::BhSlope),
            other => Err(Error::InvalidInput(format!("unknown pi0 method {other:?}"))),
        })
        .collect()
}
