use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use adaptive_mt::cli::{
    cmd_analyze, cmd_compare_pi0, cmd_simulate, parse_methods, parse_models, parse_pi0_methods,
    parse_q_levels, read_sim_config, AnalyzeOptions, ComparePi0Options, SimulateOptions,
};
use adaptive_mt::error::Error;
use adaptive_mt::simkit::SimModelConfig;
use adaptive_mt::thresholds::DEFAULT_ALPHA0;

/// Multiple hypothesis testing: adaptive thresholds, null-proportion
/// estimation, FDR procedures, and simulation benchmarks.
#[derive(Parser)]
#[command(name = "adaptive-mt", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a file of P values (one per line, '#' comments allowed).
    Analyze {
        /// Input P-value file.
        #[arg(long)]
        input: PathBuf,
        /// Calibration level alpha0.
        #[arg(long, default_value_t = DEFAULT_ALPHA0)]
        alpha0: f64,
        /// Derive alpha0 from a target error bound: alpha0 = -log(1-alpha1).
        #[arg(long, conflicts_with = "alpha0")]
        target_alpha1: Option<f64>,
        /// Comma-separated FDR control levels (default: the nine benchmark
        /// levels).
        #[arg(long)]
        q_levels: Option<String>,
        /// Null-proportion estimators to report:
        /// backbone|storey|storey-boot|bh-slope or `all`.
        #[arg(long, default_value = "all")]
        pi0_method: String,
        /// Seed for the bootstrap estimator.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "analysis-out")]
        out_dir: PathBuf,
    },
    /// Run a Monte Carlo benchmark scenario.
    Simulate {
        /// Benchmark model id (1..=10).
        #[arg(long, conflicts_with = "config")]
        model: Option<u8>,
        /// Custom scenario file (base_model/m/m1/sigma key-value lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Monte Carlo replicates (the benchmark figures used 1000).
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Methods list, e.g. `api,bh:0.01..0.7,abh:0.05,qvalue:0.1`.
        #[arg(long, default_value = "api,bh:0.01..0.7,abh:0.01..0.7")]
        methods: String,
        /// Calibration level used by the `api` method.
        #[arg(long, default_value_t = DEFAULT_ALPHA0)]
        alpha0: f64,
        #[arg(long, default_value = "simulate-out")]
        out_dir: PathBuf,
    },
    /// Compare null-proportion estimators on benchmark models.
    ComparePi0 {
        /// Comma-separated model ids, e.g. `1,2,5`.
        #[arg(long)]
        models: String,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "pi0-out")]
        out_dir: PathBuf,
    },
}

fn configure_threads() {
    if let Ok(spec) = std::env::var("ADAPTIVE_MT_THREADS") {
        match spec.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring invalid ADAPTIVE_MT_THREADS={spec:?}"),
        }
    }
}

fn run() -> Result<(), Error> {
    let args = Args::parse();
    configure_threads();
    match args.command {
        Command::Analyze {
            input,
            alpha0,
            target_alpha1,
            q_levels,
            pi0_method,
            seed,
            out_dir,
        } => {
            let opts = AnalyzeOptions {
                alpha0,
                target_alpha1,
                q_levels: match q_levels {
                    Some(spec) => parse_q_levels(&spec)?,
                    None => AnalyzeOptions::default().q_levels,
                },
                pi0_methods: parse_pi0_methods(&pi0_method)?,
                seed,
            };
            let report = cmd_analyze(&input, &opts, &out_dir)?;
            print!("{}", report.render_text());
            println!("report written to {}", out_dir.display());
        }
        Command::Simulate {
            model,
            config,
            reps,
            seed,
            methods,
            alpha0,
            out_dir,
        } => {
            let config = match (model, config) {
                (Some(id), None) => SimModelConfig::table3(id)?,
                (None, Some(path)) => read_sim_config(&path)?,
                (None, None) => {
                    return Err(Error::InvalidInput(
                        "pass --model <1..=10> or --config <file>".into(),
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let opts = SimulateOptions {
                reps,
                seed,
                methods: parse_methods(&methods, alpha0)?,
            };
            let results = cmd_simulate(&config, &opts, &out_dir)?;
            println!(
                "model {} (m={}, m1={}, sigma={}), {} reps, seed {}",
                config.model_id, config.m, config.m1, config.sigma, reps, seed
            );
            println!(
                "{:<14} {:>10} {:>10} {:>10} {:>10}",
                "method", "FDR", "FNDP", "ERR", "pERR"
            );
            for (method, report) in &results {
                println!(
                    "{:<14} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                    method.label(),
                    report.fdr_hat,
                    report.fndp_hat,
                    report.err_hat,
                    report.perr_hat
                );
            }
            println!(
                "curve data written to {}",
                out_dir.join("curves.tsv").display()
            );
        }
        Command::ComparePi0 {
            models,
            reps,
            seed,
            out_dir,
        } => {
            let configs = parse_models(&models)?;
            let opts = ComparePi0Options { reps, seed };
            let rows = cmd_compare_pi0(&configs, &opts, &out_dir)?;
            println!(
                "{:<7} {:<12} {:>9} {:>10} {:>10}",
                "model", "estimator", "pi0_true", "root_mse", "bias"
            );
            for row in &rows {
                println!(
                    "{:<7} {:<12} {:>9.4} {:>10.4} {:>10.4}",
                    row.model_id,
                    row.estimator.label(),
                    row.pi0_true,
                    row.root_mse,
                    row.bias
                );
            }
            println!(
                "table written to {}",
                out_dir.join("pi0_compare.tsv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
