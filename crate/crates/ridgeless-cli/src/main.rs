//! Command-line runner for the ridgeless least-squares experiments.
//!
//! Subcommands dispatch the library's experiment and audit entry points:
//! `mse-vs-norm`, `cond-descent`, `pinv-descent`, `loo-bench` write seeded
//! CSV result tables (plus a JSON mirror with `--json`), `stability-audit`
//! writes a leave-one-out stability report as JSON, and `selftest` runs the
//! numerical invariant suites.  Configuration comes from a flat
//! `key = value` file (`--config`) overridden by per-key flags; the
//! effective configuration is logged to stderr before any computation.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 selftest failure.

mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{ConfigOverlay, KernelChoice};
use ridgeless::experiment::{
    run_cond_double_descent, run_loo_benchmark, run_mse_vs_norm, run_pinv_double_descent,
    ExperimentConfig, ResultTable,
};
use ridgeless::kernel::KernelSpec;
use ridgeless::sampling::{standard_normal_matrix, standard_normal_vector, stream_rng};
use ridgeless::selftest::{all_passed, run_selftest};
use ridgeless::stability::{cvloo_empirical, ProblemKind};
use ridgeless::{Dataset, Error};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_NUMERICAL: i32 = 2;
const EXIT_SELFTEST: i32 = 3;

#[derive(Parser)]
#[command(
    name = "ridgeless",
    version,
    about = "Experiments and stability audits for interpolating least squares",
    after_help = "Config file: flat `key = value` lines (keys: seed, d, n, n_test, trials, \
                  kernel, sigma, v_grid, n_sweep, lambda); `#` starts a comment. Flags \
                  override file values. RIDGELESS_THREADS caps worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file applied over the subcommand's defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Also write a JSON mirror next to each CSV.
    #[arg(long, global = true)]
    json: bool,

    /// Master seed; every trial derives an independent stream from it.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Ambient dimension.
    #[arg(long, global = true, value_name = "INT")]
    d: Option<usize>,

    /// Training-set size.
    #[arg(long, global = true, value_name = "INT")]
    n: Option<usize>,

    /// Test-set size (norm sweep).
    #[arg(long = "n-test", alias = "n_test", global = true, value_name = "INT")]
    n_test: Option<usize>,

    /// Repetitions per grid point.
    #[arg(long, global = true, value_name = "INT")]
    trials: Option<usize>,

    /// Kernel family: linear or rbf.
    #[arg(long, global = true, value_name = "NAME")]
    kernel: Option<String>,

    /// Gaussian-kernel bandwidth (with kernel = rbf).
    #[arg(long, global = true, value_name = "FLOAT", allow_negative_numbers = true)]
    sigma: Option<f64>,

    /// Perturbation norms for mse-vs-norm, comma-separated, starting at 0.
    #[arg(long = "v-grid", alias = "v_grid", global = true, value_name = "LIST")]
    v_grid: Option<String>,

    /// Training-set sizes for the sweeps, comma-separated, increasing.
    #[arg(long = "n-sweep", alias = "n_sweep", global = true, value_name = "LIST")]
    n_sweep: Option<String>,

    /// Ridge parameter for Tikhonov comparisons.
    #[arg(long, global = true, value_name = "FLOAT", allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Test MSE of norm-inflated interpolants on noiseless Gaussian data.
    MseVsNorm,
    /// Effective condition number of rbf Grams across training-set sizes.
    CondDescent,
    /// Operator norm of the data-matrix pseudoinverse across sizes.
    PinvDescent,
    /// Leave-one-out stability report (JSON) on one sampled dataset.
    StabilityAudit,
    /// Wall-clock of rank-one LOO updates vs. per-index SVD recomputes.
    LooBench,
    /// Run the numerical invariant suites and exit nonzero on failure.
    Selftest,
}

/// Routes library warnings (SVD fallbacks, degenerate pivots) to stderr.
struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Info
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("[{}] {}", record.level(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    let _ = log::set_logger(&LOGGER);
    log::set_max_level(log::LevelFilter::Info);

    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return EXIT_USAGE;
    }

    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ConfigParse { .. } | Error::InvalidInput(_) => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            }
        }
    }
}

/// Applies `RIDGELESS_THREADS` to the global worker pool; unset means all
/// cores.
fn configure_threads() -> Result<(), String> {
    let raw = match std::env::var("RIDGELESS_THREADS") {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(format!("RIDGELESS_THREADS: {e}")),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("RIDGELESS_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        return Err("RIDGELESS_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("cannot configure {threads} worker threads: {e}"))
}

/// The override flags as a config overlay (the last layer; wins over the
/// config file).
fn flag_overlay(cli: &Cli) -> ridgeless::Result<ConfigOverlay> {
    let kernel = match cli.kernel.as_deref() {
        None => None,
        Some("linear") => Some(KernelChoice::Linear),
        Some("rbf") => Some(KernelChoice::Rbf),
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "--kernel expects `linear` or `rbf`, got `{other}`"
            )))
        }
    };
    let parse_f64_list = |raw: &str, flag: &str| -> ridgeless::Result<Vec<f64>> {
        raw.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("{flag}: bad entry `{item}`: {e}")))
            })
            .collect()
    };
    let parse_usize_list = |raw: &str, flag: &str| -> ridgeless::Result<Vec<usize>> {
        raw.split(',')
            .map(|item| {
                item.trim()
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("{flag}: bad entry `{item}`: {e}")))
            })
            .collect()
    };
    Ok(ConfigOverlay {
        seed: cli.seed,
        d: cli.d,
        n: cli.n,
        n_test: cli.n_test,
        trials: cli.trials,
        kernel,
        sigma: cli.sigma,
        v_grid: cli.v_grid.as_deref().map(|raw| parse_f64_list(raw, "--v-grid")).transpose()?,
        n_sweep: cli
            .n_sweep
            .as_deref()
            .map(|raw| parse_usize_list(raw, "--n-sweep"))
            .transpose()?,
        lambda: cli.lambda,
    })
}

/// Defaults for a subcommand, before file and flag overlays.
fn base_config(command: Command) -> ExperimentConfig {
    match command {
        Command::MseVsNorm => ExperimentConfig::figure1_defaults(),
        Command::CondDescent | Command::PinvDescent | Command::StabilityAudit => {
            ExperimentConfig::descent_defaults()
        }
        Command::LooBench => ExperimentConfig::bench_defaults(),
        Command::Selftest => ExperimentConfig::figure1_defaults(),
    }
}

fn dispatch(cli: &Cli) -> ridgeless::Result<i32> {
    let mut effective = match (&cli.config, cli.command) {
        // The norm sweep's defaults are the documented file defaults, so a
        // config file loads directly.
        (Some(path), Command::MseVsNorm) => config::load_config(path)?,
        (Some(path), _) => config::read_overlay(path)?.apply(&base_config(cli.command))?,
        (None, _) => base_config(cli.command),
    };
    effective = flag_overlay(cli)?.apply(&effective)?;

    eprintln!("effective config:");
    for line in config::render(&effective).lines() {
        eprintln!("  {line}");
    }

    std::fs::create_dir_all(&cli.out).map_err(|e| {
        Error::InvalidInput(format!("cannot create output dir {}: {e}", cli.out.display()))
    })?;

    match cli.command {
        Command::MseVsNorm => emit_table(cli, run_mse_vs_norm(&effective)?),
        Command::CondDescent => emit_table(cli, run_cond_double_descent(&effective)?),
        Command::PinvDescent => emit_table(cli, run_pinv_double_descent(&effective)?),
        Command::LooBench => emit_table(cli, run_loo_benchmark(&effective)?),
        Command::StabilityAudit => stability_audit(cli, &effective),
        Command::Selftest => selftest(effective.seed),
    }
}

/// Writes the table as CSV (and a JSON mirror with `--json`), printing the
/// paths written.
fn emit_table(cli: &Cli, table: ResultTable) -> ridgeless::Result<i32> {
    let csv_path = table.write_csv(&cli.out)?;
    println!("{}", csv_path.display());
    if cli.json {
        let json_path = table.write_json(&cli.out)?;
        println!("{}", json_path.display());
    }
    Ok(EXIT_OK)
}

/// Samples one dataset from the effective config and writes its
/// leave-one-out stability report as `stability_audit_<seed>.json`.
///
/// Data follow the experiments' model: X is d×n standard normal, labels are
/// noiseless ⟨w_true, x⟩ with standard-normal w_true.  An rbf config audits
/// the kernel interpolant; a linear config audits the weight-space
/// interpolant.
fn stability_audit(cli: &Cli, cfg: &ExperimentConfig) -> ridgeless::Result<i32> {
    let mut rng = stream_rng(cfg.seed, 0);
    let x = standard_normal_matrix(&mut rng, cfg.d, cfg.n);
    let w_true = standard_normal_vector(&mut rng, cfg.d);
    let y = x.transpose() * &w_true;
    let data = Dataset::new(x, y)?;

    let kind = match cfg.kernel {
        KernelSpec::Rbf { .. } => ProblemKind::Kernel(cfg.kernel),
        KernelSpec::Linear => ProblemKind::Linear,
    };
    let report = cvloo_empirical(&data, kind, true)?;

    let path = cli.out.join(format!("stability_audit_{}.json", cfg.seed));
    let body = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidInput(format!("json encoding failed: {e}")))?;
    std::fs::write(&path, body)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;

    println!("{}", path.display());
    println!(
        "cvloo_mean = {:.6e}; checks: almost_positivity={} lemma2_chain={} perturbation_norm={}",
        report.cvloo_mean,
        report.bound_checks.almost_positivity,
        report.bound_checks.lemma2_chain,
        report.bound_checks.perturbation_norm,
    );
    Ok(EXIT_OK)
}

/// Runs the invariant suites, printing one line per suite.
fn selftest(seed: u64) -> ridgeless::Result<i32> {
    let outcomes = run_selftest(seed);
    for outcome in &outcomes {
        let verdict = if outcome.passed { "pass" } else { "FAIL" };
        println!("{verdict}  {}: {}", outcome.name, outcome.detail);
    }
    if all_passed(&outcomes) {
        println!("selftest: all {} suites passed", outcomes.len());
        Ok(EXIT_OK)
    } else {
        let failures = outcomes.iter().filter(|o| !o.passed).count();
        println!("selftest: {failures} of {} suites FAILED", outcomes.len());
        Ok(EXIT_SELFTEST)
    }
}
