//! Experiment runners: the double-descent reproductions, the
//! interpolant-norm sweep, and the leave-one-out update benchmark.
//!
//! Every runner is deterministic under a fixed [`ExperimentConfig`]: each
//! (grid point, trial) pair derives its own RNG stream from the seed, so a
//! trial's data does not depend on how many trials run or in what order
//! they execute.  Results come back as a rectangular [`ResultTable`] that
//! serializes to RFC-4180 CSV and to a JSON mirror, with the full config
//! echoed in the metadata.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::interpolant::{general_linear_interpolant_with, min_norm_linear_with};
use crate::kernel::{gram, KernelSpec};
use crate::loo::{deflated_pseudoinverse, loo_pinv_kernel, UpdatePath};
use crate::pinv::pseudoinverse;
use crate::sampling::{grid_stream, standard_normal_matrix, standard_normal_vector, stream_rng};
use crate::{Error, Result};

/// Parameters shared by all experiment runners.
///
/// Not every runner reads every field: the norm sweep uses `d`, `n`,
/// `n_test`, `trials`, and `v_grid`; the double-descent sweeps use `d`,
/// `trials`, `n_sweep`, and (condition-number variant) the kernel; the
/// benchmark uses `d`, the kernel, and `n_sweep`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    /// Master seed; every trial derives an independent stream from it.
    pub seed: u64,
    /// Ambient dimension.
    pub d: usize,
    /// Training-set size (norm sweep).
    pub n: usize,
    /// Test-set size (norm sweep).
    pub n_test: usize,
    /// Independent repetitions per grid point.
    pub trials: usize,
    /// Kernel for the Gram-matrix experiments.
    pub kernel: KernelSpec,
    /// Null-space perturbation norms for the norm sweep; must start at 0
    /// and increase strictly.
    pub v_grid: Vec<f64>,
    /// Training-set sizes for the sweeps; must increase strictly.
    pub n_sweep: Vec<usize>,
    /// Optional ridge parameter, passed through to Tikhonov comparisons.
    pub lambda: Option<f64>,
}

impl ExperimentConfig {
    /// Parameters of the interpolant-norm experiment: `d = 1000`,
    /// `n = 200`, `n_test = 50`, 100 trials, noiseless linear model.
    pub fn figure1_defaults() -> Self {
        ExperimentConfig {
            seed: 0,
            d: 1000,
            n: 200,
            n_test: 50,
            trials: 100,
            kernel: KernelSpec::Linear,
            v_grid: vec![0.0, 24.0, 48.0, 96.0, 192.0],
            n_sweep: (2..=45).collect(),
            lambda: None,
        }
    }

    /// Parameters of the double-descent sweeps: `d = 15`, `n` from 2 to 45,
    /// 20 seeds per size, bandwidth-5 Gaussian kernel.
    pub fn descent_defaults() -> Self {
        ExperimentConfig {
            seed: 0,
            d: 15,
            n: 15,
            n_test: 50,
            trials: 20,
            kernel: KernelSpec::rbf(5.0).expect("static bandwidth"),
            v_grid: vec![0.0, 24.0, 48.0, 96.0, 192.0],
            n_sweep: (2..=45).collect(),
            lambda: None,
        }
    }

    /// Parameters of the leave-one-out benchmark: one instance per size,
    /// sizes spanning the regime where the rank-one update starts to pay.
    pub fn bench_defaults() -> Self {
        ExperimentConfig {
            seed: 0,
            d: 20,
            n: 20,
            n_test: 50,
            trials: 1,
            kernel: KernelSpec::rbf(5.0).expect("static bandwidth"),
            v_grid: vec![0.0, 24.0, 48.0, 96.0, 192.0],
            n_sweep: vec![3, 100, 200, 400],
            lambda: None,
        }
    }

    /// Checks the cross-field invariants every runner relies on.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidInput("dimension d must be positive".into()));
        }
        if !self.v_grid.is_empty() {
            if self.v_grid[0] != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "v_grid must start at 0, got {}",
                    self.v_grid[0]
                )));
            }
            for w in self.v_grid.windows(2) {
                if !(w[1] > w[0]) {
                    return Err(Error::InvalidInput(format!(
                        "v_grid must increase strictly, got {} after {}",
                        w[1], w[0]
                    )));
                }
            }
            if self.v_grid.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("v_grid entries must be finite".into()));
            }
        }
        for w in self.n_sweep.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput(format!(
                    "n_sweep must increase strictly, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        if self.n_sweep.first().is_some_and(|&n| n == 0) {
            return Err(Error::InvalidInput("n_sweep entries must be positive".into()));
        }
        if let Some(lambda) = self.lambda {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "lambda must be positive and finite, got {lambda}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything recorded alongside a result table.
#[derive(Debug, Clone, Serialize)]
pub struct TableMetadata {
    /// The exact configuration the experiment ran with.
    pub config: ExperimentConfig,
    /// Library version that produced the table.
    pub code_version: String,
    /// Wall-clock duration of the run in seconds.
    pub wall_clock_seconds: f64,
    /// Experiment-specific scalar summaries (e.g. win counts).
    pub extra: BTreeMap<String, f64>,
}

/// A rectangular table of experiment results.
#[derive(Debug, Clone, Serialize)]
pub struct ResultTable {
    /// Short machine-readable experiment name; also the output file stem.
    pub experiment: String,
    /// Column names, one per entry of each row.
    pub columns: Vec<String>,
    /// Data rows; every row has exactly `columns.len()` entries.
    pub rows: Vec<Vec<f64>>,
    /// Config echo, version, and timings.
    pub metadata: TableMetadata,
}

impl ResultTable {
    fn new(experiment: &str, columns: &[&str], config: &ExperimentConfig) -> Self {
        ResultTable {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: TableMetadata {
                config: config.clone(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_clock_seconds: 0.0,
                extra: BTreeMap::new(),
            },
        }
    }

    fn push_row(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len(), "ragged result row");
        self.rows.push(row);
    }

    /// File stem used for outputs: `<experiment>_<seed>`.
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.experiment, self.metadata.config.seed)
    }

    /// The table as an RFC-4180 CSV document (header row, '.' decimal,
    /// shortest round-trip float formatting).
    pub fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(&self.columns)
            .map_err(|e| Error::InvalidInput(format!("csv encoding failed: {e}")))?;
        for row in &self.rows {
            let record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writer
                .write_record(&record)
                .map_err(|e| Error::InvalidInput(format!("csv encoding failed: {e}")))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::InvalidInput(format!("csv encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(format!("csv not utf-8: {e}")))
    }

    /// Writes `<dir>/<experiment>_<seed>.csv`, returning the path.
    pub fn write_csv(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{}.csv", self.file_stem()));
        let mut file = std::fs::File::create(&path)
            .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", path.display())))?;
        file.write_all(self.to_csv_string()?.as_bytes())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// Writes `<dir>/<experiment>_<seed>.json` mirroring the full table
    /// (rows plus metadata), returning the path.
    pub fn write_json(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{}.json", self.file_stem()));
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidInput(format!("json encoding failed: {e}")))?;
        std::fs::write(&path, body)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Sample mean and (n−1)-normalized standard deviation.
fn mean_std(samples: &[f64]) -> (f64, f64) {
    let k = samples.len();
    let mean = samples.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, var.sqrt())
}

/// Test and train error of minimum-norm and norm-inflated interpolants on
/// noiseless Gaussian linear data.
///
/// Per trial: draw `X` (d×n), `X_test` (d×n_test), and `w_true` with
/// standard normal entries, label noiselessly, and fit one interpolant per
/// `v_grid` entry by adding a null-space direction of exactly that norm to
/// the minimum-norm solution.  The direction is one fresh random vector per
/// trial, projected onto the null space and rescaled, so row-space
/// components never dilute the perturbation.
///
/// Columns: `v_norm`, `train_mse_mean`, `test_mse_mean`, `test_mse_std`.
/// Metadata extras: `minnorm_wins` (trials where the v = 0 interpolant had
/// strictly the lowest test error) and `max_train_mse`.
pub fn run_mse_vs_norm(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.n >= cfg.d {
        return Err(Error::InvalidInput(format!(
            "norm sweep needs an underdetermined problem (d > n), got d = {}, n = {}",
            cfg.d, cfg.n
        )));
    }
    if cfg.n_test == 0 {
        return Err(Error::InvalidInput("n_test must be positive".into()));
    }
    if cfg.v_grid.is_empty() {
        return Err(Error::InvalidInput("v_grid must not be empty".into()));
    }

    let start = Instant::now();
    let grid_len = cfg.v_grid.len();

    // Per trial: (train MSE, test MSE) for each grid entry.
    let per_trial: Vec<Result<Vec<(f64, f64)>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(cfg.seed, trial as u64);
            let x = standard_normal_matrix(&mut rng, cfg.d, cfg.n);
            let x_test = standard_normal_matrix(&mut rng, cfg.d, cfg.n_test);
            let w_true = standard_normal_vector(&mut rng, cfg.d);
            let direction = standard_normal_vector(&mut rng, cfg.d);
            let y = x.transpose() * &w_true;
            let y_test = x_test.transpose() * &w_true;

            let factor = pseudoinverse(&x)?;
            // Null-space component of the fresh direction, for rescaling to
            // each grid norm.
            let null_part = &direction - &x * (&factor.pinv * &direction);
            let null_norm = null_part.norm();
            if null_norm == 0.0 {
                return Err(Error::InvalidInput(
                    "random direction fell entirely in the row space".into(),
                ));
            }

            let mut rows = Vec::with_capacity(grid_len);
            for &v_norm in &cfg.v_grid {
                let w_hat = if v_norm == 0.0 {
                    min_norm_linear_with(&x, &factor, &y)?
                } else {
                    let v = &null_part * (v_norm / null_norm);
                    general_linear_interpolant_with(&x, &factor, &y, &v)?
                };
                let train_res = x.transpose() * &w_hat.coefficients - &y;
                let test_res = x_test.transpose() * &w_hat.coefficients - &y_test;
                rows.push((
                    train_res.norm_squared() / cfg.n as f64,
                    test_res.norm_squared() / cfg.n_test as f64,
                ));
            }
            Ok(rows)
        })
        .collect();

    let mut trials = Vec::with_capacity(cfg.trials);
    for t in per_trial {
        trials.push(t?);
    }

    let mut table = ResultTable::new(
        "mse_vs_norm",
        &["v_norm", "train_mse_mean", "test_mse_mean", "test_mse_std"],
        cfg,
    );
    let mut max_train_mse = 0.0f64;
    for (gi, &v_norm) in cfg.v_grid.iter().enumerate() {
        let train: Vec<f64> = trials.iter().map(|t| t[gi].0).collect();
        let test: Vec<f64> = trials.iter().map(|t| t[gi].1).collect();
        let (train_mean, _) = mean_std(&train);
        let (test_mean, test_std) = mean_std(&test);
        max_train_mse = train.iter().fold(max_train_mse, |acc, &v| acc.max(v));
        table.push_row(vec![v_norm, train_mean, test_mean, test_std]);
    }

    let minnorm_wins = trials
        .iter()
        .filter(|t| t[1..].iter().all(|&(_, test)| t[0].1 < test))
        .count();
    table
        .metadata
        .extra
        .insert("minnorm_wins".into(), minnorm_wins as f64);
    table
        .metadata
        .extra
        .insert("max_train_mse".into(), max_train_mse);
    table.metadata.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(table)
}

/// Effective condition number of random Gaussian-data Gram matrices across
/// training-set sizes — the condition-number double descent.
///
/// Columns: `n`, `d`, `cond_mean`, `cond_std`.
pub fn run_cond_double_descent(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    if !cfg.kernel.is_rbf() {
        return Err(Error::InvalidInput(
            "condition-number sweep runs on the rbf kernel (set kernel=rbf)".into(),
        ));
    }
    if cfg.n_sweep.is_empty() {
        return Err(Error::InvalidInput("n_sweep must not be empty".into()));
    }

    let start = Instant::now();
    let per_point: Vec<Result<Vec<f64>>> = cfg
        .n_sweep
        .par_iter()
        .enumerate()
        .map(|(gi, &n)| {
            (0..cfg.trials)
                .map(|trial| {
                    let mut rng = stream_rng(cfg.seed, grid_stream(gi, trial));
                    let x = standard_normal_matrix(&mut rng, cfg.d, n);
                    let g = gram(cfg.kernel, &x)?;
                    let factor = pseudoinverse(&g.matrix)?;
                    factor.effective_condition_number()
                })
                .collect()
        })
        .collect();

    let mut table = ResultTable::new(
        "cond_descent",
        &["n", "d", "cond_mean", "cond_std"],
        cfg,
    );
    for (gi, conds) in per_point.into_iter().enumerate() {
        let conds = conds?;
        let (mean, std) = mean_std(&conds);
        table.push_row(vec![cfg.n_sweep[gi] as f64, cfg.d as f64, mean, std]);
    }
    table.metadata.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(table)
}

/// Operator norm of the data-matrix pseudoinverse across training-set sizes
/// — the pseudoinverse-norm double descent in the linear model.
///
/// Columns: `n`, `d`, `pinv_norm_mean`, `pinv_norm_std`.
pub fn run_pinv_double_descent(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.n_sweep.is_empty() {
        return Err(Error::InvalidInput("n_sweep must not be empty".into()));
    }

    let start = Instant::now();
    let per_point: Vec<Result<Vec<f64>>> = cfg
        .n_sweep
        .par_iter()
        .enumerate()
        .map(|(gi, &n)| {
            (0..cfg.trials)
                .map(|trial| {
                    let mut rng = stream_rng(cfg.seed, grid_stream(gi, trial));
                    let x = standard_normal_matrix(&mut rng, cfg.d, n);
                    let factor = pseudoinverse(&x)?;
                    Ok(factor.pinv_operator_norm())
                })
                .collect()
        })
        .collect();

    let mut table = ResultTable::new(
        "pinv_descent",
        &["n", "d", "pinv_norm_mean", "pinv_norm_std"],
        cfg,
    );
    for (gi, norms) in per_point.into_iter().enumerate() {
        let norms = norms?;
        let (mean, std) = mean_std(&norms);
        table.push_row(vec![cfg.n_sweep[gi] as f64, cfg.d as f64, mean, std]);
    }
    table.metadata.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(table)
}

/// Relative Frobenius agreement required between the update and recompute
/// paths before a benchmark row is accepted.
const BENCH_AGREEMENT_TOL: f64 = 1e-8;

/// Wall-clock comparison of the rank-one leave-one-out update against naive
/// per-index SVD recomputation, on one full-rank Gram instance per size.
///
/// The recompute path factors the (n−1)×(n−1) Gram of the training set with
/// point `i` removed and re-embeds it — the natural from-scratch competitor.
/// For every index both paths produce the deflated pseudoinverse; the pair
/// is compared to 1e-8 relative Frobenius and any disagreement aborts the
/// run naming the offending row.  Timing is accumulated per path over the
/// full n-index sweep.  Rows run serially so timings are not polluted by
/// parallel contention.
///
/// Columns: `n`, `t_update`, `t_recompute`, `speedup`.
pub fn run_loo_benchmark(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.n_sweep.is_empty() {
        return Err(Error::InvalidInput("n_sweep must not be empty".into()));
    }

    let start = Instant::now();
    let mut table = ResultTable::new(
        "loo_bench",
        &["n", "t_update", "t_recompute", "speedup"],
        cfg,
    );

    for (gi, &n) in cfg.n_sweep.iter().enumerate() {
        let mut rng = stream_rng(cfg.seed, grid_stream(gi, 0));
        let x = standard_normal_matrix(&mut rng, cfg.d, n);
        let g = gram(cfg.kernel, &x)?;
        let factor = pseudoinverse(&g.matrix)?;
        if !factor.is_full_rank() {
            return Err(Error::InvalidInput(format!(
                "benchmark row n = {n}: instance is rank deficient ({}/{n})",
                factor.retained_rank
            )));
        }

        let mut t_update = 0.0;
        let mut t_recompute = 0.0;
        for i in 0..n {
            let t0 = Instant::now();
            let update = loo_pinv_kernel(&g, &factor, i)?;
            t_update += t0.elapsed().as_secs_f64();
            debug_assert_eq!(update.path, UpdatePath::ClosedForm);

            let t1 = Instant::now();
            let fresh = deflated_pseudoinverse(&g.matrix, i)?;
            t_recompute += t1.elapsed().as_secs_f64();

            let rel = (&update.pinv_loo - &fresh.pinv).norm() / fresh.pinv.norm().max(1.0);
            if rel > BENCH_AGREEMENT_TOL {
                return Err(Error::InvalidInput(format!(
                    "benchmark row n = {n}, index {i}: paths disagree \
                     (relative Frobenius {rel:.3e})"
                )));
            }
        }

        let speedup = if t_update > 0.0 { t_recompute / t_update } else { f64::INFINITY };
        table.push_row(vec![n as f64, t_update, t_recompute, speedup]);
    }

    table.metadata.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(table)
}
