//! Fast invariant suites for the `selftest` command.
//!
//! Each suite re-derives one of the library's load-bearing identities on
//! fresh random instances: Penrose conditions for the pseudoinverse, oracle
//! equivalence of the leave-one-out updates, projector identities, the
//! stability inequality chain, gradient descent's convergence to the
//! minimum-norm solution, and the ridgeless limit of Tikhonov
//! regularization.  The whole run takes a few seconds; it exists so a
//! deployed binary can vouch for its own numerics on the machine it runs
//! on.

use crate::experiment::{run_pinv_double_descent, ExperimentConfig};
use crate::interpolant::{
    gradient_descent_ls, min_norm_kernel_with, min_norm_linear, tikhonov_kernel, LsProblem,
};
use crate::kernel::{gram, KernelSpec};
use crate::loo::{
    kernel_projector_identities, linear_projector_identities, loo_pinv_kernel,
    loo_pinv_kernel_two_step, loo_pinv_linear, zero_column, zero_row_and_column,
};
use crate::pinv::{penrose_residuals, pseudoinverse};
use crate::sampling::{standard_normal_matrix, standard_normal_vector, stream_rng};
use crate::stability::{cvloo_empirical, ProblemKind};
use crate::Dataset;

/// Outcome of one named invariant suite.
#[derive(Debug, Clone)]
pub struct SelfTestOutcome {
    /// Suite name, stable across versions.
    pub name: &'static str,
    /// Whether every instance in the suite passed.
    pub passed: bool,
    /// One-line diagnostic: worst residual observed, or the first failure.
    pub detail: String,
}

fn check<F>(name: &'static str, body: F) -> SelfTestOutcome
where
    F: FnOnce() -> Result<String, String>,
{
    match body() {
        Ok(detail) => SelfTestOutcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => SelfTestOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn penrose_suite(seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut rng = stream_rng(seed, 1);
    for case in 0..20 {
        let rows = 2 + (case * 7) % 12;
        let cols = 2 + (case * 5) % 12;
        let mut m = standard_normal_matrix(&mut rng, rows, cols);
        if case % 3 == 0 && cols >= 2 {
            // Force rank deficiency by duplicating a column.
            let dup = m.column(0).clone_owned();
            m.column_mut(cols - 1).copy_from(&dup);
        }
        let factor = pseudoinverse(&m).map_err(|e| format!("case {case}: {e}"))?;
        for r in penrose_residuals(&m, &factor.pinv) {
            worst = worst.max(r);
            if r > 1e-9 {
                return Err(format!("case {case}: Penrose residual {r:.3e} > 1e-9"));
            }
        }
    }
    Ok(format!("20 instances, worst residual {worst:.3e}"))
}

fn loo_oracle_suite(seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut rng = stream_rng(seed, 2);

    for case in 0..4 {
        let n = 6 + case * 4;
        let x = standard_normal_matrix(&mut rng, 5, n);
        let g = gram(KernelSpec::rbf(3.0).map_err(|e| e.to_string())?, &x)
            .map_err(|e| e.to_string())?;
        let factor = pseudoinverse(&g.matrix).map_err(|e| e.to_string())?;
        for index in [0, n / 2, n - 1] {
            let closed = loo_pinv_kernel(&g, &factor, index).map_err(|e| e.to_string())?;
            let two_step =
                loo_pinv_kernel_two_step(&g, &factor, index).map_err(|e| e.to_string())?;
            let oracle = pseudoinverse(&zero_row_and_column(&g.matrix, index))
                .map_err(|e| e.to_string())?;
            let scale = oracle.pinv.norm();
            let r1 = (&closed.pinv_loo - &oracle.pinv).norm() / scale;
            let r2 = (&two_step.pinv_loo - &oracle.pinv).norm() / scale;
            worst = worst.max(r1).max(r2);
            if r1 > 1e-8 || r2 > 1e-8 {
                return Err(format!(
                    "kernel case {case} index {index}: oracle gaps {r1:.3e}, {r2:.3e}"
                ));
            }
            let lambda = two_step.meyer_lambda.unwrap();
            let ident = (two_step.meyer_phi.unwrap() - lambda)
                .abs()
                .max((two_step.meyer_eta.unwrap() - (1.0 - lambda)).abs())
                .max((two_step.meyer_nu.unwrap() - lambda).abs());
            worst = worst.max(ident);
            if ident > 1e-8 {
                return Err(format!(
                    "kernel case {case} index {index}: Meyer identity residual {ident:.3e}"
                ));
            }
        }
    }

    for case in 0..4 {
        let n = 4 + case * 3;
        let x = standard_normal_matrix(&mut rng, 24, n);
        let factor = pseudoinverse(&x).map_err(|e| e.to_string())?;
        for index in [0, n - 1] {
            let update = loo_pinv_linear(&x, &factor, index).map_err(|e| e.to_string())?;
            let oracle =
                pseudoinverse(&zero_column(&x, index)).map_err(|e| e.to_string())?;
            let r = (&update.pinv_loo - &oracle.pinv).norm() / oracle.pinv.norm();
            worst = worst.max(r);
            if r > 1e-8 {
                return Err(format!("linear case {case} index {index}: oracle gap {r:.3e}"));
            }
        }
    }
    Ok(format!("8 instances, worst residual {worst:.3e}"))
}

fn projector_suite(seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut rng = stream_rng(seed, 3);

    let x = standard_normal_matrix(&mut rng, 4, 10);
    let g = gram(KernelSpec::rbf(2.0).map_err(|e| e.to_string())?, &x)
        .map_err(|e| e.to_string())?;
    let factor = pseudoinverse(&g.matrix).map_err(|e| e.to_string())?;
    for index in 0..g.n() {
        let report =
            kernel_projector_identities(&g, &factor, index).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_residual);
        if !report.passes(1e-8) {
            return Err(format!(
                "kernel index {index}: projector residual {:.3e}",
                report.max_residual
            ));
        }
    }

    let x = standard_normal_matrix(&mut rng, 12, 7);
    let factor = pseudoinverse(&x).map_err(|e| e.to_string())?;
    for index in 0..x.ncols() {
        let report =
            linear_projector_identities(&x, &factor, index).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_residual);
        if !report.passes(1e-8) {
            return Err(format!(
                "linear index {index}: projector residual {:.3e}",
                report.max_residual
            ));
        }
    }
    Ok(format!("17 indices, worst residual {worst:.3e}"))
}

fn stability_suite(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 4);
    for case in 0..6 {
        let (data, kind) = if case % 2 == 0 {
            let n = 8 + case;
            let x = standard_normal_matrix(&mut rng, 4, n);
            let y = standard_normal_vector(&mut rng, n);
            (
                Dataset::new(x, y).map_err(|e| e.to_string())?,
                ProblemKind::Kernel(KernelSpec::rbf(3.0).map_err(|e| e.to_string())?),
            )
        } else {
            let n = 5 + case;
            let x = standard_normal_matrix(&mut rng, 2 * n, n);
            let y = standard_normal_vector(&mut rng, n);
            (Dataset::new(x, y).map_err(|e| e.to_string())?, ProblemKind::Linear)
        };
        let report = cvloo_empirical(&data, kind, true).map_err(|e| e.to_string())?;
        if !report.bound_checks.all_pass() {
            return Err(format!(
                "case {case}: checks {:?}, cvloo {} vs rhs {}",
                report.bound_checks, report.cvloo_mean, report.lemma2_rhs_mean
            ));
        }
        let direct = cvloo_empirical(&data, kind, false).map_err(|e| e.to_string())?;
        if (report.cvloo_mean - direct.cvloo_mean).abs() > 1e-8 {
            return Err(format!(
                "case {case}: fast/direct cvloo gap {:.3e}",
                (report.cvloo_mean - direct.cvloo_mean).abs()
            ));
        }
    }
    Ok("6 datasets, all inequality checks passed".to_string())
}

fn gradient_descent_suite(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 5);
    let x = standard_normal_matrix(&mut rng, 20, 5);
    let y = standard_normal_vector(&mut rng, 5);
    let factor = pseudoinverse(&x).map_err(|e| e.to_string())?;
    let sigma_max = factor.sigma_max();
    let step = 0.9 * 2.0 / (sigma_max * sigma_max);

    let problem = LsProblem::Linear { x: &x, y: &y };
    let gd = gradient_descent_ls(&problem, step, 20_000).map_err(|e| e.to_string())?;
    let exact = min_norm_linear(&x, &y).map_err(|e| e.to_string())?;
    let rel =
        (&gd.coefficients - &exact.coefficients).norm() / exact.coefficients.norm();
    if rel > 1e-6 {
        return Err(format!("relative distance to min-norm {rel:.3e} > 1e-6"));
    }
    Ok(format!("relative distance to min-norm {rel:.3e}"))
}

fn tikhonov_suite(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 6);
    let x = standard_normal_matrix(&mut rng, 15, 10);
    let y = standard_normal_vector(&mut rng, 10);
    let g = gram(KernelSpec::rbf(2.0).map_err(|e| e.to_string())?, &x)
        .map_err(|e| e.to_string())?;
    let factor = pseudoinverse(&g.matrix).map_err(|e| e.to_string())?;
    let lambda = 1e-8 * factor.sigma_max();
    let ridge = tikhonov_kernel(&g, &y, lambda).map_err(|e| e.to_string())?;
    let exact = min_norm_kernel_with(&g, &factor, &y).map_err(|e| e.to_string())?;
    let rel =
        (&ridge.coefficients - &exact.coefficients).norm() / exact.coefficients.norm();
    if rel > 1e-4 {
        return Err(format!("ridgeless limit gap {rel:.3e} > 1e-4"));
    }
    Ok(format!("ridgeless limit gap {rel:.3e}"))
}

fn determinism_suite(seed: u64) -> Result<String, String> {
    let cfg = ExperimentConfig {
        seed,
        d: 6,
        n: 6,
        n_test: 5,
        trials: 3,
        kernel: KernelSpec::Linear,
        v_grid: vec![0.0],
        n_sweep: vec![3, 6, 9],
        lambda: None,
    };
    let a = run_pinv_double_descent(&cfg).map_err(|e| e.to_string())?;
    let b = run_pinv_double_descent(&cfg).map_err(|e| e.to_string())?;
    if a.rows != b.rows {
        return Err("repeated run produced different rows".to_string());
    }
    Ok(format!("{} rows bit-identical across two runs", a.rows.len()))
}

/// Runs every invariant suite and reports one outcome per suite.
///
/// Failures are captured, never panicked, so a caller can print all
/// outcomes and exit nonzero if any failed.
pub fn run_selftest(seed: u64) -> Vec<SelfTestOutcome> {
    vec![
        check("penrose-conditions", || penrose_suite(seed)),
        check("loo-oracle-equivalence", || loo_oracle_suite(seed)),
        check("projector-identities", || projector_suite(seed)),
        check("stability-inequalities", || stability_suite(seed)),
        check("gradient-descent-min-norm", || gradient_descent_suite(seed)),
        check("tikhonov-ridgeless-limit", || tikhonov_suite(seed)),
        check("experiment-determinism", || determinism_suite(seed)),
    ]
}

/// True when every suite passed.
pub fn all_passed(outcomes: &[SelfTestOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}
