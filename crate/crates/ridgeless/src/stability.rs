//! Empirical stability audits for interpolating least squares.
//!
//! The central quantity is CVloo stability: the expected increase in loss at
//! a training point when that point is left out of the training set,
//!
//! ```text
//! delta_i = V(f_{Si}, z_i) − V(f_S, z_i),        V(f, (x, y)) = (y − f(x))²
//! ```
//!
//! For empirical risk minimizers every delta is nonnegative (the classical
//! two-sided ERM comparison), and for the square loss the deltas are
//! controlled by a local-Lipschitz bound in terms of RKHS norms.  This
//! module estimates the deltas, the replace-one variant, the bound
//! quantities `B₀`, `β̂₁`, `β̂₂` built from the pseudoinverse spectrum, and
//! the right-hand side of the local-Lipschitz inequality, and packages the
//! lot into a serializable [`StabilityReport`].  A Monte Carlo harness
//! ([`excess_risk_mc`]) checks the excess-risk-versus-CVloo lemma on a
//! noiseless Gaussian model where the population risk has a closed form.

use rayon::prelude::*;
use serde::Serialize;

use crate::interpolant::LsProblem;
use crate::kernel::{gram, kappa_bound, GramMatrix, KernelSpec};
use crate::loo::{loo_pinv_kernel, loo_pinv_linear, zero_column, zero_row_and_column};
use crate::pinv::{psd_sqrt, pseudoinverse, Pseudoinverse};
use crate::sampling::{standard_normal_matrix, standard_normal_vector, stream_rng};
use crate::{Dataset, Error, Matrix, Result, Vector};

/// Absolute floor for comparisons between quantities that are identically
/// zero in exact arithmetic.
///
/// In the noiseless realizable regime every audited quantity (training
/// residuals, loss deltas, excess risks) is exactly zero in real arithmetic;
/// only rounding noise of order 1e-28 survives in floating point.  The Monte
/// Carlo standard errors are then themselves at rounding level, so "within
/// 3 standard errors" degenerates and a fixed floor far above rounding noise
/// but far below any genuine signal stands in for the slack.
pub const ZERO_FLOOR: f64 = 1e-18;

/// Which least-squares formulation a stability audit runs on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// Kernel interpolation with the given kernel; solutions live in the
    /// RKHS and norms are `‖K^{1/2}c‖`.
    Kernel(KernelSpec),
    /// Linear regression on raw features; solutions are weight vectors and
    /// norms are Euclidean.
    Linear,
}

/// Pass/fail flags for the inequalities a [`StabilityReport`] audits.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundChecks {
    /// Every per-index delta is at least `−1e-10`.
    pub almost_positivity: bool,
    /// `cvloo_mean ≤ lemma2_rhs_mean + 1e-10`.
    pub lemma2_chain: bool,
    /// Every solution-difference norm is at most `β̂₁` (the
    /// perturbation-norm bound).
    pub perturbation_norm: bool,
}

impl BoundChecks {
    /// True when every audited inequality held.
    pub fn all_pass(&self) -> bool {
        self.almost_positivity && self.lemma2_chain && self.perturbation_norm
    }
}

/// Everything a leave-one-out stability audit measures on one dataset.
///
/// Serializes to JSON with keys `deltas`, `cvloo_mean`, `diff_rkhs_norms`,
/// `B0`, `beta1`, `beta2`, `lemma2_rhs`, `checks`, `kappa_used`, `M_used`.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Loss increase at each held-out point: `V(f_{Si}, z_i) − V(f_S, z_i)`.
    #[serde(rename = "deltas")]
    pub per_index_delta: Vec<f64>,
    /// Mean of the deltas — the empirical CVloo stability.
    pub cvloo_mean: f64,
    /// `‖f_S − f_{Si}‖_H` per index (Euclidean norm of the weight difference
    /// in linear mode).
    pub diff_rkhs_norms: Vec<f64>,
    /// `‖K†‖_op · cond(K) · ‖y‖` (kernel) or `‖X†‖_op · ‖y‖` (linear).
    #[serde(rename = "B0")]
    pub b0: f64,
    /// Perturbation-norm bound: `‖K^{1/2}‖_op · B₀` (kernel), `B₀` (linear).
    #[serde(rename = "beta1")]
    pub beta1_hat: f64,
    /// Second-moment counterpart, `β̂₁²` on a single dataset.
    #[serde(rename = "beta2")]
    pub beta2_hat: f64,
    /// Mean over indices of the local-Lipschitz right-hand side
    /// `(2M + κ(‖f_S‖ + ‖f_{Si}‖)) · κ · ‖f_S − f_{Si}‖`.
    #[serde(rename = "lemma2_rhs")]
    pub lemma2_rhs_mean: f64,
    /// Inequality outcomes.
    #[serde(rename = "checks")]
    pub bound_checks: BoundChecks,
    /// Evaluation constant κ used in the Lipschitz bound.
    pub kappa_used: f64,
    /// Label bound M used in the Lipschitz bound (max |yᵢ| of the dataset).
    #[serde(rename = "M_used")]
    pub m_used: f64,
}

/// Replace-one stability estimate.
#[derive(Debug, Clone, Serialize)]
pub struct CvroEstimate {
    /// Monte Carlo mean of `V(f_S, z) − V(f_{(Si,z)}, z)` over indices and
    /// fresh draws `z`.
    pub mean: f64,
    /// Standard error across draws (each draw's index-average is one
    /// sample).
    pub standard_error: f64,
    /// Number of fresh draws used.
    pub draws: usize,
}

/// Single-dataset plug-ins for the stability bound quantities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityBounds {
    /// Kernel: `‖K†‖_op · cond(K) · ‖y‖`; linear: `‖X†‖_op · ‖y‖`.
    pub b0: f64,
    /// Kernel: `‖K^{1/2}‖_op · B₀`; linear: `B₀`.
    pub beta1_hat: f64,
    /// `β̂₁²`.  Averaging these across datasets estimates the second moment,
    /// which is not the square of the averaged first moment; experiment
    /// harnesses report both.
    pub beta2_hat: f64,
}

/// Result of the excess-risk Monte Carlo audit.
#[derive(Debug, Clone, Serialize)]
pub struct ExcessRiskEstimate {
    /// Estimate of `E[I[f_{Si}] − inf I]` (mean over trials and indices).
    pub lhs_mean: f64,
    /// Standard error of the left side across trials.
    pub lhs_se: f64,
    /// Estimate of `E[V(f_{Si}, z_i) − V(f_S, z_i)]`.
    pub rhs_mean: f64,
    /// Standard error of the right side across trials.
    pub rhs_se: f64,
    /// `√(lhs_se² + rhs_se²)`.
    pub combined_se: f64,
    /// Whether `lhs ≤ rhs + 3·combined_se` (with the [`ZERO_FLOOR`] slack).
    pub lemma1_holds: bool,
    /// Estimate of the ERM bias `E[I_S[f_S]] − inf I`.
    pub erm_bias_mean: f64,
    /// Standard error of the ERM bias across trials.
    pub erm_bias_se: f64,
    /// Whether `erm_bias_mean ≤ 3·erm_bias_se` up to the floor — the
    /// "negative bias" property of empirical risk minimization.
    pub negbias_holds: bool,
    /// Number of Monte Carlo trials.
    pub trials: usize,
}

/// A noiseless linear-Gaussian data model: `x ~ N(0, I_d)`,
/// `y = ⟨w_true, x⟩`.
///
/// With identity input covariance the population risk of a linear predictor
/// `w` is exactly `‖w − w_true‖²`, so excess risks need no quadrature.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    /// Ambient dimension.
    pub d: usize,
    /// True weight vector.
    pub w_true: Vector,
}

impl GaussianModel {
    /// Draws a model with `w_true ~ N(0, I_d)` from a dedicated RNG stream.
    pub fn sample(d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("model dimension must be positive".into()));
        }
        let mut rng = stream_rng(seed, u64::MAX);
        Ok(GaussianModel {
            d,
            w_true: standard_normal_vector(&mut rng, d),
        })
    }

    /// Population risk of the predictor `w`: `‖w − w_true‖²`.
    pub fn population_risk(&self, w: &Vector) -> f64 {
        (w - &self.w_true).norm_squared()
    }
}

/// RKHS distance between two kernel solutions:
/// `‖f_S − f_{Si}‖_H = ‖K^{1/2}(c_S − c_{Si})‖`.
pub fn solution_diff_rkhs(g: &GramMatrix, c_full: &Vector, c_loo: &Vector) -> Result<f64> {
    let n = g.n();
    if c_full.len() != n || c_loo.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vectors ({}, {}) do not match a {n}-point Gram matrix",
            c_full.len(),
            c_loo.len()
        )));
    }
    let sqrt = psd_sqrt(&g.matrix)?;
    Ok((sqrt * (c_full - c_loo)).norm())
}

/// Mean over indices of the local-Lipschitz right-hand side for the square
/// loss:
///
/// ```text
/// (2M + κ(‖f_S‖_H + ‖f_{Si}‖_H)) · κ · ‖f_S − f_{Si}‖_H
/// ```
///
/// The solutions enter through their RKHS norms (`full_norm`, `loo_norms`)
/// and the per-index difference norms.  `m` must dominate every |yᵢ|; κ must
/// dominate the evaluation functional at the training points.
pub fn lemma2_rhs(
    y: &Vector,
    full_norm: f64,
    loo_norms: &[f64],
    diff_norms: &[f64],
    kappa: f64,
    m: f64,
) -> Result<f64> {
    let n = y.len();
    if loo_norms.len() != n || diff_norms.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "norm sequences ({}, {}) do not match {n} labels",
            loo_norms.len(),
            diff_norms.len()
        )));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput(format!(
            "evaluation constant κ = {kappa} must be positive"
        )));
    }
    let max_label = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if m < max_label || m < 0.0 {
        return Err(Error::InvalidInput(format!(
            "label bound M = {m} is violated by the data (max |y| = {max_label})"
        )));
    }
    let sum: f64 = (0..n)
        .map(|i| (2.0 * m + kappa * (full_norm + loo_norms[i])) * kappa * diff_norms[i])
        .sum();
    Ok(sum / n as f64)
}

/// The plug-in bound quantities for one dataset.
///
/// Kernel mode: `B₀ = ‖K†‖_op · cond(K) · ‖y‖` and `β̂₁ = ‖K^{1/2}‖_op · B₀`.
/// Linear mode: `β̂₁ = ‖X†‖_op · ‖y‖`, and `B₀` coincides with it (that
/// product is what plays B₀'s role in the linear perturbation bound).  In
/// both modes `β̂₂ = β̂₁²`.
pub fn stability_bounds(problem: &LsProblem, factor: &Pseudoinverse) -> Result<StabilityBounds> {
    let (b0, beta1_hat) = match problem {
        LsProblem::Kernel { y, .. } => {
            let cond = factor.effective_condition_number()?;
            let b0 = factor.pinv_operator_norm() * cond * y.norm();
            let sqrt_op = factor.sigma_max().sqrt();
            (b0, sqrt_op * b0)
        }
        LsProblem::Linear { y, .. } => {
            if factor.retained_rank == 0 {
                return Err(Error::RankZero);
            }
            let beta1 = factor.pinv_operator_norm() * y.norm();
            (beta1, beta1)
        }
    };
    Ok(StabilityBounds {
        b0,
        beta1_hat,
        beta2_hat: beta1_hat * beta1_hat,
    })
}

/// Slack used when flagging the audited inequalities.
const CHECK_TOL: f64 = 1e-10;

/// Per-index solution data shared by the kernel and linear audit paths.
struct LooSweep {
    deltas: Vec<f64>,
    diff_norms: Vec<f64>,
    loo_norms: Vec<f64>,
    full_norm: f64,
}

fn kernel_sweep(
    g: &GramMatrix,
    factor: &Pseudoinverse,
    y: &Vector,
    use_fast_updates: bool,
) -> Result<LooSweep> {
    let n = g.n();
    let sqrt_g = psd_sqrt(&g.matrix)?;
    let c_full = &factor.pinv * y;
    let preds_full = &g.matrix * &c_full;
    let full_norm = (&sqrt_g * &c_full).norm();

    let mut deltas = Vec::with_capacity(n);
    let mut diff_norms = Vec::with_capacity(n);
    let mut loo_norms = Vec::with_capacity(n);
    for i in 0..n {
        let pinv_loo = if use_fast_updates {
            loo_pinv_kernel(g, factor, i)?.pinv_loo
        } else {
            pseudoinverse(&zero_row_and_column(&g.matrix, i))?.pinv
        };
        let c_loo = &pinv_loo * y;
        let pred_loo = g.matrix.row(i).transpose().dot(&c_loo);
        let r_loo = y[i] - pred_loo;
        let r_full = y[i] - preds_full[i];
        deltas.push(r_loo * r_loo - r_full * r_full);
        diff_norms.push((&sqrt_g * (&c_full - &c_loo)).norm());
        loo_norms.push((&sqrt_g * &c_loo).norm());
    }
    Ok(LooSweep {
        deltas,
        diff_norms,
        loo_norms,
        full_norm,
    })
}

fn linear_sweep(
    x: &Matrix,
    factor: &Pseudoinverse,
    y: &Vector,
    use_fast_updates: bool,
) -> Result<LooSweep> {
    let n = x.ncols();
    let w_full = factor.pinv.transpose() * y;
    let full_norm = w_full.norm();

    let mut deltas = Vec::with_capacity(n);
    let mut diff_norms = Vec::with_capacity(n);
    let mut loo_norms = Vec::with_capacity(n);
    for i in 0..n {
        let pinv_loo = if use_fast_updates {
            loo_pinv_linear(x, factor, i)?.pinv_loo
        } else {
            pseudoinverse(&zero_column(x, i))?.pinv
        };
        let w_loo = pinv_loo.transpose() * y;
        let xi = x.column(i);
        let r_loo = y[i] - w_loo.dot(&xi);
        let r_full = y[i] - w_full.dot(&xi);
        deltas.push(r_loo * r_loo - r_full * r_full);
        diff_norms.push((&w_full - &w_loo).norm());
        loo_norms.push(w_loo.norm());
    }
    Ok(LooSweep {
        deltas,
        diff_norms,
        loo_norms,
        full_norm,
    })
}

/// Leave-one-out stability audit of a dataset.
///
/// For every index the minimum-norm solution without that point is built —
/// through the rank-one updates when `use_fast_updates` is set, by a fresh
/// SVD otherwise — and the loss delta at the held-out point, the solution
/// difference norm, the bound quantities, and the local-Lipschitz right-hand
/// side are assembled into a [`StabilityReport`].  The two paths agree to
/// `1e-8` on every field.
pub fn cvloo_empirical(
    data: &Dataset,
    kind: ProblemKind,
    use_fast_updates: bool,
) -> Result<StabilityReport> {
    let n = data.n();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "leave-one-out needs at least 2 points, got {n}"
        )));
    }

    let (sweep, bounds, kappa_used) = match kind {
        ProblemKind::Kernel(spec) => {
            let g = gram(spec, &data.x)?;
            let factor = pseudoinverse(&g.matrix)?;
            let sweep = kernel_sweep(&g, &factor, &data.y, use_fast_updates)?;
            let bounds = stability_bounds(
                &LsProblem::Kernel {
                    gram: &g,
                    y: &data.y,
                },
                &factor,
            )?;
            let kappa = kappa_bound(spec, &data.x).eval_constant();
            (sweep, bounds, kappa)
        }
        ProblemKind::Linear => {
            let factor = pseudoinverse(&data.x)?;
            let sweep = linear_sweep(&data.x, &factor, &data.y, use_fast_updates)?;
            let bounds = stability_bounds(
                &LsProblem::Linear {
                    x: &data.x,
                    y: &data.y,
                },
                &factor,
            )?;
            let kappa = kappa_bound(KernelSpec::Linear, &data.x).eval_constant();
            (sweep, bounds, kappa)
        }
    };

    let m_used = data.y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cvloo_mean = sweep.deltas.iter().sum::<f64>() / n as f64;
    let lemma2_rhs_mean = lemma2_rhs(
        &data.y,
        sweep.full_norm,
        &sweep.loo_norms,
        &sweep.diff_norms,
        kappa_used,
        m_used,
    )?;

    let almost_positivity = sweep.deltas.iter().all(|&d| d >= -CHECK_TOL);
    let lemma2_chain = cvloo_mean <= lemma2_rhs_mean + CHECK_TOL;
    let slack = CHECK_TOL * bounds.beta1_hat.max(1.0);
    let perturbation_norm = sweep.diff_norms.iter().all(|&d| d <= bounds.beta1_hat + slack);

    Ok(StabilityReport {
        per_index_delta: sweep.deltas,
        cvloo_mean,
        diff_rkhs_norms: sweep.diff_norms,
        b0: bounds.b0,
        beta1_hat: bounds.beta1_hat,
        beta2_hat: bounds.beta2_hat,
        lemma2_rhs_mean,
        bound_checks: BoundChecks {
            almost_positivity,
            lemma2_chain,
            perturbation_norm,
        },
        kappa_used,
        m_used,
    })
}

/// Replace-one stability estimate.
///
/// For each fresh draw `z = (x_z, y_z)` from `draw` and each index `i`, the
/// solution trained on the dataset with point `i` replaced by `z` is
/// compared against the original solution, both evaluated at `z`:
///
/// ```text
/// V(f_S, z) − V(f_{(Si, z)}, z)
/// ```
///
/// The mean is over indices and draws; the standard error treats each
/// draw's index-average as one sample.
pub fn cvro_empirical<F>(
    data: &Dataset,
    kind: ProblemKind,
    mut draw: F,
    draws: usize,
) -> Result<CvroEstimate>
where
    F: FnMut() -> (Vector, f64),
{
    let n = data.n();
    if n < 1 {
        return Err(Error::InvalidInput("replace-one needs at least 1 point".into()));
    }
    if draws == 0 {
        return Err(Error::InvalidInput("replace-one needs at least 1 draw".into()));
    }

    // The original solution is fixed across draws.
    let predict_full: Box<dyn Fn(&Vector) -> Result<f64>> = match kind {
        ProblemKind::Kernel(spec) => {
            let g = gram(spec, &data.x)?;
            let factor = pseudoinverse(&g.matrix)?;
            let c = &factor.pinv * &data.y;
            let x = data.x.clone();
            Box::new(move |q: &Vector| {
                let mut acc = 0.0;
                for j in 0..x.ncols() {
                    acc += c[j] * crate::kernel::kernel_eval(spec, &x.column(j).clone_owned(), q)?;
                }
                Ok(acc)
            })
        }
        ProblemKind::Linear => {
            let factor = pseudoinverse(&data.x)?;
            let w = factor.pinv.transpose() * &data.y;
            Box::new(move |q: &Vector| Ok(w.dot(q)))
        }
    };

    let mut per_draw = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (x_z, y_z) = draw();
        if x_z.len() != data.dim() {
            return Err(Error::DimensionMismatch(format!(
                "replacement point has dimension {}, dataset has {}",
                x_z.len(),
                data.dim()
            )));
        }
        let v_full = {
            let r = y_z - predict_full(&x_z)?;
            r * r
        };

        let mut acc = 0.0;
        for i in 0..n {
            let mut x_repl = data.x.clone();
            x_repl.column_mut(i).copy_from(&x_z);
            let mut y_repl = data.y.clone();
            y_repl[i] = y_z;

            let pred_at_z = match kind {
                ProblemKind::Kernel(spec) => {
                    let g = gram(spec, &x_repl)?;
                    let factor = pseudoinverse(&g.matrix)?;
                    let c = &factor.pinv * &y_repl;
                    let mut p = 0.0;
                    for j in 0..n {
                        p += c[j]
                            * crate::kernel::kernel_eval(
                                spec,
                                &x_repl.column(j).clone_owned(),
                                &x_z,
                            )?;
                    }
                    p
                }
                ProblemKind::Linear => {
                    let factor = pseudoinverse(&x_repl)?;
                    let w = factor.pinv.transpose() * &y_repl;
                    w.dot(&x_z)
                }
            };
            let r = y_z - pred_at_z;
            acc += v_full - r * r;
        }
        per_draw.push(acc / n as f64);
    }

    let mean = per_draw.iter().sum::<f64>() / draws as f64;
    let standard_error = standard_error(&per_draw);
    Ok(CvroEstimate {
        mean,
        standard_error,
        draws,
    })
}

/// Sample standard error of the mean (zero for a single sample).
fn standard_error(samples: &[f64]) -> f64 {
    let k = samples.len();
    if k < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / k as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1) as f64;
    (var / k as f64).sqrt()
}

/// Monte Carlo audit of the excess-risk-versus-CVloo lemma on a noiseless
/// Gaussian linear model.
///
/// Each trial draws a dataset of `n` points from `model`, forms the
/// minimum-norm solution and all leave-one-out solutions, and records three
/// per-trial averages: the excess population risk of the leave-one-out
/// solutions (left side), the CVloo loss deltas (right side), and the
/// empirical risk of the full solution (ERM bias).  The lemma asserts
/// LHS ≤ RHS up to Monte Carlo error; realizability makes `inf I = 0`.
///
/// The leave-one-out solutions are recomputed by SVD here: with `n > d` the
/// deleted basis vector leaves the row space and the rank-one update
/// formulas do not apply.
pub fn excess_risk_mc(
    model: &GaussianModel,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ExcessRiskEstimate> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "excess-risk audit needs at least 2 points, got {n}"
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidInput(format!(
            "excess-risk audit needs at least 2 trials, got {trials}"
        )));
    }

    let d = model.d;
    let per_trial: Vec<Result<(f64, f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(seed, trial as u64);
            let x = standard_normal_matrix(&mut rng, d, n);
            let y = x.transpose() * &model.w_true;

            let factor = pseudoinverse(&x)?;
            let w_full = factor.pinv.transpose() * &y;
            let residual_full = x.transpose() * &w_full - &y;
            let erm_bias = residual_full.norm_squared() / n as f64;

            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for i in 0..n {
                let loo_factor = pseudoinverse(&zero_column(&x, i))?;
                let w_loo = loo_factor.pinv.transpose() * &y;
                lhs += model.population_risk(&w_loo);
                let xi = x.column(i);
                let r_loo = y[i] - w_loo.dot(&xi);
                let r_full = y[i] - w_full.dot(&xi);
                rhs += r_loo * r_loo - r_full * r_full;
            }
            Ok((lhs / n as f64, rhs / n as f64, erm_bias))
        })
        .collect();

    let mut lhs_samples = Vec::with_capacity(trials);
    let mut rhs_samples = Vec::with_capacity(trials);
    let mut bias_samples = Vec::with_capacity(trials);
    for r in per_trial {
        let (l, r_, b) = r?;
        lhs_samples.push(l);
        rhs_samples.push(r_);
        bias_samples.push(b);
    }

    let lhs_mean = lhs_samples.iter().sum::<f64>() / trials as f64;
    let rhs_mean = rhs_samples.iter().sum::<f64>() / trials as f64;
    let erm_bias_mean = bias_samples.iter().sum::<f64>() / trials as f64;
    let lhs_se = standard_error(&lhs_samples);
    let rhs_se = standard_error(&rhs_samples);
    let erm_bias_se = standard_error(&bias_samples);
    let combined_se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();

    Ok(ExcessRiskEstimate {
        lhs_mean,
        lhs_se,
        rhs_mean,
        rhs_se,
        combined_se,
        lemma1_holds: lhs_mean <= rhs_mean + 3.0 * combined_se + ZERO_FLOOR,
        erm_bias_mean,
        erm_bias_se,
        negbias_holds: erm_bias_mean <= 3.0 * erm_bias_se + ZERO_FLOOR,
        trials,
    })
}
