//! Interpolating least-squares solutions: minimum-norm, null-space-perturbed,
//! Tikhonov-regularized, and gradient-descent, for both kernel and linear
//! models, plus prediction and RKHS norms.
//!
//! The kernel solution family is c = K†y + (I − K†K)v; the linear family is
//! wᵀ = yᵀX† + vᵀ(I − XX†). v = 0 gives the minimum-norm member. In the
//! kernel case the (I − K†K)v component lies in the null space of the PSD
//! Gram matrix, so it has zero RKHS norm and never changes the prediction
//! function — only the coefficient vector. In the linear case v genuinely
//! moves the predictor off the row space, which is what makes the
//! MSE-vs-‖v‖ experiment informative.

use crate::kernel::{fingerprint, kernel_eval, GramMatrix, KernelSpec};
use crate::pinv::{operator_norm, pseudoinverse, psd_sqrt, Pseudoinverse};
use crate::{Error, Matrix, Result, Vector};

/// Residual tolerance below which a solution counts as interpolating:
/// ‖Kc − y‖ ≤ tol·max(1, ‖y‖). Exact interpolation is a real-arithmetic
/// statement; floating point needs the threshold.
pub const INTERPOLATION_TOL: f64 = 1e-8;

/// How a solution was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionMode {
    MinNorm,
    Perturbed,
    Tikhonov,
    GradientDescent,
}

/// A fitted coefficient vector with its construction provenance.
///
/// `coefficients` is c (length n) for kernel solutions and w (length d) for
/// linear ones; `kernel` is `None` exactly in the linear case. The
/// fingerprint ties the solution to the training data it was built from and
/// is re-checked by [`predict`].
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub mode: SolutionMode,
    pub coefficients: Vector,
    pub v: Option<Vector>,
    pub lambda: Option<f64>,
    pub kernel: Option<KernelSpec>,
    pub training_fingerprint: u64,
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{name} has length {got}, expected {want}")))
    }
}

/// Minimum-norm kernel interpolant c = K†y.
pub fn min_norm_kernel(g: &GramMatrix, y: &Vector) -> Result<Interpolant> {
    let f = pseudoinverse(&g.matrix)?;
    min_norm_kernel_with(g, &f, y)
}

/// [`min_norm_kernel`] reusing an existing factorization of the Gram matrix.
pub fn min_norm_kernel_with(
    g: &GramMatrix,
    f: &Pseudoinverse,
    y: &Vector,
) -> Result<Interpolant> {
    check_len("y", y.len(), g.n())?;
    Ok(Interpolant {
        mode: SolutionMode::MinNorm,
        coefficients: &f.pinv * y,
        v: None,
        lambda: None,
        kernel: Some(g.kernel),
        training_fingerprint: g.source_fingerprint,
    })
}

/// General kernel interpolant c = K†y + (I − K†K)v.
pub fn general_kernel_interpolant(g: &GramMatrix, y: &Vector, v: &Vector) -> Result<Interpolant> {
    let f = pseudoinverse(&g.matrix)?;
    general_kernel_interpolant_with(g, &f, y, v)
}

/// [`general_kernel_interpolant`] reusing an existing factorization.
pub fn general_kernel_interpolant_with(
    g: &GramMatrix,
    f: &Pseudoinverse,
    y: &Vector,
    v: &Vector,
) -> Result<Interpolant> {
    check_len("y", y.len(), g.n())?;
    check_len("v", v.len(), g.n())?;
    let null_component = v - &f.pinv * (&g.matrix * v);
    Ok(Interpolant {
        mode: SolutionMode::Perturbed,
        coefficients: &f.pinv * y + null_component,
        v: Some(v.clone()),
        lambda: None,
        kernel: Some(g.kernel),
        training_fingerprint: g.source_fingerprint,
    })
}

/// Minimum-norm linear solution wᵀ = yᵀX† (X is d×n, samples as columns).
pub fn min_norm_linear(x: &Matrix, y: &Vector) -> Result<Interpolant> {
    let f = pseudoinverse(x)?;
    min_norm_linear_with(x, &f, y)
}

/// [`min_norm_linear`] reusing an existing factorization of X.
pub fn min_norm_linear_with(x: &Matrix, f: &Pseudoinverse, y: &Vector) -> Result<Interpolant> {
    check_len("y", y.len(), x.ncols())?;
    Ok(Interpolant {
        mode: SolutionMode::MinNorm,
        coefficients: f.pinv.transpose() * y,
        v: None,
        lambda: None,
        kernel: None,
        training_fingerprint: fingerprint(x),
    })
}

/// General linear interpolant wᵀ = yᵀX† + vᵀ(I − XX†).
pub fn general_linear_interpolant(x: &Matrix, y: &Vector, v: &Vector) -> Result<Interpolant> {
    let f = pseudoinverse(x)?;
    general_linear_interpolant_with(x, &f, y, v)
}

/// [`general_linear_interpolant`] reusing an existing factorization.
pub fn general_linear_interpolant_with(
    x: &Matrix,
    f: &Pseudoinverse,
    y: &Vector,
    v: &Vector,
) -> Result<Interpolant> {
    check_len("y", y.len(), x.ncols())?;
    check_len("v", v.len(), x.nrows())?;
    // (I − XX†)v, with XX† applied as two matrix-vector products.
    let null_component = v - x * (&f.pinv * v);
    Ok(Interpolant {
        mode: SolutionMode::Perturbed,
        coefficients: f.pinv.transpose() * y + null_component,
        v: Some(v.clone()),
        lambda: None,
        kernel: None,
        training_fingerprint: fingerprint(x),
    })
}

/// Tikhonov (ridge) solution c = (K + λI)⁻¹y via a Cholesky solve.
///
/// λ > 0 makes the system positive definite, so no explicit inverse or SVD
/// is needed; as λ → 0 on a full-rank Gram this converges to the
/// minimum-norm interpolant.
pub fn tikhonov_kernel(g: &GramMatrix, y: &Vector, lambda: f64) -> Result<Interpolant> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    check_len("y", y.len(), g.n())?;
    let mut regularized = g.matrix.clone();
    for i in 0..g.n() {
        regularized[(i, i)] += lambda;
    }
    let chol = nalgebra::Cholesky::new(regularized).ok_or(Error::SolveFailed)?;
    Ok(Interpolant {
        mode: SolutionMode::Tikhonov,
        coefficients: chol.solve(y),
        v: None,
        lambda: Some(lambda),
        kernel: Some(g.kernel),
        training_fingerprint: g.source_fingerprint,
    })
}

/// The two least-squares problems gradient descent can run on. Both minimize
/// ½‖Aᵀξ − y‖² (A = K symmetric for the kernel problem, A = X for the linear
/// one), whose gradient is A(Aᵀξ − y).
pub enum LsProblem<'a> {
    Kernel { gram: &'a GramMatrix, y: &'a Vector },
    Linear { x: &'a Matrix, y: &'a Vector },
}

/// Trailing window length for the divergence detector.
const DIVERGENCE_WINDOW: usize = 25;
/// Loss growth factor over a window that counts as divergence. A valid step
/// size decreases the loss monotonically, so sustained growth means the
/// σ_max estimate was wrong for the data handed in.
const DIVERGENCE_FACTOR: f64 = 1.5;

/// Full-batch gradient descent on the empirical square loss, initialized at
/// zero.
///
/// Zero initialization is what makes the iterates converge to the
/// minimum-norm solution: every gradient lies in the range of A, so the
/// iterates never acquire a null-space component. The step size must satisfy
/// step < 2/σ_max(A)² or the iteration is rejected up front; a divergence
/// detector additionally aborts if the loss grows over a trailing window.
pub fn gradient_descent_ls(problem: &LsProblem, step: f64, iters: usize) -> Result<Interpolant> {
    descend(problem, step, iters, |_, _| {})
}

/// [`gradient_descent_ls`] that also snapshots the iterate every
/// `snapshot_every` iterations (and at the end), for convergence audits.
pub fn gradient_descent_ls_traced(
    problem: &LsProblem,
    step: f64,
    iters: usize,
    snapshot_every: usize,
) -> Result<(Interpolant, Vec<Vector>)> {
    let mut snapshots = Vec::new();
    let every = snapshot_every.max(1);
    let sol = descend(problem, step, iters, |t, xi| {
        if t % every == 0 || t == iters {
            snapshots.push(xi.clone());
        }
    })?;
    Ok((sol, snapshots))
}

fn descend(
    problem: &LsProblem,
    step: f64,
    iters: usize,
    mut observe: impl FnMut(usize, &Vector),
) -> Result<Interpolant> {
    let (a, y, kernel, fp): (&Matrix, &Vector, Option<KernelSpec>, u64) = match problem {
        LsProblem::Kernel { gram, y } => {
            check_len("y", y.len(), gram.n())?;
            (&gram.matrix, y, Some(gram.kernel), gram.source_fingerprint)
        }
        LsProblem::Linear { x, y } => {
            check_len("y", y.len(), x.ncols())?;
            (x, y, None, fingerprint(x))
        }
    };
    let sigma_max = operator_norm(a)?;
    let limit = if sigma_max > 0.0 { 2.0 / (sigma_max * sigma_max) } else { f64::INFINITY };
    if !(step > 0.0) || step >= limit {
        return Err(Error::StepTooLarge { step, limit });
    }

    let mut xi = Vector::zeros(a.nrows());
    let mut window_loss = f64::INFINITY;
    // Below this, the loss is rounding noise around the converged residual
    // and ratio comparisons are meaningless.
    let divergence_floor = 0.5 * y.norm_squared() * 1e-24 + f64::MIN_POSITIVE;
    observe(0, &xi);
    for t in 1..=iters {
        let residual = a.transpose() * &xi - y;
        let loss = 0.5 * residual.norm_squared();
        if !loss.is_finite()
            || (loss > window_loss * DIVERGENCE_FACTOR && loss > divergence_floor)
        {
            return Err(Error::Divergence { iteration: t });
        }
        if (t - 1) % DIVERGENCE_WINDOW == 0 {
            window_loss = loss;
        }
        xi -= step * (a * residual);
        observe(t, &xi);
    }
    Ok(Interpolant {
        mode: SolutionMode::GradientDescent,
        coefficients: xi,
        v: None,
        lambda: None,
        kernel,
        training_fingerprint: fp,
    })
}

/// Evaluate a solution at query points (d×m, one query per column).
///
/// Kernel solutions predict Σⱼ cⱼ·K(xⱼ, q); linear solutions predict wᵀq.
/// The supplied training matrix must be the one the solution was fitted on
/// (checked by fingerprint).
pub fn predict(sol: &Interpolant, training_x: &Matrix, queries: &Matrix) -> Result<Vector> {
    if fingerprint(training_x) != sol.training_fingerprint {
        return Err(Error::FingerprintMismatch);
    }
    if queries.nrows() != training_x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "queries have dimension {}, training data has {}",
            queries.nrows(),
            training_x.nrows()
        )));
    }
    match sol.kernel {
        Some(spec) => {
            check_len("coefficients", sol.coefficients.len(), training_x.ncols())?;
            let mut out = Vector::zeros(queries.ncols());
            for (qi, q) in queries.column_iter().enumerate() {
                let mut acc = 0.0;
                for (j, xj) in training_x.column_iter().enumerate() {
                    acc += sol.coefficients[j]
                        * kernel_eval(spec, &xj.into_owned(), &q.into_owned())?;
                }
                out[qi] = acc;
            }
            Ok(out)
        }
        None => {
            check_len("coefficients", sol.coefficients.len(), training_x.nrows())?;
            Ok(queries.transpose() * &sol.coefficients)
        }
    }
}

/// RKHS norm of the function Σⱼ pⱼ·K(xⱼ,·): ‖K^{1/2}p‖ = √(pᵀKp).
///
/// Computed through the symmetric square root so rounding-level negative
/// curvature in K is clamped rather than producing NaN from a bare sqrt.
pub fn rkhs_norm(g: &GramMatrix, p: &Vector) -> Result<f64> {
    check_len("p", p.len(), g.n())?;
    let s = psd_sqrt(&g.matrix)?;
    Ok((s * p).norm())
}

/// [`rkhs_norm`] reusing a precomputed square root of the Gram matrix.
pub fn rkhs_norm_with_sqrt(sqrt_g: &Matrix, p: &Vector) -> f64 {
    (sqrt_g * p).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gram;
    use crate::sampling::{standard_normal_matrix, standard_normal_vector, stream_rng};

    fn rbf_gram(d: usize, n: usize, seed: u64) -> (Matrix, GramMatrix) {
        let x = standard_normal_matrix(&mut stream_rng(seed, 0), d, n);
        let g = gram(KernelSpec::rbf(5.0).unwrap(), &x).unwrap();
        (x, g)
    }

    #[test]
    fn identity_gram_min_norm_gives_y() {
        let x = Matrix::identity(3, 3);
        let g = GramMatrix {
            matrix: Matrix::identity(3, 3),
            kernel: KernelSpec::Linear,
            source_fingerprint: fingerprint(&x),
        };
        let y = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let sol = min_norm_kernel(&g, &y).unwrap();
        assert!((sol.coefficients.clone() - &y).norm() < 1e-14);
        assert_eq!(sol.mode, SolutionMode::MinNorm);
        assert!(sol.v.is_none());
    }

    #[test]
    fn rank_deficient_gram_with_y_in_range_interpolates() {
        // G of rank 3 in a 6-dimensional coefficient space; y constructed
        // inside the range of G, so the residual must vanish.
        let p = standard_normal_matrix(&mut stream_rng(10, 0), 6, 3);
        let gmat = &p * p.transpose();
        let g = GramMatrix {
            matrix: gmat.clone(),
            kernel: KernelSpec::Linear,
            source_fingerprint: 0,
        };
        let y = &gmat * standard_normal_vector(&mut stream_rng(10, 1), 6);
        let sol = min_norm_kernel(&g, &y).unwrap();
        let residual = (&gmat * &sol.coefficients - &y).norm();
        assert!(residual < 1e-10 * y.norm().max(1.0), "residual {residual}");
    }

    #[test]
    fn full_rank_rbf_gram_training_mse_is_tiny() {
        let (_, g) = rbf_gram(5, 15, 11);
        let y = standard_normal_vector(&mut stream_rng(11, 1), 15);
        let sol = min_norm_kernel(&g, &y).unwrap();
        let residual = &g.matrix * &sol.coefficients - &y;
        let mse = residual.norm_squared() / 15.0;
        assert!(mse <= 1e-12, "training MSE {mse}");
    }

    #[test]
    fn zero_v_matches_min_norm_exactly_in_function_and_nearly_in_coefficients() {
        let (_, g) = rbf_gram(4, 10, 12);
        let y = standard_normal_vector(&mut stream_rng(12, 1), 10);
        let base = min_norm_kernel(&g, &y).unwrap();
        let zero_v = general_kernel_interpolant(&g, &y, &Vector::zeros(10)).unwrap();
        assert!((base.coefficients - zero_v.coefficients).norm() < 1e-12);
        assert_eq!(zero_v.mode, SolutionMode::Perturbed);
    }

    #[test]
    fn full_rank_gram_ignores_v_entirely() {
        let (_, g) = rbf_gram(4, 12, 13);
        let y = standard_normal_vector(&mut stream_rng(13, 1), 12);
        let v = standard_normal_vector(&mut stream_rng(13, 2), 12) * 10.0;
        let base = min_norm_kernel(&g, &y).unwrap();
        let perturbed = general_kernel_interpolant(&g, &y, &v).unwrap();
        // I − K†K vanishes at full rank, up to rounding scaled by cond(K).
        assert!((base.coefficients - perturbed.coefficients).norm() < 1e-9 * v.norm());
    }

    #[test]
    fn singular_gram_perturbation_never_moves_predictions() {
        // Duplicated sample points make the Gram matrix singular, giving
        // (I − K†K)v a genuinely nonzero null component — which still cannot
        // move predictions because null(K) functions have zero RKHS norm.
        let mut x = standard_normal_matrix(&mut stream_rng(14, 0), 3, 8);
        let dup = x.column(1).into_owned();
        x.set_column(5, &dup); // duplicate a point
        let g = gram(KernelSpec::rbf(2.0).unwrap(), &x).unwrap();
        let f = pseudoinverse(&g.matrix).unwrap();
        assert!(f.retained_rank < 8, "Gram should be singular");
        let cond = f.effective_condition_number().unwrap();

        let mut y = standard_normal_vector(&mut stream_rng(14, 1), 8);
        y[5] = y[1]; // consistent labels on the duplicated point
        let base = min_norm_kernel_with(&g, &f, &y).unwrap();
        let queries = standard_normal_matrix(&mut stream_rng(14, 2), 3, 30);
        let base_pred = predict(&base, &x, &queries).unwrap();

        for t in 0..5 {
            let v = standard_normal_vector(&mut stream_rng(14, 3 + t), 8);
            let pert = general_kernel_interpolant_with(&g, &f, &y, &v).unwrap();
            let null_size = (&pert.coefficients - &base.coefficients).norm();
            assert!(null_size > 1e-8, "perturbation should move coefficients");
            let pred = predict(&pert, &x, &queries).unwrap();
            let tol = 1e-6 * cond * v.norm();
            assert!((pred - &base_pred).norm() < tol, "prediction moved more than {tol}");
        }
    }

    #[test]
    fn linear_identity_and_single_column_cases() {
        let x = Matrix::identity(3, 3);
        let y = Vector::from_vec(vec![2.0, 0.0, -1.0]);
        let sol = min_norm_linear(&x, &y).unwrap();
        assert!((sol.coefficients - &y).norm() < 1e-14);

        let x = Matrix::from_vec(2, 1, vec![1.0, 0.0]);
        let y = Vector::from_vec(vec![3.0]);
        let sol = min_norm_linear(&x, &y).unwrap();
        assert!((sol.coefficients - Vector::from_vec(vec![3.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn min_norm_linear_is_smallest_among_interpolants() {
        let x = standard_normal_matrix(&mut stream_rng(15, 0), 50, 10);
        let w_true = standard_normal_vector(&mut stream_rng(15, 1), 50);
        let y = x.transpose() * &w_true;
        let f = pseudoinverse(&x).unwrap();
        let base = min_norm_linear_with(&x, &f, &y).unwrap();
        let base_norm = base.coefficients.norm();
        for t in 0..100 {
            let v = standard_normal_vector(&mut stream_rng(15, 2 + t), 50);
            let other = general_linear_interpolant_with(&x, &f, &y, &v).unwrap();
            // Every member interpolates…
            let residual = (x.transpose() * &other.coefficients - &y).norm();
            assert!(residual <= INTERPOLATION_TOL * y.norm().max(1.0));
            // …and none is shorter than the pseudoinverse solution.
            assert!(other.coefficients.norm() >= base_norm - 1e-10);
        }
    }

    #[test]
    fn row_space_v_is_annihilated_and_null_v_grows_distance() {
        let x = standard_normal_matrix(&mut stream_rng(16, 0), 12, 4);
        let y = standard_normal_vector(&mut stream_rng(16, 1), 4);
        let f = pseudoinverse(&x).unwrap();
        let base = min_norm_linear_with(&x, &f, &y).unwrap();

        // v in the row space (= span of X's columns here) changes nothing.
        let v_row = &x * standard_normal_vector(&mut stream_rng(16, 2), 4);
        let same = general_linear_interpolant_with(&x, &f, &y, &v_row).unwrap();
        assert!((same.coefficients - &base.coefficients).norm() < 1e-10 * v_row.norm());

        // Growing ‖v‖ along a fixed null direction strictly grows ‖ŵ − w†‖.
        let raw = standard_normal_vector(&mut stream_rng(16, 3), 12);
        let null_dir = &raw - &x * (&f.pinv * &raw);
        let null_dir = &null_dir / null_dir.norm();
        let mut last = 0.0;
        for scale in [0.5, 1.0, 2.0, 4.0] {
            let sol =
                general_linear_interpolant_with(&x, &f, &y, &(&null_dir * scale)).unwrap();
            let dist = (sol.coefficients - &base.coefficients).norm();
            assert!(dist > last, "distance should grow: {dist} after {last}");
            last = dist;
        }
    }

    #[test]
    fn tikhonov_identity_gram_halves_y() {
        let g = GramMatrix {
            matrix: Matrix::identity(4, 4),
            kernel: KernelSpec::Linear,
            source_fingerprint: 0,
        };
        let y = standard_normal_vector(&mut stream_rng(17, 0), 4);
        let sol = tikhonov_kernel(&g, &y, 1.0).unwrap();
        assert!((sol.coefficients - &y * 0.5).norm() < 1e-14);
        assert_eq!(sol.lambda, Some(1.0));
    }

    #[test]
    fn tikhonov_approaches_min_norm_as_lambda_vanishes() {
        // d = 15 keeps the Gram's condition number in the hundreds, so the
        // O(λ·cond) ridge bias sits well inside the 1e-4 gate.
        let (_, g) = rbf_gram(15, 20, 18);
        let y = standard_normal_vector(&mut stream_rng(18, 1), 20);
        let f = pseudoinverse(&g.matrix).unwrap();
        let base = min_norm_kernel_with(&g, &f, &y).unwrap();
        let lambda = 1e-8 * f.sigma_max();
        let ridge = tikhonov_kernel(&g, &y, lambda).unwrap();
        let rel = (ridge.coefficients - &base.coefficients).norm() / base.coefficients.norm();
        assert!(rel <= 1e-4, "relative gap {rel}");
    }

    #[test]
    fn tikhonov_large_lambda_shrinks_to_zero() {
        let (_, g) = rbf_gram(5, 10, 19);
        let y = standard_normal_vector(&mut stream_rng(19, 1), 10);
        let sol = tikhonov_kernel(&g, &y, 1e9).unwrap();
        assert!(sol.coefficients.norm() <= y.norm() / 1e8);
    }

    #[test]
    fn tikhonov_rejects_bad_lambda() {
        let (_, g) = rbf_gram(3, 5, 20);
        let y = Vector::zeros(5);
        assert!(tikhonov_kernel(&g, &y, 0.0).is_err());
        assert!(tikhonov_kernel(&g, &y, -1.0).is_err());
    }

    #[test]
    fn gradient_descent_zero_labels_stays_at_zero() {
        let x = standard_normal_matrix(&mut stream_rng(21, 0), 6, 3);
        let y = Vector::zeros(3);
        let sol = gradient_descent_ls(&LsProblem::Linear { x: &x, y: &y }, 1e-2, 50).unwrap();
        assert_eq!(sol.coefficients, Vector::zeros(6));
    }

    #[test]
    fn gradient_descent_first_step_is_scaled_gradient() {
        let x = standard_normal_matrix(&mut stream_rng(22, 0), 5, 2);
        let y = standard_normal_vector(&mut stream_rng(22, 1), 2);
        let step = 1e-3;
        let sol = gradient_descent_ls(&LsProblem::Linear { x: &x, y: &y }, step, 1).unwrap();
        let expected = &x * &y * step; // −step·X(Xᵀ0 − y)
        assert!((sol.coefficients - expected).norm() < 1e-15);
    }

    #[test]
    fn gradient_descent_reaches_min_norm_linear() {
        let x = standard_normal_matrix(&mut stream_rng(23, 0), 20, 5);
        let w_true = standard_normal_vector(&mut stream_rng(23, 1), 20);
        let y = x.transpose() * &w_true;
        let f = pseudoinverse(&x).unwrap();
        let base = min_norm_linear_with(&x, &f, &y).unwrap();
        let step = 0.9 * 2.0 / f.sigma_max().powi(2);
        let sol = gradient_descent_ls(&LsProblem::Linear { x: &x, y: &y }, step, 10_000).unwrap();
        let rel = (sol.coefficients - &base.coefficients).norm() / base.coefficients.norm();
        assert!(rel <= 1e-6, "relative distance {rel}");
    }

    #[test]
    fn gradient_descent_kernel_problem_reaches_min_norm() {
        // Narrow bandwidth keeps the Gram near identity; the kernel descent
        // contracts at a rate governed by cond(K)², so a well-conditioned
        // instance converges in a few hundred iterations.
        let x = standard_normal_matrix(&mut stream_rng(24, 0), 4, 12);
        let g = gram(KernelSpec::rbf(1.0).unwrap(), &x).unwrap();
        let y = standard_normal_vector(&mut stream_rng(24, 1), 12);
        let f = pseudoinverse(&g.matrix).unwrap();
        let base = min_norm_kernel_with(&g, &f, &y).unwrap();
        let step = 0.9 * 2.0 / f.sigma_max().powi(2);
        let sol =
            gradient_descent_ls(&LsProblem::Kernel { gram: &g, y: &y }, step, 20_000).unwrap();
        let rel = (sol.coefficients - &base.coefficients).norm() / base.coefficients.norm();
        assert!(rel <= 1e-6, "relative distance {rel}");
    }

    #[test]
    fn gradient_descent_rejects_unstable_step() {
        let x = standard_normal_matrix(&mut stream_rng(25, 0), 8, 3);
        let y = standard_normal_vector(&mut stream_rng(25, 1), 3);
        let sigma_max = operator_norm(&x).unwrap();
        let too_big = 2.0 / (sigma_max * sigma_max);
        let err = gradient_descent_ls(&LsProblem::Linear { x: &x, y: &y }, too_big, 10);
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn predictions_reproduce_training_labels_at_full_rank() {
        let (x, g) = rbf_gram(4, 14, 26);
        let y = standard_normal_vector(&mut stream_rng(26, 1), 14);
        let sol = min_norm_kernel(&g, &y).unwrap();
        let preds = predict(&sol, &x, &x).unwrap();
        assert!((preds - &y).norm() <= 1e-8 * y.norm().max(1.0));
    }

    #[test]
    fn zero_coefficients_predict_zero_and_linear_matches_dot_oracle() {
        let x = standard_normal_matrix(&mut stream_rng(27, 0), 6, 4);
        let zero = Interpolant {
            mode: SolutionMode::MinNorm,
            coefficients: Vector::zeros(4),
            v: None,
            lambda: None,
            kernel: Some(KernelSpec::Linear),
            training_fingerprint: fingerprint(&x),
        };
        let queries = standard_normal_matrix(&mut stream_rng(27, 1), 6, 9);
        assert_eq!(predict(&zero, &x, &queries).unwrap(), Vector::zeros(9));

        let y = standard_normal_vector(&mut stream_rng(27, 2), 4);
        let sol = min_norm_linear(&x, &y).unwrap();
        let preds = predict(&sol, &x, &queries).unwrap();
        for (qi, q) in queries.column_iter().enumerate() {
            let oracle = q.dot(&sol.coefficients);
            assert!((preds[qi] - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn predict_rejects_foreign_training_data() {
        let (x, g) = rbf_gram(3, 6, 28);
        let y = standard_normal_vector(&mut stream_rng(28, 1), 6);
        let sol = min_norm_kernel(&g, &y).unwrap();
        let other = standard_normal_matrix(&mut stream_rng(28, 2), 3, 6);
        assert_eq!(predict(&sol, &other, &x).unwrap_err(), Error::FingerprintMismatch);
    }

    #[test]
    fn rkhs_norm_identity_gram_is_euclidean_and_zero_is_zero() {
        let g = GramMatrix {
            matrix: Matrix::identity(5, 5),
            kernel: KernelSpec::Linear,
            source_fingerprint: 0,
        };
        let p = standard_normal_vector(&mut stream_rng(29, 0), 5);
        assert!((rkhs_norm(&g, &p).unwrap() - p.norm()).abs() < 1e-12);
        assert_eq!(rkhs_norm(&g, &Vector::zeros(5)).unwrap(), 0.0);
    }

    #[test]
    fn rkhs_norm_matches_quadratic_form() {
        let p_mat = standard_normal_matrix(&mut stream_rng(30, 0), 7, 7);
        let gmat = &p_mat * p_mat.transpose();
        let g =
            GramMatrix { matrix: gmat.clone(), kernel: KernelSpec::Linear, source_fingerprint: 0 };
        let p = standard_normal_vector(&mut stream_rng(30, 1), 7);
        let direct = (p.transpose() * &gmat * &p)[(0, 0)].sqrt();
        let via_sqrt = rkhs_norm(&g, &p).unwrap();
        assert!((via_sqrt - direct).abs() <= 1e-8 * direct.max(1.0));
    }
}
