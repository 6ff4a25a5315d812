//! Numerical core and experiment harness for interpolating (ridgeless) least
//! squares regression.
//!
//! The crate is organized around the minimum-norm interpolant `c = K†y`
//! (kernel form) / `wᵀ = yᵀX†` (linear form) and the machinery needed to study
//! its stability and conditioning:
//!
//! - [`pinv`] — truncated-SVD Moore-Penrose pseudoinverse, operator norms,
//!   effective condition number, symmetric PSD square root.
//! - [`kernel`] — linear and Gaussian (RBF) kernels, Gram matrices, and the
//!   boundedness constant κ used by the stability bounds.
//! - [`interpolant`] — minimum-norm, null-space-perturbed, Tikhonov, and
//!   gradient-descent solutions, plus prediction and RKHS norms.
//! - [`loo`] — fast leave-one-out pseudoinverse updates via the rank-one
//!   modification formulas of Meyer (1973), with projector identities and an
//!   O(n²) closed form.
//! - [`stability`] — empirical CVloo/CVro stability, the B₀/β̂₁/β̂₂ bound
//!   quantities, the local-Lipschitz inequality chain, and Monte Carlo
//!   verification of the excess-risk lemmas.
//! - [`experiment`] — deterministic, seeded reproductions of the MSE-vs-norm
//!   and double-descent experiments plus a LOO-update benchmark, emitting CSV
//!   and JSON result tables.
//! - [`selftest`] — fast end-to-end invariant suites for the CLI `selftest`
//!   subcommand.
//!
//! Matrices are dense column-major 64-bit floats ([`nalgebra::DMatrix`]);
//! data matrices are d×n with one sample per column.

pub mod experiment;
pub mod interpolant;
pub mod kernel;
pub mod loo;
pub mod pinv;
pub mod sampling;
pub mod selftest;
pub mod stability;

/// Dense column-major matrix of f64 entries.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector of f64 entries.
pub type Vector = nalgebra::DVector<f64>;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// Numerical routines never return silent garbage: non-convergence,
/// violated applicability conditions, and inconsistent inputs all surface
/// as a variant here.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input dimensions do not line up (message names the operands).
    DimensionMismatch(String),
    /// An input entry is NaN or infinite.
    NotFinite(&'static str),
    /// The SVD / symmetric eigendecomposition did not converge.
    SvdFailed,
    /// A direct linear solve (Cholesky) failed; the system is not positive
    /// definite to working precision.
    SolveFailed,
    /// A matrix required to be PSD has an eigenvalue below -tol·scale.
    NotPsd { min_eigenvalue: f64 },
    /// Condition number is undefined for a rank-0 factorization.
    RankZero,
    /// An applicability condition of a rank-one update formula is violated
    /// (β ≠ 0, range-membership failure, ν ≈ 0, or a degenerate pivot).
    UpdatePrecondition(String),
    /// Gradient-descent step size exceeds the 2/σ_max² stability limit.
    StepTooLarge { step: f64, limit: f64 },
    /// Gradient descent diverged (loss grew over a trailing window).
    Divergence { iteration: usize },
    /// A solution was paired with training data it was not built from.
    FingerprintMismatch,
    /// Invalid argument or configuration value (message names the field).
    InvalidInput(String),
    /// Config file syntax error at a 1-based line number.
    ConfigParse { line: usize, message: String },
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NotFinite(what) => write!(f, "non-finite entries in {what}"),
            Error::SvdFailed => write!(f, "SVD did not converge"),
            Error::SolveFailed => write!(f, "direct linear solve failed (matrix not positive definite)"),
            Error::NotPsd { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (λ_min = {min_eigenvalue:.3e})")
            }
            Error::RankZero => write!(f, "condition number undefined: retained rank is 0"),
            Error::UpdatePrecondition(msg) => write!(f, "update precondition violated: {msg}"),
            Error::StepTooLarge { step, limit } => {
                write!(f, "step size {step:.3e} exceeds stability limit {limit:.3e}")
            }
            Error::Divergence { iteration } => {
                write!(f, "gradient descent diverged at iteration {iteration}")
            }
            Error::FingerprintMismatch => {
                write!(f, "solution fingerprint does not match the supplied training data")
            }
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::ConfigParse { line, message } => {
                write!(f, "config parse error at line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for Error {}

/// A labeled sample set: feature matrix X (d×n, one sample per column) and
/// label vector y (length n).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vector,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vector) -> Result<Self> {
        if x.ncols() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} columns but y has {} entries",
                x.ncols(),
                y.len()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }
}
