//! Linear and Gaussian (RBF) kernels, Gram-matrix construction, and the
//! boundedness constant κ consumed by the stability bounds.
//!
//! Data matrices are d×n with one sample per column; the Gram matrix is the
//! n×n table K_ij = K(xᵢ, xⱼ), built exactly symmetric (one triangle is
//! computed and mirrored). Gram matrices carry a fingerprint of the dataset
//! they came from so downstream solutions can detect being paired with the
//! wrong training data.

use serde::Serialize;

use crate::{Error, Matrix, Result, Vector};

/// Which kernel to evaluate.
///
/// `Linear` is K(x,x′) = ⟨x,x′⟩; `Rbf` is K(x,x′) = exp(−‖x−x′‖²/(2σ²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { sigma: f64 },
}

impl KernelSpec {
    /// Gaussian kernel with bandwidth σ > 0.
    pub fn rbf(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(KernelSpec::Rbf { sigma })
        } else {
            Err(Error::InvalidInput(format!("sigma must be positive and finite, got {sigma}")))
        }
    }

    pub fn is_rbf(&self) -> bool {
        matches!(self, KernelSpec::Rbf { .. })
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSpec::Linear => write!(f, "linear"),
            KernelSpec::Rbf { sigma } => write!(f, "rbf(sigma={sigma})"),
        }
    }
}

/// FNV-1a hash over a matrix's shape and raw (column-major) entry bytes.
///
/// Used to bind Gram matrices and fitted solutions to the exact dataset that
/// produced them; any bitwise change to the data changes the fingerprint.
pub fn fingerprint(m: &Matrix) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    eat(&(m.nrows() as u64).to_le_bytes());
    eat(&(m.ncols() as u64).to_le_bytes());
    for v in m.iter() {
        eat(&v.to_le_bytes());
    }
    hash
}

/// An n×n kernel matrix with provenance.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub matrix: Matrix,
    pub kernel: KernelSpec,
    pub source_fingerprint: u64,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Evaluate the kernel on a pair of points.
pub fn kernel_eval(spec: KernelSpec, x: &Vector, x_prime: &Vector) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch(format!(
            "kernel_eval points have lengths {} and {}",
            x.len(),
            x_prime.len()
        )));
    }
    Ok(match spec {
        KernelSpec::Linear => x.dot(x_prime),
        KernelSpec::Rbf { sigma } => {
            let sq = (x - x_prime).norm_squared();
            (-sq / (2.0 * sigma * sigma)).exp()
        }
    })
}

/// Build the Gram matrix K_ij = K(xᵢ, xⱼ) for the columns of X.
///
/// The result is exactly symmetric (the upper triangle is mirrored) and, for
/// the RBF kernel, its diagonal is exactly 1.
pub fn gram(spec: KernelSpec, x: &Matrix) -> Result<GramMatrix> {
    let n = x.ncols();
    if n == 0 {
        return Err(Error::InvalidInput("gram needs at least one sample".into()));
    }
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = x.column(i);
        k[(i, i)] = match spec {
            KernelSpec::Linear => xi.dot(&xi),
            KernelSpec::Rbf { .. } => 1.0,
        };
        for j in (i + 1)..n {
            let xj = x.column(j);
            let v = match spec {
                KernelSpec::Linear => xi.dot(&xj),
                KernelSpec::Rbf { sigma } => {
                    let sq = (xi - xj).norm_squared();
                    (-sq / (2.0 * sigma * sigma)).exp()
                }
            };
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(GramMatrix { matrix: k, kernel: spec, source_fingerprint: fingerprint(x) })
}

/// The kernel-boundedness constant in both circulating conventions.
///
/// `kappa` bounds the kernel values themselves (sup K ≤ κ); `sqrt_kappa` is
/// its square root, the constant appearing in the standard reproducing-
/// property bound |f(x)| ≤ √(K(x,x))·‖f‖_H. For the RBF kernel both are 1.
/// For the linear kernel `kappa` is the empirical max over sample pairs of
/// |⟨xᵢ,xⱼ⟩| (an exhaustive scan of the realized dataset — the population
/// supremum is unbounded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaBound {
    pub kappa: f64,
    pub sqrt_kappa: f64,
}

impl KappaBound {
    /// The constant that makes |f(xᵢ)| ≤ κ_eval·‖f‖_H hold on the dataset at
    /// any data scale: max(κ, √κ) dominates max_i √(K(xᵢ,xᵢ)).
    pub fn eval_constant(&self) -> f64 {
        self.kappa.max(self.sqrt_kappa)
    }
}

/// Compute [`KappaBound`] for a dataset.
pub fn kappa_bound(spec: KernelSpec, x: &Matrix) -> KappaBound {
    match spec {
        KernelSpec::Rbf { .. } => KappaBound { kappa: 1.0, sqrt_kappa: 1.0 },
        KernelSpec::Linear => {
            let mut kappa: f64 = 0.0;
            for i in 0..x.ncols() {
                for j in i..x.ncols() {
                    kappa = kappa.max(x.column(i).dot(&x.column(j)).abs());
                }
            }
            KappaBound { kappa, sqrt_kappa: kappa.sqrt() }
        }
    }
}
