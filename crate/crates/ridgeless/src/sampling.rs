//! Seeded, splittable random sampling used by the experiments and tests.
//!
//! Determinism contract: every trial draws from its own ChaCha8 stream,
//! derived from (seed, stream index). Trial t's data is therefore identical
//! no matter how many trials run, in what order, or on how many threads —
//! and independent of which other grid points a sweep visits.

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Matrix, Vector};

/// RNG for one (seed, stream) cell. Streams partition the generator's output
/// space, so distinct streams never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream index for grid point g, trial t — one cell per (g, t) pair so
/// sweeps are reproducible point-by-point.
pub fn grid_stream(grid_index: usize, trial: usize) -> u64 {
    ((grid_index as u64) << 32) | trial as u64
}

/// rows×cols matrix of i.i.d. N(0,1) entries, filled column-major.
pub fn standard_normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data: Vec<f64> = StandardNormal.sample_iter(&mut *rng).take(rows * cols).collect();
    Matrix::from_vec(rows, cols, data)
}

/// Length-n vector of i.i.d. N(0,1) entries.
pub fn standard_normal_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    let data: Vec<f64> = StandardNormal.sample_iter(&mut *rng).take(n).collect();
    Vector::from_vec(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_disjoint() {
        let a = standard_normal_matrix(&mut stream_rng(7, 3), 4, 4);
        let b = standard_normal_matrix(&mut stream_rng(7, 3), 4, 4);
        assert_eq!(a, b);
        let c = standard_normal_matrix(&mut stream_rng(7, 4), 4, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn moments_are_plausible() {
        let m = standard_normal_matrix(&mut stream_rng(0, 0), 100, 100);
        let mean = m.iter().sum::<f64>() / 10_000.0;
        let var = m.iter().map(|v| v * v).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
