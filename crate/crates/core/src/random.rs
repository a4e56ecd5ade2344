//! Seeded random generation of matrices, states and subspaces.
//!
//! All randomness flows through [`ChaCha20Rng`] seeded with `seed_from_u64`, so a
//! `u64` seed reproduces every experiment byte for byte.

use num_complex::Complex;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::eigen::orthonormalize;
use crate::matrix::Matrix;
use crate::state::{DensityMatrix, Projector};

/// Identifier of the generator, recorded in every report header.
pub const RNG_ALGORITHM: &str = "chacha20/seed_from_u64";

pub type LabRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> LabRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex<f64> {
    Complex::new(gaussian(rng), gaussian(rng))
}

/// Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Matrix<f64> {
    let g = Matrix::from_fn(dim, |_, _| complex_gaussian(rng));
    (&g + &g.adjoint()).scale(0.5)
}

/// Haar-distributed unit vector.
pub fn random_pure_vector(dim: usize, rng: &mut impl Rng) -> Vec<Complex<f64>> {
    let v: Vec<Complex<f64>> = (0..dim).map(|_| complex_gaussian(rng)).collect();
    let n = crate::matrix::norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Haar-distributed unitary (columns are an orthonormalized Gaussian frame).
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Matrix<f64> {
    loop {
        let cols: Vec<Vec<Complex<f64>>> =
            (0..dim).map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect()).collect();
        let basis = orthonormalize(&cols).expect("equal-length columns");
        if basis.len() == dim {
            return Matrix::from_fn(dim, |i, j| basis[j][i]);
        }
    }
}

/// Random state of the given rank (Ginibre / induced measure).
pub fn random_density_rank(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix<f64> {
    let mut m = Matrix::zeros(dim);
    for _ in 0..rank.max(1) {
        m = &m + &Matrix::outer(&(0..dim).map(|_| complex_gaussian(rng)).collect::<Vec<_>>());
    }
    let t = m.real_trace();
    DensityMatrix::new_unchecked(m.scale(1.0 / t))
}

/// Full-rank random state.
pub fn random_density(dim: usize, rng: &mut impl Rng) -> DensityMatrix<f64> {
    random_density_rank(dim, dim, rng)
}

pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> DensityMatrix<f64> {
    DensityMatrix::new_unchecked(Matrix::outer(&random_pure_vector(dim, rng)))
}

/// Random state of random rank in `1..=dim`.
pub fn random_state_any_rank(dim: usize, rng: &mut impl Rng) -> DensityMatrix<f64> {
    let rank = rng.random_range(1..=dim);
    random_density_rank(dim, rank, rng)
}

/// Projector onto a Haar-random subspace of the given rank.
pub fn random_projector(dim: usize, rank: usize, rng: &mut impl Rng) -> Projector<f64> {
    let u = random_unitary(dim, rng);
    let cols: Vec<Vec<Complex<f64>>> = (0..rank).map(|j| u.column(j)).collect();
    Projector::onto(dim, &cols).expect("columns of matching dimension")
}

/// `U diag(1_S) U^dagger` for a basis subset `S`.
pub fn rotated_basis_projector(u: &Matrix<f64>, indices: &[usize]) -> Projector<f64> {
    let cols: Vec<Vec<Complex<f64>>> = indices.iter().map(|&j| u.column(j)).collect();
    Projector::onto(u.dim(), &cols).expect("columns of matching dimension")
}

/// `k` orthonormal real vectors in `R^dim`, each of length `dim`.
pub fn random_orthonormal_real(dim: usize, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    loop {
        let cols: Vec<Vec<Complex<f64>>> = (0..k)
            .map(|_| (0..dim).map(|_| Complex::new(gaussian(rng), 0.0)).collect())
            .collect();
        let basis = orthonormalize(&cols).expect("equal-length vectors");
        if basis.len() == k {
            return basis.into_iter().map(|v| v.into_iter().map(|z| z.re).collect()).collect();
        }
    }
}

/// `count` distinct indices from `0..n` in random order.
pub fn distinct_indices(n: usize, count: usize, rng: &mut impl Rng) -> Vec<usize> {
    sample(rng, n, count).into_vec()
}
