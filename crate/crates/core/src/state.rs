//! Validated density matrices and orthogonal projectors.

use num_complex::Complex;

use crate::eigen::{hermitian_eig, projector_matrix, PSD_TOL};
use crate::error::{Error, Result};
use crate::matrix::{norm, Keep, Matrix};
use crate::scalar::Real;

/// Trace tolerance for states.
pub const TRACE_TOL: f64 = 1e-9;

/// Idempotence / Hermiticity tolerance for projectors.
pub const PROJECTOR_TOL: f64 = 1e-10;

fn tol<T: Real>(value: f64) -> T {
    // f32 cannot resolve the f64 tolerances; scale them up to its epsilon.
    T::lit(value).max(T::lit(1e4) * T::epsilon())
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real>(Matrix<T>);

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Matrix<T>) -> Result<Self> {
        let spectrum = hermitian_eig(&m).map_err(|e| match e {
            Error::NotHermitian { deviation } => Error::invariant(
                "hermitian",
                format!("max |rho - rho^dagger| = {deviation:e}"),
            ),
            other => other,
        })?;
        let trace = m.real_trace();
        if (trace - T::one()).abs() > tol(TRACE_TOL) {
            return Err(Error::invariant("unit-trace", format!("trace = {trace}")));
        }
        let min = spectrum.min_eigenvalue();
        if min < -tol::<T>(PSD_TOL) {
            return Err(Error::invariant("psd", format!("minimum eigenvalue = {min}")));
        }
        Ok(Self(m.hermitize()))
    }

    /// Wraps a matrix known to be a state (internal constructions that preserve the invariants).
    pub(crate) fn new_unchecked(m: Matrix<T>) -> Self {
        Self(m.hermitize())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(Matrix::identity(dim).scale(T::one() / T::from_usize(dim).unwrap()))
    }

    /// `|v><v| / <v|v>`.
    pub fn pure(v: &[Complex<T>]) -> Result<Self> {
        let n = norm(v);
        if n.is_zero() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let unit: Vec<Complex<T>> = v.iter().map(|z| z / n).collect();
        Ok(Self(Matrix::outer(&unit)))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        Self(Matrix::basis_projector(dim, index))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Reduced state of one factor of a `dim_first * dim_second` bipartite state.
    pub fn partial_trace(&self, dim_first: usize, dim_second: usize, keep: Keep) -> Result<Self> {
        Ok(Self::new_unchecked(self.0.partial_trace(dim_first, dim_second, keep)?))
    }

    /// Convex combination `(1 - w) self + w other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("mixing states of different dimension".into()));
        }
        Ok(Self::new_unchecked(&self.0.scale(T::one() - w) + &other.0.scale(w)))
    }
}

/// Hermitian idempotent matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T: Real>(Matrix<T>);

impl<T: Real> Projector<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        let herm = m.hermitian_deviation();
        if herm > tol(PROJECTOR_TOL) {
            return Err(Error::invariant("hermitian", format!("max |P - P^dagger| = {herm}")));
        }
        let idem = (&(&m * &m) - &m).max_abs();
        if idem > tol(PROJECTOR_TOL) {
            return Err(Error::invariant("idempotent", format!("max |P^2 - P| = {idem}")));
        }
        Ok(Self(m.hermitize()))
    }

    pub(crate) fn new_unchecked(m: Matrix<T>) -> Self {
        Self(m.hermitize())
    }

    /// Projector onto the span of arbitrary (possibly dependent) vectors.
    pub fn onto(dim: usize, vectors: &[Vec<Complex<T>>]) -> Result<Self> {
        Ok(Self(projector_matrix(dim, vectors)?))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self(Matrix::zeros(dim))
    }

    /// Projector onto a set of computational basis vectors.
    pub fn basis(dim: usize, indices: &[usize]) -> Self {
        let mut m = Matrix::zeros(dim);
        for &i in indices {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn rank(&self) -> usize {
        self.0.real_trace().round().to_usize().unwrap_or(0)
    }

    /// `I - P`.
    pub fn complement(&self) -> Self {
        Self(&Matrix::identity(self.dim()) - &self.0)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Acceptance probability `Tr(P rho)`.
    pub fn probability(&self, rho: &DensityMatrix<T>) -> T {
        self.0.trace_product(rho.matrix()).re
    }

    /// `P M P`.
    pub fn sandwich(&self, m: &Matrix<T>) -> Matrix<T> {
        &(&self.0 * m) * &self.0
    }
}
