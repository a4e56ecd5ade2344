//! Dense square complex matrices.
//!
//! Storage is row-major. Dimensions at desk scale stay at or below 256, so every
//! operation here is a straightforward dense loop.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default tolerance for treating a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Matrix<T: Real> {
    dim: usize,
    data: Vec<Complex<T>>,
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row vectors; every row must have as many entries as there are rows.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch("matrix must have at least one row".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    /// Real matrix given as rows of reals.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Complex::new(v, T::zero())).collect())
                .collect(),
        )
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// Outer product `|v><v|`.
    pub fn outer(v: &[Complex<T>]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    /// Rank-one projector onto the computational basis vector `index`.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(index, index)] = Complex::one();
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Real part of the trace; the imaginary part of a Hermitian trace is rounding noise.
    pub fn real_trace(&self) -> T {
        self.trace().re
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim, other.dim, "trace_product dimension mismatch");
        let d = self.dim;
        let mut acc = Complex::zero();
        for i in 0..d {
            for k in 0..d {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn scale(&self, factor: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn scale_complex(&self, factor: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Largest entrywise deviation `max |M - M^dagger|`.
    pub fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Replaces the matrix by `(M + M^dagger)/2`, removing rounding asymmetry.
    pub fn hermitize(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim, "mul_vec dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).fold(Complex::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// `<v| M |v>`.
    pub fn expectation(&self, v: &[Complex<T>]) -> Complex<T> {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        Self::from_fn(da * db, |i, j| self[(i / db, j / db)] * other[(i % db, j % db)])
    }

    /// Partial trace over one factor of a `dim_first * dim_second` bipartite operator.
    pub fn partial_trace(&self, dim_first: usize, dim_second: usize, keep: Keep) -> Result<Self> {
        if dim_first == 0 || dim_second == 0 || dim_first * dim_second != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot factor dimension {} as {dim_first} x {dim_second}",
                self.dim
            )));
        }
        let idx = |a: usize, b: usize| a * dim_second + b;
        let out = match keep {
            Keep::Second => Self::from_fn(dim_second, |b, b2| {
                (0..dim_first).fold(Complex::zero(), |acc, a| acc + self[(idx(a, b), idx(a, b2))])
            }),
            Keep::First => Self::from_fn(dim_first, |a, a2| {
                (0..dim_second).fold(Complex::zero(), |acc, b| acc + self[(idx(a, b), idx(a2, b))])
            }),
        };
        Ok(out)
    }

    /// Direct sum `self ⊕ other` (block diagonal).
    pub fn direct_sum(&self, other: &Self) -> Self {
        let d = self.dim;
        Self::from_fn(d + other.dim, |i, j| match (i < d, j < d) {
            (true, true) => self[(i, j)],
            (false, false) => other[(i - d, j - d)],
            _ => Complex::zero(),
        })
    }

    /// Converts between scalar precisions.
    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        Matrix { dim: self.dim, data: self.data.iter().map(|z| -z).collect() }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "mul dimension mismatch");
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<T: Real> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Euclidean inner product `<a|b>`.
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn kron_with_scalar_identity_is_noop() {
        let a = M::from_fn(3, |i, j| c(i as f64, j as f64 - 1.0));
        assert_eq!(a.kron(&M::identity(1)), a);
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p = M::basis_projector(2, 0);
        assert_eq!(p.kron(&p), M::basis_projector(4, 0));
    }

    #[test]
    fn kron_trace_is_multiplicative() {
        let a = M::from_fn(2, |i, j| c(1.0 + i as f64, 0.5 * j as f64));
        let b = M::from_fn(3, |i, j| c((i * j) as f64 - 0.25, i as f64));
        let lhs = a.kron(&b).trace();
        let rhs = a.trace() * b.trace();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = M::from_real_diag(&[0.25, 0.75]);
        let b = M::from_fn(2, |i, j| if i == j { c(0.5, 0.0) } else { c(0.1, if i < j { 0.2 } else { -0.2 }) });
        let ab = a.kron(&b);
        let kept_b = ab.partial_trace(2, 2, Keep::Second).unwrap();
        let kept_a = ab.partial_trace(2, 2, Keep::First).unwrap();
        assert!((&kept_b - &b).max_abs() < 1e-15);
        assert!((&kept_a - &a).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_factorization() {
        assert!(matches!(
            M::identity(6).partial_trace(4, 2, Keep::First),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn hermitian_deviation_detects_asymmetry() {
        let mut m = M::identity(2);
        m[(0, 1)] = c(0.0, 1.0);
        m[(1, 0)] = c(0.0, 1.0);
        assert!((m.hermitian_deviation() - 2.0).abs() < 1e-15);
        m[(1, 0)] = c(0.0, -1.0);
        assert!(m.is_hermitian(1e-12));
    }

    #[test]
    fn product_and_trace_product_agree() {
        let a = M::from_fn(3, |i, j| c(i as f64 + 0.5, j as f64 - i as f64));
        let b = M::from_fn(3, |i, j| c((i + j) as f64, 1.0));
        assert!(((&a * &b).trace() - a.trace_product(&b)).norm() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let m = Matrix::<f32>::identity(2).kron(&Matrix::<f32>::identity(2));
        assert_eq!(m.real_trace(), 4.0f32);
    }
}
