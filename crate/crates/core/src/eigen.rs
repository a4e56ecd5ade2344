//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and the
//! spectral calculus built on it.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{inner, norm, Matrix, HERMITIAN_TOL};
use crate::scalar::Real;

/// Eigenvalues at or below this magnitude are treated as exact zeros in support decisions.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

/// Default tolerance of [`is_psd`].
pub const PSD_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Eigen-pairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(k)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[self.dim() - 1]
    }

    /// `U diag(values) U^dagger` for replacement eigenvalues.
    pub fn recompose(&self, values: &[T]) -> Matrix<T> {
        let d = self.dim();
        let u = &self.eigenvectors;
        Matrix::from_fn(d, |i, j| {
            (0..d).fold(Complex::zero(), |acc, k| {
                if values[k].is_zero() {
                    acc
                } else {
                    acc + u[(i, k)] * u[(j, k)].conj() * values[k]
                }
            })
        })
    }

    /// Projector onto the span of eigenvectors whose eigenvalue passes `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(T) -> bool) -> Matrix<T> {
        let values: Vec<T> =
            self.eigenvalues.iter().map(|&l| if keep(l) { T::one() } else { T::zero() }).collect();
        self.recompose(&values)
    }
}

fn hermitian_tol<T: Real>(m: &Matrix<T>) -> T {
    let base = T::lit(HERMITIAN_TOL).max(T::lit(100.0) * T::epsilon());
    base * T::one().max(m.max_abs())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose anti-Hermitian part exceeds `1e-12 * max(1, max|M|)`.
pub fn hermitian_eig<T: Real>(m: &Matrix<T>) -> Result<Spectrum<T>> {
    let deviation = m.hermitian_deviation();
    if deviation > hermitian_tol(m) {
        return Err(Error::NotHermitian { deviation: deviation.to_f64_lossy() });
    }
    jacobi(m.hermitize())
}

fn off_diagonal_sq<T: Real>(a: &Matrix<T>) -> T {
    let d = a.dim();
    let mut s = T::zero();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi<T: Real>(mut a: Matrix<T>) -> Result<Spectrum<T>> {
    let d = a.dim();
    let mut v = Matrix::<T>::identity(d);
    let scale = a.frobenius_norm();
    let target = (T::epsilon() * scale) * (T::epsilon() * scale);
    let half = T::lit(0.5);

    let mut sweeps = 0;
    while off_diagonal_sq(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: off_diagonal_sq(&a).sqrt().to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                // Phase that makes the (p, q) entry real, then a real symmetric rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) * half / r;
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // Rotation block J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                let jpp = Complex::new(c, T::zero());
                let jpq = Complex::new(s, T::zero());
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = Matrix::from_fn(d, |i, j| v[(i, order[j])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// How [`spectral_apply`] treats eigenvalues at or below [`ZERO_EIGENVALUE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroPolicy {
    /// Apply the function to every eigenvalue.
    Apply,
    /// Map near-zero eigenvalues to 0 (the `0 log 0 = 0` convention).
    Drop,
    /// Near-zero eigenvalues are a support violation.
    Reject,
}

/// `g(M)` for Hermitian `M`: same eigenvectors, eigenvalues mapped through `g`.
pub fn spectral_apply<T: Real>(
    m: &Matrix<T>,
    g: impl Fn(T) -> T,
    policy: ZeroPolicy,
) -> Result<Matrix<T>> {
    let spectrum = hermitian_eig(m)?;
    spectral_apply_to(&spectrum, g, policy)
}

/// [`spectral_apply`] on an already computed spectrum.
pub fn spectral_apply_to<T: Real>(
    spectrum: &Spectrum<T>,
    g: impl Fn(T) -> T,
    policy: ZeroPolicy,
) -> Result<Matrix<T>> {
    let zero = T::lit(ZERO_EIGENVALUE);
    let mut mapped = Vec::with_capacity(spectrum.dim());
    for &l in &spectrum.eigenvalues {
        let near_zero = l.abs() <= zero;
        let value = match (policy, near_zero) {
            (ZeroPolicy::Drop, true) => T::zero(),
            (ZeroPolicy::Reject, true) => {
                return Err(Error::SupportViolation(format!("eigenvalue {l} below zero threshold")))
            }
            _ => {
                let gl = g(l);
                if !gl.is_finite() {
                    return Err(Error::SupportViolation(format!(
                        "function undefined at retained eigenvalue {l}"
                    )));
                }
                gl
            }
        };
        mapped.push(value);
    }
    Ok(spectrum.recompose(&mapped))
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd<T: Real>(m: &Matrix<T>, tol: T) -> Result<bool> {
    Ok(hermitian_eig(m)?.min_eigenvalue() >= -tol)
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt with re-orthogonalization).
pub fn orthonormalize<T: Real>(vectors: &[Vec<Complex<T>>]) -> Result<Vec<Vec<Complex<T>>>> {
    let mut basis: Vec<Vec<Complex<T>>> = Vec::new();
    let Some(dim) = vectors.first().map(Vec::len) else {
        return Ok(basis);
    };
    let cutoff = T::lit(1e-10).max(T::lit(1000.0) * T::epsilon());
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} among vectors of length {dim}",
                v.len()
            )));
        }
        let scale = norm(v);
        if scale.is_zero() {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let overlap = inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= bi * overlap;
                }
            }
        }
        let residual = norm(&w);
        if residual > cutoff * scale {
            let inv = T::one() / residual;
            basis.push(w.into_iter().map(|z| z * inv).collect());
        }
    }
    Ok(basis)
}

/// Orthogonal projector onto the span of `vectors`, as a raw matrix of dimension `dim`.
pub fn projector_matrix<T: Real>(dim: usize, vectors: &[Vec<Complex<T>>]) -> Result<Matrix<T>> {
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for projector of dimension {dim}",
            bad.len()
        )));
    }
    let basis = orthonormalize(vectors)?;
    let mut p = Matrix::zeros(dim);
    for b in &basis {
        p = &p + &Matrix::outer(b);
    }
    Ok(p)
}

/// `max |U^dagger U - I|`.
pub fn unitarity_defect<T: Real>(u: &Matrix<T>) -> T {
    let g = &u.adjoint() * u;
    (&g - &Matrix::identity(u.dim())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, seeded_rng};

    type M = Matrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let s = hermitian_eig(&M::identity(2)).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = M::from_rows(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        let s = hermitian_eig(&x).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let y = M::from_rows(vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
            .unwrap();
        let s = hermitian_eig(&y).unwrap();
        let recon = s.recompose(&s.eigenvalues);
        assert!((&recon - &y).max_abs() < 1e-14);
        assert!(unitarity_defect(&s.eigenvectors) < 1e-14);
    }

    #[test]
    fn random_d8_reconstruction() {
        let mut rng = seeded_rng(8);
        let m = random_hermitian(8, &mut rng);
        let s = hermitian_eig(&m).unwrap();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!((&s.recompose(&s.eigenvalues) - &m).max_abs() <= 1e-10 * m.max_abs());
        assert!(unitarity_defect(&s.eigenvectors) <= 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = M::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn spectral_apply_identity_and_square() {
        let mut rng = seeded_rng(3);
        let m = random_hermitian(4, &mut rng);
        let same = spectral_apply(&m, |l| l, ZeroPolicy::Apply).unwrap();
        assert!((&same - &m).max_abs() < 1e-12);

        let d = M::from_real_diag(&[2.0, 3.0]);
        let sq = spectral_apply(&d, |l| l * l, ZeroPolicy::Apply).unwrap();
        assert!((&sq - &M::from_real_diag(&[4.0, 9.0])).max_abs() < 1e-14);
    }

    #[test]
    fn spectral_log2_of_half_half() {
        let m = M::from_real_diag(&[0.5, 0.5]);
        let l = spectral_apply(&m, f64::log2, ZeroPolicy::Drop).unwrap();
        assert!((&l - &M::from_real_diag(&[-1.0, -1.0])).max_abs() < 1e-14);
    }

    #[test]
    fn spectral_log_zero_policies() {
        let m = M::from_real_diag(&[1.0, 0.0]);
        let dropped = spectral_apply(&m, f64::log2, ZeroPolicy::Drop).unwrap();
        assert!(dropped.max_abs() < 1e-15);
        assert!(matches!(
            spectral_apply(&m, f64::log2, ZeroPolicy::Reject),
            Err(Error::SupportViolation(_))
        ));
        assert!(matches!(
            spectral_apply(&m, f64::log2, ZeroPolicy::Apply),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&M::identity(3), 1e-9).unwrap());
        assert!(!is_psd(&M::from_real_diag(&[1.0, -1.0]), 1e-9).unwrap());
    }

    #[test]
    fn projector_examples() {
        let v = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let p = projector_matrix(2, &[v.clone()]).unwrap();
        assert!((p.real_trace() - 1.0).abs() < 1e-14);

        let basis: Vec<Vec<Complex<f64>>> =
            (0..3).map(|i| (0..3).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect();
        assert!((&projector_matrix(3, &basis).unwrap() - &M::identity(3)).max_abs() < 1e-14);

        let doubled: Vec<Complex<f64>> = v.iter().map(|z| z * 2.0).collect();
        let p2 = projector_matrix(2, &[v, doubled]).unwrap();
        assert!((p2.real_trace() - 1.0).abs() < 1e-12);
        assert!((&(&p2 * &p2) - &p2).max_abs() < 1e-12);
    }

    #[test]
    fn jacobi_in_f32() {
        let m = Matrix::<f32>::from_real_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = hermitian_eig(&m).unwrap();
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-5);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-5);
    }
}
