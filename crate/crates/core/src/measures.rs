//! Entropies, divergences and distances between quantum states, in bits.

use std::fmt;

use crate::eigen::{hermitian_eig, spectral_apply_to, Spectrum, ZeroPolicy, ZERO_EIGENVALUE};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::state::{DensityMatrix, Projector};

/// Finite entropies below zero by at most this much are rounding noise and clamp to 0.
pub const NEGATIVE_TOL: f64 = 1e-9;

/// An entropy in bits, or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum EntropyValue<T: Real> {
    Finite(T),
    Infinite,
}

impl<T: Real> EntropyValue<T> {
    /// Wraps a computed value, clamping rounding noise just below zero.
    pub fn from_bits(bits: T) -> Result<Self> {
        if bits.is_nan() {
            return Err(Error::InvalidArgument("entropy evaluated to NaN".into()));
        }
        if bits.is_infinite() {
            return Ok(Self::Infinite);
        }
        if bits < T::zero() {
            if bits < -T::lit(NEGATIVE_TOL).max(T::lit(1e3) * T::epsilon()) {
                return Err(Error::InvalidArgument(format!("negative entropy {bits}")));
            }
            return Ok(Self::Finite(T::zero()));
        }
        Ok(Self::Finite(bits))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    /// `f64` view with `+inf` for the infinite value.
    pub fn as_f64(self) -> f64 {
        match self {
            Self::Finite(v) => v.to_f64_lossy(),
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl<T: Real> fmt::Display for EntropyValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

fn entropy_of_spectrum<T: Real>(eigenvalues: &[T]) -> T {
    let zero = T::lit(ZERO_EIGENVALUE);
    eigenvalues
        .iter()
        .filter(|&&l| l > zero)
        .fold(T::zero(), |acc, &l| acc - l * l.log2())
}

/// `S(rho) = -Tr rho log2 rho`, with `0 log 0 = 0`.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<EntropyValue<T>> {
    let spectrum = hermitian_eig(rho.matrix())?;
    EntropyValue::from_bits(entropy_of_spectrum(&spectrum.eigenvalues))
}

/// Weight of `rho` on the kernel of `sigma` (eigenvalues at or below the zero threshold).
fn kernel_weight<T: Real>(rho: &DensityMatrix<T>, sigma: &Spectrum<T>) -> T {
    let zero = T::lit(ZERO_EIGENVALUE);
    let kernel = sigma.spectral_projector(|l| l <= zero);
    kernel.trace_product(rho.matrix()).re
}

/// True iff `supp rho` is contained in `supp sigma` at the zero-eigenvalue threshold.
pub fn support_contained<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<bool> {
    check_dims(rho.matrix(), sigma.matrix())?;
    let spectrum = hermitian_eig(sigma.matrix())?;
    Ok(kernel_weight(rho, &spectrum) <= T::lit(ZERO_EIGENVALUE))
}

fn check_dims<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `S(rho || sigma) = Tr rho log2 rho - Tr rho log2 sigma`; infinite when the support of
/// `rho` leaves the support of `sigma`.
pub fn relative_entropy<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<EntropyValue<T>> {
    EntropyValue::from_bits(relative_entropy_raw(rho, sigma)?)
}

/// [`relative_entropy`] before clamping: may be slightly negative from rounding, `+inf`
/// on a support violation.
pub fn relative_entropy_raw<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    check_dims(rho.matrix(), sigma.matrix())?;
    let sigma_spec = hermitian_eig(sigma.matrix())?;
    if kernel_weight(rho, &sigma_spec) > T::lit(ZERO_EIGENVALUE) {
        return Ok(T::infinity());
    }
    let rho_spec = hermitian_eig(rho.matrix())?;
    let neg_entropy = -entropy_of_spectrum(&rho_spec.eigenvalues);
    let log_sigma = spectral_apply_to(&sigma_spec, |l| l.log2(), ZeroPolicy::Drop)?;
    let cross = rho.matrix().trace_product(&log_sigma).re;
    Ok(neg_entropy - cross)
}

/// Smallest eigenvalue a Jacobi spectrum of `sigma` resolves: `d * machine epsilon * lambda_max`.
pub fn numerical_rank_floor<T: Real>(sigma: &DensityMatrix<T>) -> Result<T> {
    let spectrum = hermitian_eig(sigma.matrix())?;
    let d = T::from_usize(sigma.dim()).expect("dimension fits the scalar");
    Ok(d * T::epsilon() * spectrum.max_eigenvalue().max(T::zero()))
}

/// `S(rho || sigma)` with the eigenvalues of `sigma` raised to at least `floor`; never infinite.
/// Raising eigenvalues can only lower the value.
pub fn relative_entropy_clamped<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>, floor: T) -> Result<T> {
    check_dims(rho.matrix(), sigma.matrix())?;
    if floor <= T::zero() {
        return Err(Error::InvalidArgument(format!("clamp floor {floor} must be positive")));
    }
    let sigma_spec = hermitian_eig(sigma.matrix())?;
    let rho_spec = hermitian_eig(rho.matrix())?;
    let neg_entropy = -entropy_of_spectrum(&rho_spec.eigenvalues);
    let logs: Vec<T> = sigma_spec.eigenvalues.iter().map(|&l| l.max(floor).log2()).collect();
    let cross = rho.matrix().trace_product(&sigma_spec.recompose(&logs)).re;
    Ok(neg_entropy - cross)
}

/// `S_inf(rho || sigma) = inf { c : sigma - rho / 2^c >= 0 }`, computed as
/// `log2 lambda_max(sigma^{-1/2} rho sigma^{-1/2})` on the support of `sigma`.
pub fn relative_min_entropy<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<EntropyValue<T>> {
    check_dims(rho.matrix(), sigma.matrix())?;
    let sigma_spec = hermitian_eig(sigma.matrix())?;
    if kernel_weight(rho, &sigma_spec) > T::lit(ZERO_EIGENVALUE) {
        return Ok(EntropyValue::Infinite);
    }
    let inv_sqrt = spectral_apply_to(&sigma_spec, |l| T::one() / l.sqrt(), ZeroPolicy::Drop)?;
    let whitened = (&(&inv_sqrt * rho.matrix()) * &inv_sqrt).hermitize();
    let top = hermitian_eig(&whitened)?.max_eigenvalue();
    EntropyValue::from_bits(top.log2())
}

/// Trace norm `||a - b||_1`: sum of absolute eigenvalues of the difference.
pub fn trace_distance<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    check_dims(a, b)?;
    let spectrum = hermitian_eig(&(a - b))?;
    Ok(spectrum.eigenvalues.iter().fold(T::zero(), |acc, l| acc + l.abs()))
}

fn neg_log_term<T: Real>(weight: T, p: T) -> T {
    if weight.is_zero() {
        T::zero()
    } else if p <= T::zero() {
        T::infinity()
    } else {
        -weight * p.log2()
    }
}

/// Cross binary entropy `H(u, v) = -u log2 v - (1 - u) log2 (1 - v)`.
pub fn cross_binary_entropy<T: Real>(u: T, v: T) -> Result<EntropyValue<T>> {
    let unit = |t: T| t >= T::zero() && t <= T::one();
    if !unit(u) || !unit(v) {
        return Err(Error::InvalidArgument(format!("H({u}, {v}) needs arguments in [0, 1]")));
    }
    EntropyValue::from_bits(neg_log_term(u, v) + neg_log_term(T::one() - u, T::one() - v))
}

/// Binary entropy `H(p) = H(p, p)`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    Ok(cross_binary_entropy(p, p)?.finite().unwrap_or(T::zero()))
}

/// The measurement channel `rho -> P rho P + (I - P) rho (I - P)`.
pub fn pinch<T: Real>(rho: &DensityMatrix<T>, p: &Projector<T>) -> Result<DensityMatrix<T>> {
    check_dims(rho.matrix(), p.matrix())?;
    let q = p.complement();
    let out = &p.sandwich(rho.matrix()) + &q.sandwich(rho.matrix());
    Ok(DensityMatrix::new_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::is_psd;
    use crate::random::{random_density, random_projector, random_pure_state, seeded_rng};
    use num_complex::Complex;

    type D = DensityMatrix<f64>;

    fn plus() -> D {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        D::pure(&[Complex::new(s, 0.0), Complex::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(von_neumann_entropy(&D::basis_state(2, 0)).unwrap(), EntropyValue::Finite(0.0));
        let mixed = von_neumann_entropy(&D::maximally_mixed(2)).unwrap().finite().unwrap();
        assert!((mixed - 1.0).abs() < 1e-14);
        let d = D::new(Matrix::from_real_diag(&[0.75, 0.25])).unwrap();
        let h = von_neumann_entropy(&d).unwrap().finite().unwrap();
        // -(3/4) log2(3/4) - (1/4) log2(1/4)
        let oracle = -(0.75f64 * 0.75f64.log2()) - 0.25 * 0.25f64.log2();
        assert!((h - oracle).abs() < 1e-14);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = seeded_rng(21);
        let rho = random_density(4, &mut rng);
        assert!(relative_entropy(&rho, &rho).unwrap().finite().unwrap() < 1e-12);

        let zero = D::basis_state(2, 0);
        let half = D::maximally_mixed(2);
        let s = relative_entropy(&zero, &half).unwrap().finite().unwrap();
        assert!((s - 1.0).abs() < 1e-14);

        let one = D::basis_state(2, 1);
        assert_eq!(relative_entropy(&zero, &one).unwrap(), EntropyValue::Infinite);
    }

    #[test]
    fn clamped_relative_entropy() {
        let mut rng = seeded_rng(22);
        let rho = random_density(4, &mut rng);
        let sigma = random_density(4, &mut rng);
        let exact = relative_entropy_raw(&rho, &sigma).unwrap();
        assert!((relative_entropy_clamped(&rho, &sigma, 1e-300).unwrap() - exact).abs() < 1e-12);

        // Diagonal pair: sum_i p_i log2(p_i / max(q_i, floor)).
        let p = [0.5, 0.3, 0.2 - 1e-6, 1e-6];
        let q = [0.6, 0.3, 0.1, 0.0];
        let rho = D::new(Matrix::from_real_diag(&p)).unwrap();
        let sigma = D::new(Matrix::from_real_diag(&q)).unwrap();
        assert_eq!(relative_entropy(&rho, &sigma).unwrap(), EntropyValue::Infinite);
        let floor = 1e-15;
        let oracle: f64 = p.iter().zip(&q).map(|(&a, &b): (&f64, &f64)| a * (a / b.max(floor)).log2()).sum();
        assert!((relative_entropy_clamped(&rho, &sigma, floor).unwrap() - oracle).abs() < 1e-12);
        assert!(relative_entropy_clamped(&rho, &sigma, 0.0).is_err());
    }

    #[test]
    fn relative_min_entropy_examples() {
        let mut rng = seeded_rng(22);
        let rho = random_density(3, &mut rng);
        assert!(relative_min_entropy(&rho, &rho).unwrap().finite().unwrap() < 1e-10);
        let s = relative_min_entropy(&D::basis_state(2, 0), &D::maximally_mixed(2)).unwrap();
        assert!((s.finite().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(
            relative_min_entropy(&D::basis_state(2, 0), &D::basis_state(2, 1)).unwrap(),
            EntropyValue::Infinite
        );
    }

    #[test]
    fn min_entropy_is_the_psd_threshold() {
        let mut rng = seeded_rng(23);
        for _ in 0..20 {
            let rho = random_density(3, &mut rng);
            let sigma = random_density(3, &mut rng);
            let c = relative_min_entropy(&rho, &sigma).unwrap().finite().unwrap();
            let at = sigma.matrix() - &rho.matrix().scale(2f64.powf(-c));
            let below = sigma.matrix() - &rho.matrix().scale(2f64.powf(-(c - 1e-3)));
            assert!(is_psd(&at, 1e-9).unwrap());
            assert!(!is_psd(&below, 1e-9).unwrap());
        }
    }

    #[test]
    fn trace_distance_examples() {
        let zero = D::basis_state(2, 0);
        assert!(trace_distance(zero.matrix(), zero.matrix()).unwrap() < 1e-15);
        let one = D::basis_state(2, 1);
        assert!((trace_distance(zero.matrix(), one.matrix()).unwrap() - 2.0).abs() < 1e-14);
        let t = trace_distance(zero.matrix(), plus().matrix()).unwrap();
        assert!((t - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cross_binary_entropy_examples() {
        let h = |u, v| cross_binary_entropy::<f64>(u, v).unwrap().finite().unwrap();
        assert!((h(0.5, 0.5) - 1.0).abs() < 1e-15);
        assert!((h(0.25, 0.25) - 0.811278).abs() < 1e-6);
        let small = h(1e-6, 0.01);
        let oracle = -1e-6 * 0.01f64.log2() - (1.0 - 1e-6) * 0.99f64.log2();
        assert!((small - oracle).abs() < 1e-15);
        assert!((small - 0.014507).abs() < 1e-6);
        assert!(small >= 0.01);
        assert_eq!(cross_binary_entropy(0.5f64, 0.0).unwrap(), EntropyValue::Infinite);
        assert_eq!(cross_binary_entropy(0.0f64, 0.0).unwrap(), EntropyValue::Finite(0.0));
        assert!(cross_binary_entropy(1.5f64, 0.5).is_err());
    }

    #[test]
    fn pinch_examples() {
        let p = Projector::basis(2, &[0]);
        let pinched = pinch(&plus(), &p).unwrap();
        assert!((pinched.matrix() - D::maximally_mixed(2).matrix()).max_abs() < 1e-15);

        let block = D::new(Matrix::from_real_diag(&[0.2, 0.3, 0.5])).unwrap();
        let q = Projector::basis(3, &[1]);
        assert_eq!(pinch(&block, &q).unwrap().matrix(), block.matrix());
    }

    #[test]
    fn pinching_does_not_increase_relative_entropy() {
        let mut rng = seeded_rng(24);
        for d in [2usize, 4, 8] {
            let rho = random_density(d, &mut rng);
            let sigma = random_density(d, &mut rng);
            let p = random_projector(d, d / 2, &mut rng);
            let before = relative_entropy(&rho, &sigma).unwrap().finite().unwrap();
            let after =
                relative_entropy(&pinch(&rho, &p).unwrap(), &pinch(&sigma, &p).unwrap()).unwrap();
            assert!(after.finite().unwrap() <= before + 1e-9);
        }
    }

    #[test]
    fn pure_target_against_mixed_guess() {
        let mut rng = seeded_rng(25);
        let rho = random_pure_state(4, &mut rng);
        let s = relative_entropy(&rho, &D::maximally_mixed(4)).unwrap().finite().unwrap();
        assert!((s - 2.0).abs() < 1e-10);
    }

    #[test]
    fn works_in_f32() {
        let rho = DensityMatrix::<f32>::basis_state(2, 0);
        let sigma = DensityMatrix::<f32>::maximally_mixed(2);
        let s = relative_entropy(&rho, &sigma).unwrap().finite().unwrap();
        assert!((s - 1.0).abs() < 1e-5);
    }
}
