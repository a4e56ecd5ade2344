//! Linear space distance: two `d/4`-dimensional real subspaces, close or far.

use num_complex::Complex;
use rand::Rng;

use crate::eigen::{hermitian_eig, ZERO_EIGENVALUE};
use crate::error::{Error, Result};
use crate::function::Cell;
use crate::matrix::Matrix;
use crate::random::{gaussian, random_orthonormal_real};

/// Orthonormality tolerance for bases and unit proofs.
pub const BASIS_TOL: f64 = 1e-10;

/// Distances at most this are 1-inputs.
pub const CLOSE_DISTANCE: f64 = 0.1 * std::f64::consts::SQRT_2;
/// Distances at least this are 0-inputs.
pub const FAR_DISTANCE: f64 = 0.9 * std::f64::consts::SQRT_2;
/// Slack when classifying a distance against the thresholds.
pub const DISTANCE_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let s = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / s).collect()
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (b, &c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

fn project(basis: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let coeffs: Vec<f64> = basis.iter().map(|b| dot(b, v)).collect();
    combine(basis, &coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsdInstance {
    dim: usize,
    v: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
}

fn check_basis(name: &'static str, dim: usize, basis: &[Vec<f64>]) -> Result<()> {
    if basis.len() != dim / 4 || basis.iter().any(|b| b.len() != dim) {
        return Err(Error::DimensionMismatch(format!("{name} needs {} vectors of length {dim}", dim / 4)));
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            let got = dot(a, b);
            if (got - target).abs() > BASIS_TOL {
                return Err(Error::invariant(
                    "orthonormal",
                    format!("{name}: <{i},{j}> = {got}, expected {target}"),
                ));
            }
        }
    }
    Ok(())
}

impl LsdInstance {
    pub fn new(dim: usize, v: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || dim % 4 != 0 {
            return Err(Error::invariant("dim-multiple-of-4", format!("dim = {dim}")));
        }
        check_basis("V", dim, &v)?;
        check_basis("W", dim, &w)?;
        Ok(Self { dim, v, w })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn v(&self) -> &[Vec<f64>] {
        &self.v
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// `G_{ij} = <v_i, w_j>`.
    pub fn overlaps(&self) -> Vec<Vec<f64>> {
        self.v.iter().map(|a| self.w.iter().map(|b| dot(a, b)).collect()).collect()
    }

    fn gram_spectrum(&self) -> Result<crate::eigen::Spectrum<f64>> {
        let g = self.overlaps();
        let k = g.len();
        let ggt = Matrix::from_fn(k, |i, j| Complex::new(dot(&g[i], &g[j]), 0.0));
        hermitian_eig(&ggt)
    }
}

/// `cos theta_1`, the largest singular value of the overlap matrix.
pub fn principal_cosine(inst: &LsdInstance) -> Result<f64> {
    Ok(inst.gram_spectrum()?.max_eigenvalue().clamp(0.0, 1.0).sqrt())
}

/// Minimum distance between unit vectors of `V` and `W`, equal to `sqrt(2 - 2 cos theta_1)`.
///
/// Evaluated as `||u - w||` for the first principal pair, which stays accurate when the
/// subspaces nearly coincide.
pub fn lsd_distance(inst: &LsdInstance) -> Result<f64> {
    let spectrum = inst.gram_spectrum()?;
    let top: Vec<f64> = spectrum.eigenvector(0).iter().map(|z| z.re).collect();
    let u = unit(combine(&inst.v, &top));
    let projected = project(&inst.w, &u);
    if dot(&projected, &projected) <= ZERO_EIGENVALUE {
        return Ok(std::f64::consts::SQRT_2);
    }
    let w = unit(projected);
    Ok(u.iter().zip(&w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

pub fn lsd_value(inst: &LsdInstance) -> Result<Cell> {
    let d = lsd_distance(inst)?;
    Ok(if d <= CLOSE_DISTANCE + DISTANCE_TOL {
        Cell::One
    } else if d >= FAR_DISTANCE - DISTANCE_TOL {
        Cell::Zero
    } else {
        Cell::Undefined
    })
}

/// `||P_W P_V psi||^2` for a unit proof `psi`.
pub fn lsd_acceptance(inst: &LsdInstance, proof: &[f64]) -> Result<f64> {
    if proof.len() != inst.dim {
        return Err(Error::DimensionMismatch(format!("proof of length {} in dimension {}", proof.len(), inst.dim)));
    }
    let n2 = dot(proof, proof);
    if (n2 - 1.0).abs() > BASIS_TOL {
        return Err(Error::invariant("unit-norm", format!("proof has squared norm {n2}")));
    }
    let out = project(&inst.w, &project(&inst.v, proof));
    Ok(dot(&out, &out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsdOptimum {
    pub acceptance: f64,
    pub cosine: f64,
    /// First principal vector of `V`.
    pub proof: Vec<f64>,
}

pub fn lsd_optimal_proof(inst: &LsdInstance) -> Result<LsdOptimum> {
    let spectrum = inst.gram_spectrum()?;
    let top: Vec<f64> = spectrum.eigenvector(0).iter().map(|z| z.re).collect();
    let proof = unit(combine(&inst.v, &top));
    Ok(LsdOptimum {
        acceptance: lsd_acceptance(inst, &proof)?,
        cosine: spectrum.max_eigenvalue().clamp(0.0, 1.0).sqrt(),
        proof,
    })
}

fn random_unit(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    unit((0..k).map(|_| gaussian(rng)).collect())
}

fn pair_distance(inst: &LsdInstance, a: &[f64], b: &[f64]) -> f64 {
    let x = combine(&inst.v, a);
    let y = combine(&inst.w, b);
    x.iter().zip(&y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// Minimum distance over `samples` unit-vector pairs: half uniform, half local refinement of the best.
pub fn sampled_min_distance(inst: &LsdInstance, samples: usize, rng: &mut impl Rng) -> f64 {
    let k = inst.v.len();
    let mut best = (f64::INFINITY, vec![0.0; k], vec![0.0; k]);
    let global = samples.div_ceil(2);
    for _ in 0..global {
        let (a, b) = (random_unit(k, rng), random_unit(k, rng));
        let d = pair_distance(inst, &a, &b);
        if d < best.0 {
            best = (d, a, b);
        }
    }
    let mut step = 0.1;
    for _ in global..samples {
        let a = unit(best.1.iter().map(|x| x + step * gaussian(rng)).collect());
        let b = unit(best.2.iter().map(|x| x + step * gaussian(rng)).collect());
        let d = pair_distance(inst, &a, &b);
        if d < best.0 {
            best = (d, a, b);
        } else {
            step = (step * 0.98).max(1e-6);
        }
    }
    best.0
}

/// All principal angles equal `theta`, with a random rotation of the `W` basis.
pub fn generate_lsd(dim: usize, theta: f64, rng: &mut impl Rng) -> Result<LsdInstance> {
    if dim == 0 || dim % 4 != 0 {
        return Err(Error::InvalidArgument(format!("dim = {dim} is not a positive multiple of 4")));
    }
    let k = dim / 4;
    let q = random_orthonormal_real(dim, 2 * k, rng);
    let v: Vec<Vec<f64>> = q[..k].to_vec();
    let planted: Vec<Vec<f64>> = (0..k)
        .map(|j| q[j].iter().zip(&q[k + j]).map(|(a, b)| theta.cos() * a + theta.sin() * b).collect())
        .collect();
    let rotation = random_orthonormal_real(k, k, rng);
    let w = rotation.iter().map(|r| combine(&planted, r)).collect();
    LsdInstance::new(dim, v, w)
}

/// Angle giving a planted instance at the requested distance.
pub fn angle_for_distance(distance: f64) -> f64 {
    (1.0 - distance * distance / 2.0).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded_rng;

    fn basis(dim: usize, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn identical_and_orthogonal() {
        let same = LsdInstance::new(8, basis(8, &[0, 1]), basis(8, &[1, 0])).unwrap();
        assert!(lsd_distance(&same).unwrap() < 1e-15);
        let proof = basis(8, &[0])[0].clone();
        assert!((lsd_acceptance(&same, &proof).unwrap() - 1.0).abs() < 1e-12);
        let ortho = LsdInstance::new(8, basis(8, &[0, 1]), basis(8, &[2, 3])).unwrap();
        assert!((lsd_distance(&ortho).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let outside = basis(8, &[5])[0].clone();
        assert_eq!(lsd_acceptance(&same, &outside).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_bases() {
        assert!(LsdInstance::new(6, vec![], vec![]).is_err());
        let err = LsdInstance::new(4, vec![vec![1.0, 1.0, 0.0, 0.0]], basis(4, &[0])).unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "orthonormal", .. }));
        let same = LsdInstance::new(4, basis(4, &[0]), basis(4, &[0])).unwrap();
        assert!(lsd_acceptance(&same, &[1.0, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn planted_angle_recovered() {
        let mut rng = seeded_rng(21);
        for &theta in &[0.0, 0.1, 0.7, 1.2, std::f64::consts::FRAC_PI_2] {
            let inst = generate_lsd(12, theta, &mut rng).unwrap();
            let expected = (2.0 - 2.0 * f64::cos(theta)).sqrt();
            assert!((lsd_distance(&inst).unwrap() - expected).abs() < 1e-9, "theta {theta}");
            let formula = (2.0 - 2.0 * principal_cosine(&inst).unwrap()).max(0.0).sqrt();
            assert!((lsd_distance(&inst).unwrap() - formula).abs() < 1e-7, "theta {theta}");
        }
    }

    #[test]
    fn planted_cosine_0995() {
        let inst = generate_lsd(8, 0.995f64.acos(), &mut seeded_rng(22)).unwrap();
        let opt = lsd_optimal_proof(&inst).unwrap();
        assert!((opt.acceptance - 0.990025).abs() < 1e-9);
        assert!((opt.cosine.powi(2) - opt.acceptance).abs() < 1e-9);
    }

    #[test]
    fn threshold_instances() {
        let mut rng = seeded_rng(23);
        let close = generate_lsd(8, angle_for_distance(CLOSE_DISTANCE), &mut rng).unwrap();
        assert_eq!(lsd_value(&close).unwrap(), Cell::One);
        assert!(lsd_optimal_proof(&close).unwrap().acceptance >= 0.98);
        let far = generate_lsd(8, angle_for_distance(FAR_DISTANCE), &mut rng).unwrap();
        assert_eq!(lsd_value(&far).unwrap(), Cell::Zero);
        assert!(lsd_optimal_proof(&far).unwrap().acceptance <= 0.0361 + 1e-12);
    }

    #[test]
    fn sampling_never_beats_formula() {
        let mut rng = seeded_rng(24);
        let inst = generate_lsd(8, 0.8, &mut rng).unwrap();
        let exact = lsd_distance(&inst).unwrap();
        for _ in 0..200 {
            let (a, b) = (random_unit(2, &mut rng), random_unit(2, &mut rng));
            assert!(pair_distance(&inst, &a, &b) >= exact - 1e-12);
        }
        let sampled = sampled_min_distance(&inst, 10_000, &mut rng);
        assert!(sampled >= exact - 1e-12);
        assert!(sampled - exact < 1e-3);
    }
}
