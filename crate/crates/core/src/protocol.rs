//! One-way quantum protocols: Alice sends `rho_x`, Bob measures `{P_y, I - P_y}` and
//! accepts on `P_y`.

use num_complex::Complex;
use rand::Rng;

use crate::eigen::{hermitian_eig, PSD_TOL};
use crate::error::{Error, Result};
use crate::function::{Cell, PartialFunction};
use crate::matrix::Matrix;
use crate::measures::{relative_entropy, relative_min_entropy, EntropyValue};
use crate::random::{complex_gaussian, random_density, random_unitary, rotated_basis_projector};
use crate::{ComplexMatrix, DensityMatrix, Projector};

/// Largest Hilbert-space dimension `boost` and padding will build.
pub const DEFAULT_DIM_CAP: usize = 256;

const BUDGET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOneWayProtocol {
    qubits: usize,
    epsilon: f64,
    messages: Vec<DensityMatrix>,
    measurements: Vec<Projector>,
    prior: DensityMatrix,
    prior_budget: f64,
    prior_entropies: Vec<f64>,
}

impl QuantumOneWayProtocol {
    /// Builds and validates a protocol.
    ///
    /// Without an explicit prior the guess starts maximally mixed with budget `q`
    /// (`S(rho || I/d) = q - S(rho)`); an explicit prior without a budget gets `2q`.
    pub fn new(
        qubits: usize,
        epsilon: f64,
        messages: Vec<DensityMatrix>,
        measurements: Vec<Projector>,
        prior: Option<DensityMatrix>,
        prior_budget: Option<f64>,
    ) -> Result<Self> {
        let dim = 1usize
            .checked_shl(qubits as u32)
            .filter(|_| qubits < 16)
            .ok_or_else(|| Error::InvalidArgument(format!("{qubits} qubits is beyond desk scale")))?;
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::invariant("epsilon-range", format!("epsilon = {epsilon}")));
        }
        if messages.is_empty() || measurements.is_empty() {
            return Err(Error::invariant("nonempty", "protocol needs messages and measurements"));
        }
        for (x, m) in messages.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "message {x} has dimension {}, expected 2^{qubits} = {dim}",
                    m.dim()
                )));
            }
        }
        for (y, p) in measurements.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "measurement {y} has dimension {}, expected {dim}",
                    p.dim()
                )));
            }
        }
        let default_budget = if prior.is_some() { 2.0 * qubits as f64 } else { qubits as f64 };
        let prior = prior.unwrap_or_else(|| DensityMatrix::maximally_mixed(dim));
        if prior.dim() != dim {
            return Err(Error::DimensionMismatch(format!("prior has dimension {}", prior.dim())));
        }
        let prior_budget = prior_budget.unwrap_or(default_budget);
        if !prior_budget.is_finite() || prior_budget < 0.0 {
            return Err(Error::invariant("prior-budget", format!("budget {prior_budget} must be finite")));
        }
        let mut prior_entropies = Vec::with_capacity(messages.len());
        for (x, m) in messages.iter().enumerate() {
            match relative_entropy(m, &prior)? {
                EntropyValue::Finite(s) if s <= prior_budget + BUDGET_TOL => prior_entropies.push(s),
                value => {
                    return Err(Error::invariant(
                        "prior-budget",
                        format!("S(rho_{x} || prior) = {value} exceeds budget {prior_budget}"),
                    ))
                }
            }
        }
        Ok(Self { qubits, epsilon, messages, measurements, prior, prior_budget, prior_entropies })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn x_count(&self) -> usize {
        self.messages.len()
    }

    pub fn y_count(&self) -> usize {
        self.measurements.len()
    }

    pub fn message(&self, x: usize) -> &DensityMatrix {
        &self.messages[x]
    }

    pub fn messages(&self) -> &[DensityMatrix] {
        &self.messages
    }

    pub fn measurement(&self, y: usize) -> &Projector {
        &self.measurements[y]
    }

    pub fn measurements(&self) -> &[Projector] {
        &self.measurements
    }

    pub fn prior(&self) -> &DensityMatrix {
        &self.prior
    }

    pub fn prior_budget(&self) -> f64 {
        self.prior_budget
    }

    /// `S(rho_x || prior)`, computed at construction.
    pub fn prior_entropy(&self, x: usize) -> f64 {
        self.prior_entropies[x]
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// `Tr(P_y rho_x)`, clamped to `[0, 1]`.
    pub fn acceptance_probability(&self, x: usize, y: usize) -> f64 {
        self.measurements[y].probability(&self.messages[x]).clamp(0.0, 1.0)
    }
}

fn check_shape(p: &QuantumOneWayProtocol, f: &PartialFunction) -> Result<()> {
    if p.x_count() != f.x_count() || p.y_count() != f.y_count() {
        return Err(Error::DimensionMismatch(format!(
            "protocol is {} x {}, function is {} x {}",
            p.x_count(),
            p.y_count(),
            f.x_count(),
            f.y_count()
        )));
    }
    Ok(())
}

/// Largest deviation from the correct answer over the defined cells of `f`.
pub fn verify_protocol(p: &QuantumOneWayProtocol, f: &PartialFunction) -> Result<f64> {
    check_shape(p, f)?;
    Ok(f.defined_cells()
        .map(|(x, y, bit)| {
            let acc = p.acceptance_probability(x, y);
            if bit {
                1.0 - acc
            } else {
                acc
            }
        })
        .fold(0.0, f64::max))
}

/// [`verify_protocol`], failing when the observed error exceeds the protocol's bound.
pub fn ensure_valid(p: &QuantumOneWayProtocol, f: &PartialFunction) -> Result<f64> {
    let observed = verify_protocol(p, f)?;
    if observed > p.epsilon() + 1e-12 {
        return Err(Error::ErrorBoundViolated { observed, bound: p.epsilon() });
    }
    Ok(observed)
}

/// `sum_{j >= (k+1)/2} C(k, j) e^j (1 - e)^(k - j)`: probability that a majority of
/// `k` independent trials err.
pub fn binomial_tail(k: usize, error: f64) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=k {
        if j > 0 {
            binom = binom * (k - j + 1) as f64 / j as f64;
        }
        if 2 * j > k {
            total += binom * error.powi(j as i32) * (1.0 - error).powi((k - j) as i32);
        }
    }
    total
}

fn majority_projector(p: &Projector, k: usize) -> Projector {
    let accept = p.matrix();
    let reject = p.complement().into_matrix();
    let mut total = Matrix::zeros(p.dim().pow(k as u32));
    for pattern in 0u32..(1 << k) {
        if 2 * pattern.count_ones() as usize <= k {
            continue;
        }
        let mut term = Matrix::identity(1);
        for i in 0..k {
            let factor = if pattern >> i & 1 == 1 { accept } else { &reject };
            term = term.kron(factor);
        }
        total = &total + &term;
    }
    Projector::new_unchecked(total)
}

/// `k`-fold parallel repetition with majority vote.
///
/// Messages become `rho^{⊗k}`, measurements accept when more than half the copies accept,
/// and the error bound becomes the binomial tail at the old bound.
pub fn boost(
    p: &QuantumOneWayProtocol,
    f: &PartialFunction,
    k: usize,
    dim_cap: usize,
) -> Result<QuantumOneWayProtocol> {
    if k % 2 == 0 {
        return Err(Error::InvalidArgument(format!("repetition count must be odd, got {k}")));
    }
    ensure_valid(p, f)?;
    if k == 1 {
        return Ok(p.clone());
    }
    let required = p
        .dim()
        .checked_pow(k as u32)
        .ok_or(Error::DimensionCap { required: usize::MAX, cap: dim_cap })?;
    if required > dim_cap {
        return Err(Error::DimensionCap { required, cap: dim_cap });
    }
    let power = |rho: &DensityMatrix| {
        (1..k).fold(rho.clone(), |acc, _| acc.tensor(rho))
    };
    let messages = p.messages.iter().map(power).collect();
    let measurements = p.measurements.iter().map(|m| majority_projector(m, k)).collect();
    QuantumOneWayProtocol::new(
        p.qubits * k,
        binomial_tail(k, p.epsilon),
        messages,
        measurements,
        Some(power(&p.prior)),
        Some(p.prior_budget * k as f64),
    )
}

/// Embeds a protocol into twice the dimension so that every measurement subspace has
/// dimension exactly `d' / 2`; messages and prior live in the first block.
pub fn pad_to_half_rank(p: &QuantumOneWayProtocol, dim_cap: usize) -> Result<QuantumOneWayProtocol> {
    let d = p.dim();
    if 2 * d > dim_cap {
        return Err(Error::DimensionCap { required: 2 * d, cap: dim_cap });
    }
    let zero = ComplexMatrix::zeros(d);
    let embed = |rho: &DensityMatrix| DensityMatrix::new_unchecked(rho.matrix().direct_sum(&zero));
    let messages = p.messages.iter().map(embed).collect();
    let measurements = p
        .measurements
        .iter()
        .map(|m| {
            let fill: Vec<usize> = (0..d - m.rank()).collect();
            let extra = Projector::basis(d, &fill);
            Projector::new_unchecked(m.matrix().direct_sum(extra.matrix()))
        })
        .collect();
    QuantumOneWayProtocol::new(
        p.qubits + 1,
        p.epsilon,
        messages,
        measurements,
        Some(embed(&p.prior)),
        Some(p.prior_budget),
    )
}

/// Result of checking the teleportation decomposition of the uniform prior.
#[derive(Debug, Clone)]
pub struct TeleportReport {
    pub qubits: usize,
    /// `max |sigma_1 - I/d|`.
    pub deviation_from_mixed: f64,
    /// Smallest eigenvalue of `sigma_1 - rho / 4^q`.
    pub residual_min_eigenvalue: f64,
    pub residual_psd: bool,
    pub min_entropy: EntropyValue<f64>,
    /// `2q`.
    pub bound: f64,
}

impl TeleportReport {
    pub fn passed(&self) -> bool {
        self.deviation_from_mixed <= 1e-10
            && self.residual_psd
            && self.min_entropy.finite().is_some_and(|s| s <= self.bound + 1e-9)
    }
}

fn paulis() -> [ComplexMatrix; 4] {
    let c = |re: f64, im: f64| Complex::new(re, im);
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap(),
        ComplexMatrix::from_rows(vec![vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]]).unwrap(),
        ComplexMatrix::from_rows(vec![vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]]).unwrap(),
    ]
}

/// Bob's state when teleportation corrections are not applied: the uniform Pauli twirl
/// `(1/4^q) sum_P P rho P^dagger`, which contains `rho / 4^q` (the all-zero syndrome).
pub fn teleport_prior(message: &DensityMatrix) -> Result<(DensityMatrix, TeleportReport)> {
    let qubits = match message.dim() {
        2 => 1,
        4 => 2,
        d => return Err(Error::InvalidArgument(format!("teleport_prior supports q in {{1, 2}}, got dimension {d}"))),
    };
    let base = paulis();
    let mut ops = vec![ComplexMatrix::identity(1)];
    for _ in 0..qubits {
        ops = ops.iter().flat_map(|o| base.iter().map(move |p| o.kron(p))).collect();
    }
    let weight = 1.0 / ops.len() as f64;
    let mut twirl = ComplexMatrix::zeros(message.dim());
    for op in &ops {
        let term = &(op * message.matrix()) * &op.adjoint();
        twirl = &twirl + &term.scale(weight);
    }
    let sigma = DensityMatrix::new_unchecked(twirl);
    let mixed = DensityMatrix::maximally_mixed(message.dim());
    let residual = sigma.matrix() - &message.matrix().scale(weight);
    let residual_min_eigenvalue = hermitian_eig(&residual.hermitize())?.min_eigenvalue();
    let report = TeleportReport {
        qubits,
        deviation_from_mixed: (sigma.matrix() - mixed.matrix()).max_abs(),
        residual_min_eigenvalue,
        residual_psd: residual_min_eigenvalue >= -PSD_TOL,
        min_entropy: relative_min_entropy(message, &sigma)?,
        bound: 2.0 * qubits as f64,
    };
    Ok((sigma, report))
}

/// Shape of a randomly planted protocol.
#[derive(Debug, Clone, Copy)]
pub struct PlantedSpec {
    pub qubits: usize,
    pub x_count: usize,
    pub y_count: usize,
    pub epsilon: f64,
    /// Fraction of otherwise defined cells additionally removed from the promise.
    pub undefined_fraction: f64,
}

/// Random protocol together with the function it computes with error below `0.9 * epsilon`.
///
/// A random unitary fixes a basis. Each message is a noisy pure state supported on one or
/// two basis vectors; each measurement projects onto a random set of basis vectors. A cell
/// is 1 (0) when the message support lies inside (outside) the measured set and undefined
/// when the measurement splits the support.
pub fn planted_protocol(
    spec: PlantedSpec,
    rng: &mut impl Rng,
) -> Result<(PartialFunction, QuantumOneWayProtocol)> {
    let d = 1usize << spec.qubits;
    let u = random_unitary(d, rng);
    let mut supports = Vec::with_capacity(spec.x_count);
    let mut messages = Vec::with_capacity(spec.x_count);
    for _ in 0..spec.x_count {
        let first = rng.random_range(0..d);
        let mut support = vec![first];
        if d > 1 && rng.random_bool(0.3) {
            let second = (first + rng.random_range(1..d)) % d;
            support.push(second);
        }
        let mut coeffs = vec![Complex::new(0.0, 0.0); d];
        for &b in &support {
            coeffs[b] = complex_gaussian(rng);
        }
        let psi = u.mul_vec(&coeffs);
        let pure = DensityMatrix::pure(&psi)?;
        let noise = rng.random_range(0.0..0.9) * spec.epsilon;
        messages.push(pure.mix(&random_density(d, rng), noise)?);
        supports.push(support);
    }
    let mut sets = Vec::with_capacity(spec.y_count);
    let mut measurements = Vec::with_capacity(spec.y_count);
    for _ in 0..spec.y_count {
        let set: Vec<usize> = (0..d).filter(|_| rng.random_bool(0.5)).collect();
        measurements.push(rotated_basis_projector(&u, &set));
        sets.push(set);
    }
    let mut cells = Vec::with_capacity(spec.x_count * spec.y_count);
    for support in &supports {
        for set in &sets {
            let inside = support.iter().filter(|b| set.contains(b)).count();
            let cell = if inside == support.len() {
                Cell::One
            } else if inside == 0 {
                Cell::Zero
            } else {
                Cell::Undefined
            };
            let dropped = cell != Cell::Undefined && rng.random_bool(spec.undefined_fraction);
            cells.push(if dropped { Cell::Undefined } else { cell });
        }
    }
    if cells.iter().all(|&c| c == Cell::Undefined) {
        // Keep the promise nonempty: the first measurement becomes trivial and accepts everything.
        measurements[0] = Projector::identity(d);
        for x in 0..spec.x_count {
            cells[x * spec.y_count] = Cell::One;
        }
    }
    let f = PartialFunction::new(spec.x_count, spec.y_count, cells)?;
    let p = QuantumOneWayProtocol::new(spec.qubits, spec.epsilon, messages, measurements, None, None)?;
    Ok((f, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::is_psd;
    use crate::random::{random_pure_state, seeded_rng};

    fn planted(seed: u64, qubits: usize) -> (PartialFunction, QuantumOneWayProtocol) {
        let spec = PlantedSpec { qubits, x_count: 4, y_count: 6, epsilon: 1e-4, undefined_fraction: 0.1 };
        planted_protocol(spec, &mut seeded_rng(seed)).unwrap()
    }

    fn single_message(rho: DensityMatrix, measurements: Vec<Projector>) -> QuantumOneWayProtocol {
        QuantumOneWayProtocol::new(1, 0.1, vec![rho], measurements, None, None).unwrap()
    }

    #[test]
    fn acceptance_examples() {
        let p = single_message(
            DensityMatrix::maximally_mixed(2),
            vec![Projector::identity(2), Projector::zero(2), Projector::basis(2, &[1])],
        );
        assert_eq!(p.acceptance_probability(0, 0), 1.0);
        assert_eq!(p.acceptance_probability(0, 1), 0.0);
        assert!((p.acceptance_probability(0, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn verify_constant_function() {
        let p = single_message(DensityMatrix::basis_state(2, 0), vec![Projector::identity(2); 3]);
        let f = PartialFunction::constant(1, 3, true);
        assert_eq!(verify_protocol(&p, &f).unwrap(), 0.0);
    }

    #[test]
    fn verify_planted_error() {
        // Acceptance exactly 1 - eps on the 1-cell.
        let eps = 0.05;
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.0 - eps, eps])).unwrap();
        let p = single_message(rho, vec![Projector::basis(2, &[0])]);
        let f = PartialFunction::constant(1, 1, true);
        assert!((verify_protocol(&p, &f).unwrap() - eps).abs() < 1e-15);
    }

    #[test]
    fn verify_ignores_undefined_cells() {
        let p = single_message(DensityMatrix::basis_state(2, 0), vec![Projector::identity(2), Projector::zero(2)]);
        let f = PartialFunction::new(1, 2, vec![Cell::One, Cell::Undefined]).unwrap();
        assert_eq!(verify_protocol(&p, &f).unwrap(), 0.0);
    }

    #[test]
    fn verify_shape_mismatch() {
        let p = single_message(DensityMatrix::basis_state(2, 0), vec![Projector::identity(2)]);
        let f = PartialFunction::constant(2, 1, true);
        assert!(matches!(verify_protocol(&p, &f), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn binomial_tail_oracle() {
        // Direct enumeration of all 2^5 outcome patterns.
        let e: f64 = 1.0 / 3.0;
        let mut oracle = 0.0f64;
        for pattern in 0u32..32 {
            let errs = pattern.count_ones() as i32;
            if errs >= 3 {
                oracle += e.powi(errs) * (1.0 - e).powi(5 - errs);
            }
        }
        assert!((binomial_tail(5, e) - oracle).abs() < 1e-15);
        assert!((binomial_tail(5, e) - 17.0 / 81.0).abs() < 1e-15);
        assert_eq!(binomial_tail(7, 0.0), 0.0);
    }

    #[test]
    fn boost_k1_is_identity_and_k5_meets_tail() {
        let third = 1.0 / 3.0;
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.0 - third, third])).unwrap();
        let p = QuantumOneWayProtocol::new(1, third, vec![rho], vec![Projector::basis(2, &[0])], None, None)
            .unwrap();
        let f = PartialFunction::constant(1, 1, true);
        assert_eq!(boost(&p, &f, 1, 256).unwrap(), p);
        let b = boost(&p, &f, 5, 256).unwrap();
        assert_eq!(b.dim(), 32);
        let err = verify_protocol(&b, &f).unwrap();
        assert!(err <= 17.0 / 81.0 + 1e-12);
        assert!((b.epsilon() - 17.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn boost_zero_error_stays_zero() {
        let p = single_message(DensityMatrix::basis_state(2, 0), vec![Projector::basis(2, &[0])]);
        let f = PartialFunction::constant(1, 1, true);
        assert!(verify_protocol(&boost(&p, &f, 3, 256).unwrap(), &f).unwrap() < 1e-14);
    }

    #[test]
    fn boost_refuses_above_cap() {
        let (f, p) = planted(3, 2);
        assert!(matches!(boost(&p, &f, 5, 256), Err(Error::DimensionCap { required: 1024, cap: 256 })));
        assert!(boost(&p, &f, 2, 256).is_err());
    }

    #[test]
    fn planted_protocols_are_valid() {
        for seed in 0..20 {
            let (f, p) = planted(seed, 1 + (seed as usize % 2));
            let err = verify_protocol(&p, &f).unwrap();
            assert!(err <= 0.9e-4, "seed {seed}: error {err}");
        }
    }

    #[test]
    fn maximally_mixed_prior_budget() {
        let (_, p) = planted(7, 2);
        for x in 0..p.x_count() {
            let s = p.prior_entropy(x);
            let vn = crate::measures::von_neumann_entropy(p.message(x)).unwrap().finite().unwrap();
            assert!((s - (2.0 - vn)).abs() < 1e-9);
            assert!(s <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn prior_budget_violation_rejected() {
        let err = QuantumOneWayProtocol::new(
            1,
            0.1,
            vec![DensityMatrix::basis_state(2, 0)],
            vec![Projector::identity(2)],
            Some(DensityMatrix::basis_state(2, 1)),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Invariant { invariant: "prior-budget", .. }));
    }

    #[test]
    fn teleport_prior_examples() {
        let (sigma, report) = teleport_prior(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((sigma.matrix() - DensityMatrix::maximally_mixed(2).matrix()).max_abs() < 1e-15);
        assert!(report.min_entropy.finite().unwrap() < 1e-12);

        let mut rng = seeded_rng(31);
        let pure = random_pure_state(2, &mut rng);
        let (sigma, report) = teleport_prior(&pure).unwrap();
        assert!(report.passed());
        let residual = sigma.matrix() - &pure.matrix().scale(0.25);
        assert!(is_psd(&residual, 1e-12).unwrap());
        // Pure qubit against I/2: S_inf = log2(2 * 1) = 1.
        assert!((report.min_entropy.finite().unwrap() - 1.0).abs() < 1e-10);

        let two = random_pure_state(4, &mut rng);
        assert!(teleport_prior(&two).unwrap().1.passed());
        assert!(teleport_prior(&random_pure_state(8, &mut rng)).is_err());
    }

    #[test]
    fn padding_gives_half_rank_and_same_acceptance() {
        let (f, p) = planted(9, 1);
        let padded = pad_to_half_rank(&p, 256).unwrap();
        assert_eq!(padded.dim(), 4);
        for y in 0..p.y_count() {
            assert_eq!(padded.measurement(y).rank(), 2);
            for x in 0..p.x_count() {
                let diff = padded.acceptance_probability(x, y) - p.acceptance_probability(x, y);
                assert!(diff.abs() < 1e-14);
            }
        }
        assert!(verify_protocol(&padded, &f).unwrap() <= p.epsilon());
    }
}
