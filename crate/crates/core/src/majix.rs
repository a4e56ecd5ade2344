//! The MajIx promise problem and its proof-verification protocols.
//!
//! Alice holds `x in {0,1}^n`, Bob holds `sqrt(n)` distinct indices `I`. The value is 1 when
//! `x` is 1 on all of `I` and 0 when at most `0.9 sqrt(n)` of them are 1. Indices are 0-based.

use num_complex::Complex;
use rand::Rng;

use crate::eigen::hermitian_eig;
use crate::error::{Error, Result};
use crate::function::{ceil_log2, Cell};
use crate::matrix::{inner, norm, Matrix};
use crate::random::{complex_gaussian, distinct_indices, seeded_rng};

/// Single-shot soundness error of the quantum protocol.
pub const SOUNDNESS_BOUND: f64 = 0.9;

/// Normalization tolerance for proofs.
pub const PROOF_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajIxInstance {
    x: Vec<bool>,
    indices: Vec<usize>,
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

impl MajIxInstance {
    pub fn new(x: Vec<bool>, indices: Vec<usize>) -> Result<Self> {
        let n = x.len();
        let root = exact_sqrt(n)
            .filter(|&r| r > 0)
            .ok_or_else(|| Error::invariant("perfect-square", format!("n = {n} is not a positive square")))?;
        if indices.len() != root {
            return Err(Error::invariant(
                "index-count",
                format!("{} indices, expected sqrt(n) = {root}", indices.len()),
            ));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::invariant("index-range", format!("index {i} outside 0..{n}")));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invariant("index-distinct", "repeated index"));
        }
        Ok(Self { x, indices })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn root(&self) -> usize {
        self.indices.len()
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `k = |{j : x_{i_j} = 1}|`.
    pub fn ones_in_index(&self) -> usize {
        self.indices.iter().filter(|&&i| self.x[i]).count()
    }

    /// `|phi_I> = sum_{i in I} |i> / n^{1/4}`.
    pub fn phi(&self) -> Vec<Complex<f64>> {
        let amp = 1.0 / (self.root() as f64).sqrt();
        let mut v = vec![Complex::new(0.0, 0.0); self.n()];
        for &i in &self.indices {
            v[i] = Complex::new(amp, 0.0);
        }
        v
    }
}

/// Largest `k` counted as a 0-input: `floor(0.9 sqrt(n))`.
pub fn zero_threshold(root: usize) -> usize {
    9 * root / 10
}

pub fn majix_value(inst: &MajIxInstance) -> Cell {
    let k = inst.ones_in_index();
    if k == inst.root() {
        Cell::One
    } else if k <= zero_threshold(inst.root()) {
        Cell::Zero
    } else {
        Cell::Undefined
    }
}

/// A unit vector in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProofVector(Vec<Complex<f64>>);

impl ProofVector {
    pub fn new(amplitudes: Vec<Complex<f64>>) -> Result<Self> {
        let n2 = norm(&amplitudes).powi(2);
        if (n2 - 1.0).abs() > PROOF_NORM_TOL {
            return Err(Error::invariant("unit-norm", format!("proof has squared norm {n2}")));
        }
        Ok(Self(amplitudes))
    }

    /// Uniform superposition over `support`.
    pub fn uniform(n: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidArgument("uniform proof over an empty support".into()));
        }
        let amp = Complex::new(1.0 / (support.len() as f64).sqrt(), 0.0);
        let mut v = vec![Complex::new(0.0, 0.0); n];
        for &i in support {
            v[i] = amp;
        }
        Self::new(v)
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let v: Vec<Complex<f64>> = (0..n).map(|_| complex_gaussian(rng)).collect();
        let s = norm(&v);
        Self(v.into_iter().map(|z| z / s).collect())
    }

    pub fn amplitudes(&self) -> &[Complex<f64>] {
        &self.0
    }
}

/// Honest proof: uniform over `I` restricted to the positions where `x` is 1.
pub fn honest_proof(inst: &MajIxInstance) -> Result<ProofVector> {
    let support: Vec<usize> = inst.indices.iter().copied().filter(|&i| inst.x[i]).collect();
    ProofVector::uniform(inst.n(), &support)
}

fn check_proof(inst: &MajIxInstance, proof: &ProofVector) -> Result<()> {
    if proof.0.len() != inst.n() {
        return Err(Error::DimensionMismatch(format!("proof of length {} for n = {}", proof.0.len(), inst.n())));
    }
    Ok(())
}

/// Alice projects onto `span{|i> : x_i = 1}`, Bob measures the renormalized state against `|phi_I>`.
pub fn acceptance_simulated(inst: &MajIxInstance, proof: &ProofVector) -> Result<f64> {
    check_proof(inst, proof)?;
    let projected: Vec<Complex<f64>> = proof
        .0
        .iter()
        .zip(&inst.x)
        .map(|(&a, &bit)| if bit { a } else { Complex::new(0.0, 0.0) })
        .collect();
    let alice = norm(&projected).powi(2);
    if alice == 0.0 {
        return Ok(0.0);
    }
    let s = alice.sqrt();
    let renormalized: Vec<Complex<f64>> = projected.iter().map(|z| z / s).collect();
    let bob = inner(&inst.phi(), &renormalized).norm_sqr();
    Ok(alice * bob)
}

/// `|sum_{i in I, x_i = 1} alpha_i|^2 / sqrt(n)`.
pub fn acceptance_closed_form(inst: &MajIxInstance, proof: &ProofVector) -> Result<f64> {
    check_proof(inst, proof)?;
    let sum: Complex<f64> = inst.indices.iter().filter(|&&i| inst.x[i]).map(|&i| proof.0[i]).sum();
    Ok(sum.norm_sqr() / inst.root() as f64)
}

#[derive(Debug, Clone)]
pub struct CheatOptimum {
    /// Top eigenvalue of the acceptance operator.
    pub value: f64,
    pub proof: ProofVector,
    /// `k / sqrt(n)`.
    pub closed_form: f64,
}

/// Best acceptance over all proofs, from the spectrum of `P_x |phi_I><phi_I| P_x`.
pub fn optimal_cheat(inst: &MajIxInstance) -> Result<CheatOptimum> {
    let projected: Vec<Complex<f64>> = inst
        .phi()
        .into_iter()
        .zip(&inst.x)
        .map(|(a, &bit)| if bit { a } else { Complex::new(0.0, 0.0) })
        .collect();
    let spectrum = hermitian_eig(&Matrix::outer(&projected))?;
    let proof = ProofVector::new(spectrum.eigenvector(0))?;
    Ok(CheatOptimum {
        value: spectrum.max_eigenvalue(),
        proof,
        closed_form: inst.ones_in_index() as f64 / inst.root() as f64,
    })
}

/// Soundness error after `reps` parallel repetitions.
pub fn repeated_soundness(reps: u32) -> f64 {
    SOUNDNESS_BOUND.powi(reps as i32)
}

/// Fewest repetitions with `0.9^k <= 1/3`.
pub fn default_repetitions() -> u32 {
    (1..).find(|&k| repeated_soundness(k) <= 1.0 / 3.0).expect("geometric decay")
}

/// Bits Bob sends: `reps * ceil(log2 n)`.
pub fn bob_to_alice_cost(n: usize, reps: u32) -> u64 {
    u64::from(reps) * u64::from(ceil_log2(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobToAliceRun {
    pub sampled: Vec<usize>,
    pub output: bool,
    pub cost_bits: u64,
}

/// Bob sends `reps` indices drawn uniformly with replacement from `I`; Alice accepts iff all are 1.
pub fn bob_to_alice(inst: &MajIxInstance, reps: u32, rng: &mut impl Rng) -> Result<BobToAliceRun> {
    if reps < 1 {
        return Err(Error::InvalidArgument("at least one repetition".into()));
    }
    let sampled: Vec<usize> = (0..reps).map(|_| inst.indices[rng.random_range(0..inst.root())]).collect();
    let output = sampled.iter().all(|&i| inst.x[i]);
    Ok(BobToAliceRun { sampled, output, cost_bits: bob_to_alice_cost(inst.n(), reps) })
}

/// One CSV row of a Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloRow {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub reps: u32,
    pub trials: u64,
    pub acceptance: f64,
}

impl MonteCarloRow {
    /// Standard error of the empirical acceptance under the bound `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

pub fn bob_to_alice_monte_carlo(inst: &MajIxInstance, reps: u32, trials: u64, seed: u64) -> Result<MonteCarloRow> {
    let mut rng = seeded_rng(seed);
    let mut accepted = 0u64;
    for _ in 0..trials {
        if bob_to_alice(inst, reps, &mut rng)?.output {
            accepted += 1;
        }
    }
    Ok(MonteCarloRow {
        seed,
        n: inst.n(),
        k: inst.ones_in_index(),
        reps,
        trials,
        acceptance: accepted as f64 / trials.max(1) as f64,
    })
}

/// Requested promise class for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajIxTarget {
    One,
    /// A 0-input with exactly `ones` ones inside `I`.
    Zero { ones: usize },
    /// Outside the promise, with `ones` ones inside `I`.
    Undefined { ones: usize },
}

/// Random `I` and `x`; positions outside `I` are uniform bits.
pub fn generate_instance(n: usize, target: MajIxTarget, rng: &mut impl Rng) -> Result<MajIxInstance> {
    let root = exact_sqrt(n)
        .filter(|&r| r > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("n = {n} is not a positive square")))?;
    let ones = match target {
        MajIxTarget::One => root,
        MajIxTarget::Zero { ones } if ones <= zero_threshold(root) => ones,
        MajIxTarget::Undefined { ones } if ones > zero_threshold(root) && ones < root => ones,
        _ => return Err(Error::InvalidArgument(format!("{target:?} is not realizable at n = {n}"))),
    };
    let indices = distinct_indices(n, root, rng);
    let mut x: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let chosen = distinct_indices(root, ones, rng);
    for &i in &indices {
        x[i] = false;
    }
    for j in chosen {
        x[indices[j]] = true;
    }
    MajIxInstance::new(x, indices)
}
