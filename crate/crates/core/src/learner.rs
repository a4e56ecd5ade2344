//! Compiling a one-way quantum protocol into a deterministic one.
//!
//! Bob keeps a classical description of a guess state `sigma`, initially the protocol's
//! prior. Both parties walk Bob's inputs `y` in ascending order. Whenever the guess would
//! answer `y` with deficit `a >= 10 sqrt(eps)` on the correct side, Alice sends `y`, the
//! function value and the true error `eps_y` rounded to an `eps^2` grid, and Bob rescales
//! the two blocks of `sigma` so that the guess accepts exactly like the target. Each such
//! update lowers `S(rho || sigma)` by at least `a / 2`, which bounds the number of updates
//! by the initial relative entropy over `5 sqrt(eps)`.

use crate::error::{Error, Result};
use crate::function::{ceil_log2, PartialFunction};
use crate::measures::{
    binary_entropy, numerical_rank_floor, pinch, relative_entropy, relative_entropy_clamped, trace_distance,
    von_neumann_entropy,
};
use crate::protocol::{verify_protocol, QuantumOneWayProtocol};
use crate::eigen::ZERO_EIGENVALUE;
use crate::scalar::Real;
use crate::state;
use crate::{DensityMatrix, EntropyValue, Projector};

/// Tolerance of the per-update progress check `Delta S >= a/2 - tol`.
pub const PROGRESS_TOL: f64 = 1e-8;

/// Guesses with `a` this close to 1 are orthogonal to the accepting block.
pub const DEGENERATE_GAP: f64 = 1e-9;

const RESTORE_TOL: f64 = 1e-10;
const ENTROPY_TOL: f64 = 1e-9;

/// Parameters of the guess-update loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    epsilon: f64,
    trigger: f64,
    quantum_precision: f64,
}

impl LearnerConfig {
    /// Largest error bound for which the per-update progress estimate holds.
    pub const MAX_EPSILON: f64 = 1e-4;

    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= Self::MAX_EPSILON) {
            return Err(Error::InvalidArgument(format!(
                "learner epsilon must lie in (0, {}], got {epsilon}",
                Self::MAX_EPSILON
            )));
        }
        Ok(Self { epsilon, trigger: 10.0 * epsilon.sqrt(), quantum_precision: epsilon * epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Update threshold `10 sqrt(eps)` on the deficit `a`.
    pub fn trigger(&self) -> f64 {
        self.trigger
    }

    /// Grid step `eps^2` for the transmitted error.
    pub fn quantum_precision(&self) -> f64 {
        self.quantum_precision
    }

    /// Width of the grid-index field: `ceil(log2(1 / eps^2))`.
    pub fn grid_bits(&self) -> u32 {
        let exact = (1.0 / self.quantum_precision).log2();
        (exact - 1e-9).ceil() as u32
    }

    /// Largest grid index, the one representing `eps`.
    pub fn grid_max(&self) -> u64 {
        (self.epsilon / self.quantum_precision).round() as u64
    }

    /// Rounds `eps_y` up onto the `eps^2` grid and clamps the index to `[0, eps / eps^2]`.
    pub fn quantize(&self, eps_y: f64) -> u64 {
        let ratio = (eps_y.max(0.0)) / self.quantum_precision;
        let floor = ratio.floor();
        let index = if ratio - floor < 1e-9 { floor } else { ratio.ceil() };
        (index as u64).min(self.grid_max())
    }

    pub fn dequantize(&self, index: u64) -> f64 {
        (index as f64 * self.quantum_precision).min(self.epsilon)
    }

    /// Bits per transcript record for `column_bits`-bit column names.
    pub fn record_bits(&self, column_bits: u32) -> u32 {
        column_bits + 1 + self.grid_bits()
    }
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self::new(1e-6).expect("default epsilon is in range")
    }
}

/// One message unit from Alice: column, function value, quantized error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranscriptRecord {
    pub y: usize,
    pub value: bool,
    pub grid_index: u64,
}

impl TranscriptRecord {
    pub fn eps_tilde(&self, cfg: &LearnerConfig) -> f64 {
        cfg.dequantize(self.grid_index)
    }
}

/// Offline measurements taken around one update (they use the target state Bob never sees).
#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub y: usize,
    pub a: f64,
    pub eps_true: f64,
    pub eps_tilde: f64,
    /// `S(rho || sigma_i)`.
    pub before: f64,
    /// `S(rho || sigma_{i+1})`.
    pub after: EntropyValue,
    /// `S(pinch rho || pinch sigma_i)`.
    pub pinched: f64,
    /// `S(pinch rho) - S(rho)`.
    pub entropy_gain: f64,
    /// `H(eps_y)`.
    pub binary_entropy: f64,
    /// `|Tr(Q sigma_{i+1}) - (1 - eps_tilde)|`.
    pub restore_error: f64,
    /// Change in `Delta S` when the exact `eps_y` replaces its grid value.
    pub quantization_shift: f64,
    pub rank: usize,
    pub dim: usize,
}

impl AuditEntry {
    /// `S(rho || sigma_i) - S(rho || sigma_{i+1})`, `-inf` if the new guess lost the support.
    pub fn delta(&self) -> f64 {
        self.before - self.after.as_f64()
    }
}

/// Everything produced by the guess-update loop for one input `x`.
#[derive(Debug, Clone)]
pub struct LearningRun {
    pub x: usize,
    pub epsilon: f64,
    pub guesses: Vec<DensityMatrix>,
    pub transcript: Vec<TranscriptRecord>,
    /// `(y, output)` for every defined column of row `x`, ascending.
    pub decisions: Vec<(usize, bool)>,
    pub audit: Vec<AuditEntry>,
    pub initial_entropy: f64,
    pub final_entropy: EntropyValue,
    pub final_trace_distance: f64,
}

impl LearningRun {
    pub fn updates(&self) -> usize {
        self.transcript.len()
    }

    pub fn final_guess(&self) -> &DensityMatrix {
        self.guesses.last().expect("run holds the prior")
    }
}

/// `P_y` for value 1, `I - P_y` for value 0.
pub fn oriented_projector<T: Real>(p: &state::Projector<T>, value: bool) -> state::Projector<T> {
    if value {
        p.clone()
    } else {
        p.complement()
    }
}

/// `((1 - w) / Tr(Q sigma)) Q sigma Q + (w / Tr(Q^⊥ sigma)) Q^⊥ sigma Q^⊥` without
/// precondition checks; a zero-weight block is dropped.
pub fn block_rescale<T: Real>(
    sigma: &state::DensityMatrix<T>,
    q: &state::Projector<T>,
    weight_outside: T,
) -> Result<state::DensityMatrix<T>> {
    if sigma.dim() != q.dim() {
        return Err(Error::DimensionMismatch("guess and projector dimensions differ".into()));
    }
    let inside = q.sandwich(sigma.matrix());
    let outside = q.complement().sandwich(sigma.matrix());
    let t_in = inside.real_trace();
    let t_out = outside.real_trace();
    if t_in <= T::zero() {
        return Err(Error::DegenerateGuess { a: (T::one() - t_in).to_f64_lossy() });
    }
    let mut out = inside.scale((T::one() - weight_outside) / t_in);
    if weight_outside > T::zero() {
        if t_out <= T::zero() {
            return Err(Error::InvalidArgument("cannot give weight to an empty block".into()));
        }
        out = &out + &outside.scale(weight_outside / t_out);
    }
    Ok(state::DensityMatrix::new_unchecked(out))
}

/// The update `sigma -> ((1 - eps~)/(1 - a)) Q sigma Q + (eps~ / a) Q^⊥ sigma Q^⊥`,
/// where `a = 1 - Tr(Q sigma)`.
pub fn update_guess<T: Real>(
    sigma: &state::DensityMatrix<T>,
    q: &state::Projector<T>,
    eps_tilde: T,
    cfg: &LearnerConfig,
) -> Result<state::DensityMatrix<T>> {
    let a = (T::one() - q.probability(sigma)).to_f64_lossy();
    if a >= 1.0 - DEGENERATE_GAP {
        return Err(Error::DegenerateGuess { a });
    }
    if a < cfg.trigger() {
        return Err(Error::BelowTrigger { a, trigger: cfg.trigger() });
    }
    if !(T::zero() <= eps_tilde && eps_tilde <= T::lit(cfg.epsilon())) {
        return Err(Error::InvalidArgument(format!(
            "eps_tilde {eps_tilde} outside [0, {}]",
            cfg.epsilon()
        )));
    }
    block_rescale(sigma, q, eps_tilde)
}

/// `S(rho || sigma)` for a guess produced by updates with nonzero block weights. Such a guess
/// keeps the support of the prior, but its eigenvalues shrink by about `eps~` per update
/// and fall below what the solver resolves; those are raised to the resolution floor.
fn tracked_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<EntropyValue> {
    EntropyValue::from_bits(relative_entropy_clamped(rho, sigma, numerical_rank_floor(sigma)?)?)
}

fn finite_entropy(value: EntropyValue, what: &str) -> Result<f64> {
    value
        .finite()
        .ok_or_else(|| Error::SupportViolation(format!("{what} is infinite")))
}

/// Runs the guess-update loop for input `x`.
pub fn run_learning(
    p: &QuantumOneWayProtocol,
    f: &PartialFunction,
    x: usize,
    cfg: &LearnerConfig,
) -> Result<LearningRun> {
    let observed = verify_protocol(p, f)?;
    if observed > cfg.epsilon() + 1e-12 {
        return Err(Error::ErrorBoundViolated { observed, bound: cfg.epsilon() });
    }
    if x >= p.x_count() {
        return Err(Error::InvalidArgument(format!("x = {x} out of range")));
    }
    let rho = p.message(x);
    let mut sigma = p.prior().clone();
    let initial_entropy = finite_entropy(relative_entropy(rho, &sigma)?, "S(rho || prior)")?;
    let rho_entropy = von_neumann_entropy(rho)?.as_f64();

    let mut current = initial_entropy;
    let mut guesses = vec![sigma.clone()];
    let mut transcript = Vec::new();
    let mut decisions = Vec::new();
    let mut audit = Vec::new();

    for (y, value) in f.defined_in_row(x) {
        let measurement = p.measurement(y);
        let q = oriented_projector(measurement, value);
        let a = 1.0 - q.probability(&sigma);
        if a < cfg.trigger() {
            let decision = measurement.probability(&sigma) >= 0.5;
            if decision != value {
                return Err(Error::Consistency {
                    x,
                    y,
                    detail: format!("threshold rule disagrees with f at deficit a = {a:e}"),
                });
            }
            decisions.push((y, decision));
            continue;
        }

        let eps_true = (1.0 - q.probability(rho)).clamp(0.0, cfg.epsilon());
        let grid_index = cfg.quantize(eps_true);
        let eps_tilde = cfg.dequantize(grid_index);
        let next = update_guess(&sigma, &q, eps_tilde, cfg)?;

        let after = if eps_tilde == 0.0 && eps_true > ZERO_EIGENVALUE {
            EntropyValue::Infinite
        } else {
            tracked_entropy(rho, &next)?
        };
        let pinched = tracked_entropy(&pinch(rho, &q)?, &pinch(&sigma, &q)?)?;
        let entropy_gain = von_neumann_entropy(&pinch(rho, &q)?)?.as_f64() - rho_entropy;
        let quantization_shift = if eps_tilde == eps_true {
            0.0
        } else {
            let exact = block_rescale(&sigma, &q, eps_true)?;
            (tracked_entropy(rho, &exact)?.as_f64() - after.as_f64()).abs()
        };
        audit.push(AuditEntry {
            y,
            a,
            eps_true,
            eps_tilde,
            before: current,
            after,
            pinched: pinched.as_f64(),
            entropy_gain,
            binary_entropy: binary_entropy(eps_true)?,
            restore_error: (q.probability(&next) - (1.0 - eps_tilde)).abs(),
            quantization_shift,
            rank: measurement.rank(),
            dim: p.dim(),
        });

        transcript.push(TranscriptRecord { y, value, grid_index });
        decisions.push((y, value));
        // An infinite value is recorded for the audit; the loop cannot continue from it.
        current = finite_entropy(after, "S(rho || sigma) after an update")?;
        sigma = next;
        guesses.push(sigma.clone());
    }

    let final_trace_distance = trace_distance(rho.matrix(), sigma.matrix())?;
    Ok(LearningRun {
        x,
        epsilon: cfg.epsilon(),
        guesses,
        transcript,
        decisions,
        audit,
        initial_entropy,
        final_entropy: EntropyValue::Finite(current),
        final_trace_distance,
    })
}

/// Which step of the progress argument an audit line checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditStep {
    /// `S(rho||sigma_i) - S(rho||sigma_{i+1}) >= a/2`.
    Progress,
    /// `Tr(Q sigma_{i+1}) = 1 - eps~`.
    RestoredAcceptance,
    /// `S(pinch rho || pinch sigma_i) <= S(rho || sigma_i)`.
    Monotonicity,
    /// `S(pinch rho) - S(rho) <= H(eps_y)`.
    ArakiLieb,
    /// Grid rounding moves `Delta S` by less than `a/4`.
    Quantization,
    /// `S(rho || sigma_{i+1})` stays finite.
    Finiteness,
    /// Update count at most `ceil(S(rho||sigma_1) / (5 sqrt eps)) + 1`.
    UpdateCount,
    /// Trace distance at the end is controlled by the final relative entropy.
    FinalDistance,
}

#[derive(Debug, Clone)]
pub struct AuditLine {
    pub step: AuditStep,
    /// Index of the update, `None` for whole-run lines.
    pub update: Option<usize>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct AuditReport {
    pub lines: Vec<AuditLine>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn first_failure(&self) -> Option<&AuditLine> {
        self.lines.iter().find(|l| !l.passed)
    }

    pub fn count(&self, step: AuditStep) -> usize {
        self.lines.iter().filter(|l| l.step == step).count()
    }
}

/// Largest update count the progress bound allows for a run starting at `initial_entropy`.
pub fn update_bound(initial_entropy: f64, epsilon: f64) -> usize {
    (initial_entropy / (5.0 * epsilon.sqrt())).max(0.0).ceil() as usize + 1
}

/// Pinsker bound `sqrt(2 ln 2 S)` on the trace norm.
pub fn pinsker_bound(relative_entropy_bits: f64) -> f64 {
    (2.0 * std::f64::consts::LN_2 * relative_entropy_bits.max(0.0)).sqrt()
}

/// Checks every update of a run against the progress argument.
///
/// Per update: progress `a/2`, restored acceptance, monotonicity under the measurement,
/// the entropy-gain bound, quantization robustness and finiteness. Per run: the update
/// count bound and, when `S(rho||sigma_T) <= 5 sqrt(eps)`, the final trace distance
/// against Pinsker (and against `0.1` when `sqrt(10 ln 2 sqrt eps) < 0.1`).
pub fn audit_progress(run: &LearningRun) -> AuditReport {
    let mut lines = Vec::new();
    let mut push = |step, update, passed, detail: String| {
        lines.push(AuditLine { step, update, passed, detail })
    };
    for (i, e) in run.audit.iter().enumerate() {
        let rank = format!("(y={}, rank {}/{})", e.y, e.rank, e.dim);
        let delta = e.delta();
        push(
            AuditStep::Progress,
            Some(i),
            delta >= e.a / 2.0 - PROGRESS_TOL,
            format!("dS = {delta:.6e}, a/2 = {:.6e} {rank}", e.a / 2.0),
        );
        push(
            AuditStep::RestoredAcceptance,
            Some(i),
            e.restore_error <= RESTORE_TOL,
            format!("|Tr(Q sigma') - (1 - eps~)| = {:.3e}", e.restore_error),
        );
        push(
            AuditStep::Monotonicity,
            Some(i),
            e.pinched <= e.before + ENTROPY_TOL,
            format!("S(pinched) = {:.6e}, S = {:.6e}", e.pinched, e.before),
        );
        push(
            AuditStep::ArakiLieb,
            Some(i),
            e.entropy_gain <= e.binary_entropy + ENTROPY_TOL,
            format!("S(pinch rho) - S(rho) = {:.6e}, H(eps_y) = {:.6e}", e.entropy_gain, e.binary_entropy),
        );
        push(
            AuditStep::Quantization,
            Some(i),
            e.quantization_shift < e.a / 4.0,
            format!("shift = {:.3e}, a/4 = {:.3e}", e.quantization_shift, e.a / 4.0),
        );
        push(
            AuditStep::Finiteness,
            Some(i),
            e.after.is_finite(),
            format!("S(rho || sigma') = {}", e.after),
        );
    }
    if run.audit.is_empty() {
        return AuditReport { lines };
    }
    let bound = update_bound(run.initial_entropy, run.epsilon);
    push(
        AuditStep::UpdateCount,
        None,
        run.updates() <= bound,
        format!("{} updates, bound {bound}", run.updates()),
    );
    let final_entropy = run.final_entropy.as_f64();
    let threshold = 5.0 * run.epsilon.sqrt();
    if final_entropy <= threshold {
        let pinsker = pinsker_bound(final_entropy);
        let closing = (10.0 * std::f64::consts::LN_2 * run.epsilon.sqrt()).sqrt();
        let mut ok = run.final_trace_distance <= pinsker + ENTROPY_TOL;
        let mut detail = format!(
            "||rho - sigma_T||_1 = {:.4e}, Pinsker bound {pinsker:.4e}",
            run.final_trace_distance
        );
        if closing < 0.1 {
            ok &= run.final_trace_distance < 0.1;
            detail.push_str(", required < 0.1");
        }
        push(AuditStep::FinalDistance, None, ok, detail);
    }
    AuditReport { lines }
}

/// Alice's message as a bit string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Transcript {
    bits: Vec<bool>,
}

impl Transcript {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `0`/`1` characters.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    fn push_field(&mut self, value: u64, width: u32) {
        for shift in (0..width).rev() {
            self.bits.push(value >> shift & 1 == 1);
        }
    }

    /// Fixed-width encoding: `y` (big-endian, `column_bits`), value bit, grid index
    /// (big-endian, `grid_bits`) per record.
    pub fn encode(records: &[TranscriptRecord], column_bits: u32, grid_bits: u32) -> Self {
        let mut t = Self::default();
        for r in records {
            t.push_field(r.y as u64, column_bits);
            t.bits.push(r.value);
            t.push_field(r.grid_index, grid_bits);
        }
        t
    }

    pub fn decode(&self, column_bits: u32, grid_bits: u32) -> Result<Vec<TranscriptRecord>> {
        let width = (column_bits + 1 + grid_bits) as usize;
        if self.bits.len() % width != 0 {
            return Err(Error::InvalidArgument(format!(
                "transcript of {} bits is not a multiple of the {width}-bit record",
                self.bits.len()
            )));
        }
        let field = |bits: &[bool]| bits.iter().fold(0u64, |acc, &b| acc << 1 | b as u64);
        Ok(self
            .bits
            .chunks(width)
            .map(|chunk| {
                let c = column_bits as usize;
                TranscriptRecord {
                    y: field(&chunk[..c]) as usize,
                    value: chunk[c],
                    grid_index: field(&chunk[c + 1..]),
                }
            })
            .collect())
    }
}

/// Bob's side of the compiled protocol: everything needed to replay a transcript.
#[derive(Debug, Clone)]
pub struct GuessReplayer {
    cfg: LearnerConfig,
    prior: DensityMatrix,
    measurements: Vec<Projector>,
    column_bits: u32,
}

impl GuessReplayer {
    pub fn new(p: &QuantumOneWayProtocol, cfg: LearnerConfig) -> Self {
        Self {
            cfg,
            prior: p.prior().clone(),
            measurements: p.measurements().to_vec(),
            column_bits: ceil_log2(p.y_count()),
        }
    }

    pub fn column_bits(&self) -> u32 {
        self.column_bits
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.cfg
    }

    /// Bob's output for every column: recorded columns answer with the record's bit after
    /// the update, the rest by whether the current guess accepts with probability >= 1/2.
    pub fn replay(&self, message: &Transcript) -> Result<Vec<bool>> {
        let records = message.decode(self.column_bits, self.cfg.grid_bits())?;
        if records.windows(2).any(|w| w[0].y >= w[1].y) {
            return Err(Error::InvalidArgument("transcript columns are not strictly increasing".into()));
        }
        if let Some(r) = records.iter().find(|r| r.y >= self.measurements.len()) {
            return Err(Error::InvalidArgument(format!("transcript names column {} out of range", r.y)));
        }
        let mut pending = records.iter().peekable();
        let mut sigma = self.prior.clone();
        let mut out = Vec::with_capacity(self.measurements.len());
        for (y, measurement) in self.measurements.iter().enumerate() {
            match pending.next_if(|r| r.y == y) {
                Some(r) => {
                    let q = oriented_projector(measurement, r.value);
                    sigma = update_guess(&sigma, &q, r.eps_tilde(&self.cfg), &self.cfg)?;
                    out.push(r.value);
                }
                None => out.push(measurement.probability(&sigma) >= 0.5),
            }
        }
        Ok(out)
    }
}

/// A deterministic one-way protocol: Alice's message per `x` and a decoder for Bob.
pub trait DeterministicOneWay {
    fn x_count(&self) -> usize;
    fn message(&self, x: usize) -> &Transcript;
    /// Bob's outputs for every column given Alice's message for `x`.
    fn outputs(&self, x: usize) -> Result<Vec<bool>>;

    /// Longest message in bits.
    fn cost_bits(&self) -> usize {
        (0..self.x_count()).map(|x| self.message(x).len()).max().unwrap_or(0)
    }

    /// Number of distinct messages Alice ever sends.
    fn distinct_messages(&self) -> usize {
        let set: std::collections::HashSet<&Transcript> = (0..self.x_count()).map(|x| self.message(x)).collect();
        set.len()
    }
}

/// Output of [`compile_deterministic_protocol`].
#[derive(Debug, Clone)]
pub struct CompiledProtocol {
    replayer: GuessReplayer,
    messages: Vec<Transcript>,
    runs: Vec<LearningRun>,
    prior_budget: f64,
}

impl CompiledProtocol {
    pub fn replayer(&self) -> &GuessReplayer {
        &self.replayer
    }

    pub fn runs(&self) -> &[LearningRun] {
        &self.runs
    }

    pub fn update_counts(&self) -> Vec<usize> {
        self.runs.iter().map(LearningRun::updates).collect()
    }

    /// `(budget / (5 sqrt eps) + 1) * (m + grid_bits + 1)`.
    pub fn cost_bound(&self) -> f64 {
        let cfg = self.replayer.config();
        (self.prior_budget / (5.0 * cfg.epsilon().sqrt()) + 1.0)
            * cfg.record_bits(self.replayer.column_bits()) as f64
    }
}

impl DeterministicOneWay for CompiledProtocol {
    fn x_count(&self) -> usize {
        self.messages.len()
    }

    fn message(&self, x: usize) -> &Transcript {
        &self.messages[x]
    }

    fn outputs(&self, x: usize) -> Result<Vec<bool>> {
        self.replayer.replay(&self.messages[x])
    }
}

/// Runs the learner for every `x`, serializes each transcript as Alice's message and
/// replays it on Bob's side. A replayed output that disagrees with `f` on a defined cell
/// is reported as an internal consistency failure.
pub fn compile_deterministic_protocol(
    p: &QuantumOneWayProtocol,
    f: &PartialFunction,
    cfg: &LearnerConfig,
) -> Result<CompiledProtocol> {
    let replayer = GuessReplayer::new(p, *cfg);
    let mut messages = Vec::with_capacity(p.x_count());
    let mut runs = Vec::with_capacity(p.x_count());
    for x in 0..p.x_count() {
        let run = run_learning(p, f, x, cfg)?;
        let message = Transcript::encode(&run.transcript, replayer.column_bits(), cfg.grid_bits());
        let outputs = replayer.replay(&message)?;
        for (y, value) in f.defined_in_row(x) {
            if outputs[y] != value {
                return Err(Error::Consistency { x, y, detail: "replayed output disagrees with f".into() });
            }
        }
        messages.push(message);
        runs.push(run);
    }
    Ok(CompiledProtocol { replayer, messages, runs, prior_budget: p.prior_budget() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Cell;
    use crate::protocol::{planted_protocol, PlantedSpec};
    use crate::random::{random_density, random_projector, seeded_rng};
    use crate::ComplexMatrix;

    fn cfg4() -> LearnerConfig {
        LearnerConfig::new(1e-4).unwrap()
    }

    #[test]
    fn config_derived_quantities() {
        let cfg = cfg4();
        assert!((cfg.trigger() - 0.1).abs() < 1e-15);
        assert_eq!(cfg.quantum_precision(), 1e-8);
        assert_eq!(cfg.grid_bits(), 27);
        assert_eq!(cfg.grid_max(), 10_000);
        assert_eq!(LearnerConfig::default().grid_bits(), 40);
        assert!(LearnerConfig::new(1e-3).is_err());
        assert!(LearnerConfig::new(0.0).is_err());
    }

    #[test]
    fn quantization_rounds_up_and_clamps() {
        let cfg = cfg4();
        assert_eq!(cfg.quantize(0.0), 0);
        assert_eq!(cfg.quantize(3e-8), 3);
        assert_eq!(cfg.quantize(3.2e-8), 4);
        assert_eq!(cfg.quantize(1e-12), 1);
        assert_eq!(cfg.quantize(2e-4), 10_000);
        assert_eq!(cfg.dequantize(10_000), 1e-4);
    }

    #[test]
    fn oriented_projector_cases() {
        let p = Projector::basis(2, &[0]);
        assert_eq!(oriented_projector(&p, true), p);
        assert_eq!(oriented_projector(&p, false), p.complement());
        assert_eq!(oriented_projector(&oriented_projector(&p, false), false), p);
    }

    #[test]
    fn update_from_maximally_mixed_with_zero_error() {
        let q = Projector::basis(2, &[1]);
        let next = update_guess(&DensityMatrix::maximally_mixed(2), &q, 0.0, &cfg4()).unwrap();
        assert!((next.matrix() - q.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn rescaling_with_weight_a_is_pinching() {
        let mut rng = seeded_rng(41);
        let sigma = random_density(4, &mut rng);
        let q = random_projector(4, 2, &mut rng);
        let a = 1.0 - q.probability(&sigma);
        let rescaled = block_rescale(&sigma, &q, a).unwrap();
        let pinched = pinch(&sigma, &q).unwrap();
        assert!((rescaled.matrix() - pinched.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn update_preconditions() {
        let cfg = cfg4();
        let sigma = DensityMatrix::basis_state(2, 0);
        let q = Projector::basis(2, &[1]);
        assert!(matches!(update_guess(&sigma, &q, 0.0, &cfg), Err(Error::DegenerateGuess { .. })));
        assert!(matches!(
            update_guess(&sigma, &q.complement(), 0.0, &cfg),
            Err(Error::BelowTrigger { .. })
        ));
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(update_guess(&mixed, &q, 2e-4, &cfg).is_err());
    }

    #[test]
    fn single_update_meets_progress_claim() {
        // Target close to |0>, guess I/2: a = 1/2.
        let eps_y = 5e-5;
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.0 - eps_y, eps_y])).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let q = Projector::basis(2, &[0]);
        let cfg = cfg4();
        let next = update_guess(&sigma, &q, eps_y, &cfg).unwrap();
        let before = relative_entropy(&rho, &sigma).unwrap().as_f64();
        let after = relative_entropy(&rho, &next).unwrap().as_f64();
        // Diagonal oracle: before = 1 - H(eps_y); after = 0 because next == rho.
        let h = -(eps_y * eps_y.log2()) - (1.0 - eps_y) * (1.0 - eps_y).log2();
        assert!((before - (1.0 - h)).abs() < 1e-12);
        assert!(after.abs() < 1e-12);
        assert!(before - after >= 0.25);
    }

    fn two_by_two_protocol(prior: Option<DensityMatrix>) -> (PartialFunction, QuantumOneWayProtocol) {
        let rho = DensityMatrix::basis_state(2, 0);
        let f = PartialFunction::new(1, 2, vec![Cell::One, Cell::Zero]).unwrap();
        let p = QuantumOneWayProtocol::new(
            1,
            1e-4,
            vec![rho],
            vec![Projector::basis(2, &[0]), Projector::basis(2, &[1])],
            prior,
            Some(1.0),
        )
        .unwrap();
        (f, p)
    }

    #[test]
    fn planted_prior_needs_no_updates() {
        let (f, p) = two_by_two_protocol(Some(DensityMatrix::basis_state(2, 0)));
        let run = run_learning(&p, &f, 0, &cfg4()).unwrap();
        assert_eq!(run.updates(), 0);
        assert_eq!(run.decisions, vec![(0, true), (1, false)]);
        assert!(audit_progress(&run).lines.is_empty());
    }

    #[test]
    fn constant_function_with_identity_measurements() {
        let p = QuantumOneWayProtocol::new(
            1,
            1e-4,
            vec![DensityMatrix::basis_state(2, 1); 2],
            vec![Projector::identity(2); 3],
            None,
            None,
        )
        .unwrap();
        let f = PartialFunction::constant(2, 3, true);
        let compiled = compile_deterministic_protocol(&p, &f, &cfg4()).unwrap();
        assert_eq!(compiled.update_counts(), vec![0, 0]);
        assert_eq!(compiled.cost_bits(), 0);
    }

    #[test]
    fn forced_update_from_mixed_prior_is_audited() {
        let (f, p) = two_by_two_protocol(None);
        let run = run_learning(&p, &f, 0, &cfg4()).unwrap();
        assert_eq!(run.updates(), 1);
        let entry = &run.audit[0];
        assert!((entry.a - 0.5).abs() < 1e-15);
        // S(|0><0| || I/2) = 1 bit, and the update lands exactly on the target.
        assert!((entry.before - 1.0).abs() < 1e-12);
        assert!(entry.delta() >= entry.a / 2.0);
        let report = audit_progress(&run);
        assert!(report.passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn transcript_encoding_layout() {
        let records = [
            TranscriptRecord { y: 2, value: true, grid_index: 5 },
            TranscriptRecord { y: 3, value: false, grid_index: 0 },
        ];
        let t = Transcript::encode(&records, 2, 3);
        assert_eq!(t.to_bit_string(), "101101110000");
        assert_eq!(t.decode(2, 3).unwrap(), records.to_vec());
        assert!(Transcript::from_bits(vec![true; 5]).decode(2, 3).is_err());
    }

    #[test]
    fn compounded_updates_keep_entropy_finite() {
        let spec = PlantedSpec { qubits: 2, x_count: 8, y_count: 32, epsilon: 1e-4, undefined_fraction: 0.1 };
        for seed in 0..100 {
            let (f, p) = planted_protocol(spec, &mut seeded_rng(seed)).unwrap();
            let compiled = compile_deterministic_protocol(&p, &f, &cfg4()).unwrap();
            for run in compiled.runs() {
                assert!(run.final_entropy.finite().is_some());
                assert!(audit_progress(run).passed(), "seed {seed} x {}", run.x);
            }
        }
    }

    #[test]
    fn compiled_protocol_matches_function() {
        let spec = PlantedSpec { qubits: 1, x_count: 4, y_count: 8, epsilon: 1e-4, undefined_fraction: 0.1 };
        for seed in 0..10 {
            let (f, p) = planted_protocol(spec, &mut seeded_rng(seed)).unwrap();
            let compiled = compile_deterministic_protocol(&p, &f, &cfg4()).unwrap();
            for x in 0..f.x_count() {
                let out = compiled.outputs(x).unwrap();
                for (y, v) in f.defined_in_row(x) {
                    assert_eq!(out[y], v);
                }
            }
            assert!(compiled.cost_bits() as f64 <= compiled.cost_bound());
            for run in compiled.runs() {
                let report = audit_progress(run);
                assert!(report.passed(), "seed {seed}: {:?}", report.first_failure());
            }
        }
    }

    #[test]
    fn single_x_cost_is_its_transcript_length() {
        let (f, p) = two_by_two_protocol(None);
        let compiled = compile_deterministic_protocol(&p, &f, &cfg4()).unwrap();
        assert_eq!(compiled.cost_bits(), compiled.message(0).len());
        assert_eq!(compiled.cost_bits(), (1 + 1 + 27) as usize);
    }

    #[test]
    fn replay_rejects_malformed_transcripts() {
        let (_, p) = two_by_two_protocol(None);
        let replayer = GuessReplayer::new(&p, cfg4());
        let dup = Transcript::encode(
            &[TranscriptRecord { y: 1, value: true, grid_index: 0 }, TranscriptRecord { y: 0, value: true, grid_index: 0 }],
            1,
            27,
        );
        assert!(replayer.replay(&dup).is_err());
    }
}
