//! Randomized sweeps over standard entropy inequalities.

use std::fmt;

use rand::Rng;

use crate::error::Result;
use crate::instance::StatePair;
use crate::measures::{pinch, relative_entropy, relative_entropy_raw, relative_min_entropy, trace_distance, EntropyValue};
use crate::random::{random_density, random_projector, random_state_any_rank};
use crate::state::Projector;

/// Slack allowed on every inequality.
pub const INEQUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Inequality {
    /// `||rho - sigma||_1 <= sqrt(2 ln 2 S(rho||sigma))`.
    Pinsker,
    /// `S(pinch rho || pinch sigma) <= S(rho||sigma)`.
    Uhlmann,
    /// `S(rho||sigma) <= S_inf(rho||sigma)`.
    Ordering,
    /// `S(rho||sigma) >= 0`.
    Klein,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [Inequality::Pinsker, Inequality::Uhlmann, Inequality::Ordering, Inequality::Klein];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Pinsker => "pinsker",
            Inequality::Uhlmann => "uhlmann",
            Inequality::Ordering => "ordering",
            Inequality::Klein => "klein",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.name() == name)
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One evaluated case: the inequality holds when `lhs <= rhs + tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub inequality: Inequality,
    pub lhs: EntropyValue<f64>,
    pub rhs: EntropyValue<f64>,
}

impl Check {
    pub fn holds(&self) -> bool {
        match (self.lhs, self.rhs) {
            (_, EntropyValue::Infinite) => true,
            (EntropyValue::Infinite, EntropyValue::Finite(_)) => false,
            (EntropyValue::Finite(l), EntropyValue::Finite(r)) => l <= r + INEQUALITY_TOL,
        }
    }
}

pub fn check(inequality: Inequality, pair: &StatePair) -> Result<Check> {
    if inequality == Inequality::Klein {
        let raw = relative_entropy_raw(&pair.rho, &pair.sigma)?;
        let lhs = if raw.is_infinite() { -1.0 } else { -raw };
        return Ok(Check { inequality, lhs: EntropyValue::Finite(lhs), rhs: EntropyValue::Finite(0.0) });
    }
    let s = relative_entropy(&pair.rho, &pair.sigma)?;
    let (lhs, rhs) = match inequality {
        Inequality::Pinsker => {
            let d = trace_distance(pair.rho.matrix(), pair.sigma.matrix())?;
            let bound = match s {
                EntropyValue::Finite(s) => EntropyValue::Finite((2.0 * std::f64::consts::LN_2 * s).sqrt()),
                EntropyValue::Infinite => EntropyValue::Infinite,
            };
            (EntropyValue::Finite(d), bound)
        }
        Inequality::Uhlmann => {
            let p = pair.projector.clone().unwrap_or_else(|| Projector::basis(pair.rho.dim(), &[0]));
            (relative_entropy(&pinch(&pair.rho, &p)?, &pinch(&pair.sigma, &p)?)?, s)
        }
        Inequality::Ordering => (s, relative_min_entropy(&pair.rho, &pair.sigma)?),
        Inequality::Klein => unreachable!("handled above"),
    };
    Ok(Check { inequality, lhs, rhs })
}

/// Random dimension in `2..=8`; `sigma` is full rank four times in five.
pub fn random_pair(rng: &mut impl Rng) -> StatePair {
    let dim = rng.random_range(2..=8);
    let rho = random_state_any_rank(dim, rng);
    let sigma = if rng.random_bool(0.8) { random_density(dim, rng) } else { random_state_any_rank(dim, rng) };
    let rank = rng.random_range(1..dim);
    StatePair { rho, sigma, projector: Some(random_projector(dim, rank, rng)) }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub inequality: Inequality,
    pub trials: usize,
    pub failures: usize,
    pub infinite_cases: usize,
    pub first_failure: Option<(StatePair, Check)>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn sweep(inequality: Inequality, trials: usize, rng: &mut impl Rng) -> Result<SweepReport> {
    let mut report = SweepReport { inequality, trials, failures: 0, infinite_cases: 0, first_failure: None };
    for _ in 0..trials {
        let pair = random_pair(rng);
        let c = check(inequality, &pair)?;
        if !c.rhs.is_finite() || !c.lhs.is_finite() {
            report.infinite_cases += 1;
        }
        if !c.holds() {
            report.failures += 1;
            if report.first_failure.is_none() {
                report.first_failure = Some((pair, c));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded_rng;
    use crate::state::DensityMatrix;

    #[test]
    fn names_round_trip() {
        for i in Inequality::ALL {
            assert_eq!(Inequality::from_name(i.name()), Some(i));
        }
    }

    #[test]
    fn identical_states_are_tight() {
        let rho = random_density(3, &mut seeded_rng(41));
        let pair = StatePair { rho: rho.clone(), sigma: rho, projector: None };
        for i in Inequality::ALL {
            assert!(check(i, &pair).unwrap().holds(), "{i}");
        }
    }

    #[test]
    fn infinite_entropy_is_consistent() {
        let pair = StatePair {
            rho: DensityMatrix::basis_state(2, 0),
            sigma: DensityMatrix::basis_state(2, 1),
            projector: None,
        };
        let c = check(Inequality::Ordering, &pair).unwrap();
        assert_eq!(c.lhs, EntropyValue::Infinite);
        assert!(c.holds());
    }

    #[test]
    fn short_sweeps_pass() {
        let mut rng = seeded_rng(42);
        for i in Inequality::ALL {
            let r = sweep(i, 100, &mut rng).unwrap();
            assert!(r.passed(), "{i}: {:?}", r.first_failure);
        }
    }

    #[test]
    fn failing_check_detected() {
        let c = Check {
            inequality: Inequality::Klein,
            lhs: EntropyValue::Finite(1e-6),
            rhs: EntropyValue::Finite(0.0),
        };
        assert!(!c.holds());
    }
}
