//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by game construction, stationary analysis, and strategy
/// synthesis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A game parameter that must be strictly positive was not.
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    /// Strict parameter ordering requires the non-audited loss to exceed the
    /// audited loss plus the audit cost.
    #[error("ordering violated: t_d ({t_d}) must exceed t_m + c ({t_m} + {c})")]
    OrderingViolated { t_d: f64, t_m: f64, c: f64 },

    /// Audit probabilities must satisfy 0 <= delta < tau <= 1.
    #[error("policy violated: need 0 <= delta < tau <= 1, got tau = {tau}, delta = {delta}")]
    PolicyViolated { tau: f64, delta: f64 },

    /// A strategy component fell outside [0, 1].
    #[error("probability `{name}[{index}]` must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange {
        name: &'static str,
        index: usize,
        value: f64,
    },

    /// The transition chain has no unique stationary distribution.
    #[error("transition chain has no unique stationary distribution")]
    NonErgodic,

    /// The equalizer scale coefficient vanishes (p4 + 1 - p1 = 0), so the
    /// pinned utility is undefined.
    #[error("degenerate equalizer target: p4 + 1 - p1 = 0")]
    DegenerateTarget,

    /// The attack-state payoff entry is zero, leaving the equalizer
    /// coefficients undefined.
    #[error("attacker payoff in the signal-and-attack state is zero")]
    ZeroAttackPayoff,

    /// The utility-difference scale factor must be nonzero.
    #[error("scale factor phi must be nonzero")]
    ZeroPhi,

    /// An empty phi grid was supplied to the optimizer.
    #[error("phi grid is empty")]
    EmptyGrid,

    /// A strategy specification could not be resolved into playable
    /// probabilities.
    #[error("strategy cannot be resolved: {reason}")]
    InvalidStrategy { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
