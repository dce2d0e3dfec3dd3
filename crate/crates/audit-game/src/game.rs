//! Game parameters, payoff vectors of both audit models, and the one-shot
//! sequential equilibrium.
//!
//! A round is strictly ordered: the defender chooses whether to signal, the
//! attacker observes that choice and decides whether to attack. The joint
//! outcome `da` is one of four states in the canonical order
//! `(00, 01, 10, 11)`, action `1` meaning signal (defender) or attack
//! (attacker).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Actions and states
// ---------------------------------------------------------------------------

/// Defender action within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefenderAction {
    /// Do not signal (action 0).
    NoSignal,
    /// Send a signal (action 1).
    Signal,
}

/// Attacker action within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackerAction {
    /// Quit without attacking (action 0).
    Quit,
    /// Carry out the attack (action 1).
    Attack,
}

impl DefenderAction {
    pub fn bit(self) -> usize {
        match self {
            DefenderAction::NoSignal => 0,
            DefenderAction::Signal => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            DefenderAction::NoSignal
        } else {
            DefenderAction::Signal
        }
    }
}

impl AttackerAction {
    pub fn bit(self) -> usize {
        match self {
            AttackerAction::Quit => 0,
            AttackerAction::Attack => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            AttackerAction::Quit
        } else {
            AttackerAction::Attack
        }
    }
}

/// Joint outcome state `da` of one round, indexed `2*d + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GameState(u8);

impl GameState {
    pub fn new(d: DefenderAction, a: AttackerAction) -> Self {
        GameState((2 * d.bit() + a.bit()) as u8)
    }

    /// State from its canonical index in `{0, 1, 2, 3}`.
    pub fn from_index(index: usize) -> Option<Self> {
        (index < 4).then_some(GameState(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn defender(self) -> DefenderAction {
        DefenderAction::from_bit(self.index() >> 1)
    }

    pub fn attacker(self) -> AttackerAction {
        AttackerAction::from_bit(self.index() & 1)
    }

    /// Two-character `da` label, e.g. `"11"` for signal-and-attack.
    pub fn label(self) -> &'static str {
        match self.0 {
            0 => "00",
            1 => "01",
            2 => "10",
            _ => "11",
        }
    }

    /// All four states in canonical order.
    pub fn all() -> [GameState; 4] {
        [GameState(0), GameState(1), GameState(2), GameState(3)]
    }
}

impl fmt::Display for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

// ---------------------------------------------------------------------------
// Parameters and signal policy
// ---------------------------------------------------------------------------

/// The five loss/gain scalars of the audit game.
///
/// In strict mode the ordering `t_d > t_m + c` is enforced: auditing an
/// attack in time must cost less than letting it pass. Relaxed mode admits
/// any strictly positive scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditGameParams {
    t_d: f64,
    t_m: f64,
    c: f64,
    r_a: f64,
    s_a: f64,
    strict: bool,
}

impl AuditGameParams {
    /// Validate and build a parameter set.
    pub fn new(t_d: f64, t_m: f64, c: f64, r_a: f64, s_a: f64, strict: bool) -> Result<Self> {
        for (name, value) in [
            ("t_d", t_d),
            ("t_m", t_m),
            ("c", c),
            ("r_a", r_a),
            ("s_a", s_a),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        if strict && t_d <= t_m + c {
            return Err(Error::OrderingViolated { t_d, t_m, c });
        }
        Ok(AuditGameParams {
            t_d,
            t_m,
            c,
            r_a,
            s_a,
            strict,
        })
    }

    /// The default parameter set: `t_d = 8`, `t_m = 5`, `c = 2`, `r_a = 10`,
    /// `s_a = 5`, strict ordering on.
    pub fn defaults() -> Self {
        AuditGameParams::new(8.0, 5.0, 2.0, 10.0, 5.0, true).expect("defaults are valid")
    }

    pub fn t_d(&self) -> f64 {
        self.t_d
    }

    pub fn t_m(&self) -> f64 {
        self.t_m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    pub fn s_a(&self) -> f64 {
        self.s_a
    }

    pub fn strict(&self) -> bool {
        self.strict
    }
}

/// Audit probabilities of the probabilistic model: audit with probability
/// `tau` after signaling and `delta` otherwise, `0 <= delta < tau <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalPolicy {
    tau: f64,
    delta: f64,
}

impl SignalPolicy {
    pub fn new(tau: f64, delta: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&tau) && (0.0..=1.0).contains(&delta) && delta < tau;
        if !ok {
            return Err(Error::PolicyViolated { tau, delta });
        }
        Ok(SignalPolicy { tau, delta })
    }

    /// The default policy `tau = 0.6`, `delta = 0.2`.
    pub fn defaults() -> Self {
        SignalPolicy::new(0.6, 0.2).expect("defaults are valid")
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

// ---------------------------------------------------------------------------
// Payoff vectors
// ---------------------------------------------------------------------------

/// Which model produced a payoff vector pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Deterministic,
    Probabilistic,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Model {
    Deterministic {
        params: AuditGameParams,
    },
    Probabilistic {
        params: AuditGameParams,
        policy: SignalPolicy,
    },
    Custom,
}

/// Per-state payoff 4-vectors for the defender and the attacker, indexed by
/// [`GameState`] in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffVectors {
    u_d: [f64; 4],
    u_a: [f64; 4],
    model: Model,
}

impl PayoffVectors {
    /// Deterministic-model payoffs: the defender audits exactly when she
    /// signals.
    ///
    /// `u_d = (0, -t_d, -c, -c - t_m)`, `u_a = (0, r_a, 0, r_a - s_a)`.
    pub fn deterministic(params: &AuditGameParams) -> Self {
        PayoffVectors {
            u_d: [0.0, -params.t_d, -params.c, -params.c - params.t_m],
            u_a: [0.0, params.r_a, 0.0, params.r_a - params.s_a],
            model: Model::Deterministic { params: *params },
        }
    }

    /// Probabilistic-model payoffs: the defender audits with probability
    /// `tau` after signaling and `delta` otherwise.
    ///
    /// At `tau = 1`, `delta = 0` this reproduces the deterministic vectors
    /// exactly.
    pub fn probabilistic(params: &AuditGameParams, policy: &SignalPolicy) -> Self {
        let (tau, delta) = (policy.tau, policy.delta);
        PayoffVectors {
            u_d: [
                -delta * params.c,
                -delta * params.c - (delta * params.t_m + (1.0 - delta) * params.t_d),
                -tau * params.c,
                -tau * params.c - (tau * params.t_m + (1.0 - tau) * params.t_d),
            ],
            u_a: [
                0.0,
                params.r_a - delta * params.s_a,
                0.0,
                params.r_a - tau * params.s_a,
            ],
            model: Model::Probabilistic {
                params: *params,
                policy: *policy,
            },
        }
    }

    /// Payoff vectors supplied directly, for games outside the audit
    /// parameterization.
    pub fn from_vectors(u_d: [f64; 4], u_a: [f64; 4]) -> Self {
        PayoffVectors {
            u_d,
            u_a,
            model: Model::Custom,
        }
    }

    /// Defender payoffs in canonical state order.
    pub fn u_d(&self) -> [f64; 4] {
        self.u_d
    }

    /// Attacker payoffs in canonical state order.
    pub fn u_a(&self) -> [f64; 4] {
        self.u_a
    }

    pub fn model(&self) -> ModelTag {
        match self.model {
            Model::Deterministic { .. } => ModelTag::Deterministic,
            Model::Probabilistic { .. } => ModelTag::Probabilistic,
            Model::Custom => ModelTag::Custom,
        }
    }

    /// The generating parameters, when the vectors came from an audit model.
    pub fn params(&self) -> Option<AuditGameParams> {
        match self.model {
            Model::Deterministic { params } | Model::Probabilistic { params, .. } => Some(params),
            Model::Custom => None,
        }
    }

    /// The generating signal policy, for probabilistic-model vectors.
    pub fn policy(&self) -> Option<SignalPolicy> {
        match self.model {
            Model::Probabilistic { policy, .. } => Some(policy),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Sequential equilibrium
// ---------------------------------------------------------------------------

/// One-shot equilibrium outcome with the attacker's best response to each
/// defender action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Equilibrium {
    /// Equilibrium state reached under sequential best responses.
    pub state: GameState,
    /// Attacker best response indexed by the defender action bit.
    pub attacker_response: [AttackerAction; 2],
}

/// Backward induction on the one-round game tree.
///
/// The attacker moves last and best-responds to each defender action; ties
/// break toward attacking. The defender then picks her best action against
/// those responses; ties break toward signaling.
pub fn backward_induction_equilibrium(payoffs: &PayoffVectors) -> Equilibrium {
    let respond = |d: usize| -> AttackerAction {
        let quit = payoffs.u_a[2 * d];
        let attack = payoffs.u_a[2 * d + 1];
        if attack >= quit {
            AttackerAction::Attack
        } else {
            AttackerAction::Quit
        }
    };
    let responses = [respond(0), respond(1)];
    let outcome = |d: usize| GameState::new(DefenderAction::from_bit(d), responses[d]);
    let d = if payoffs.u_d[outcome(1).index()] >= payoffs.u_d[outcome(0).index()] {
        1
    } else {
        0
    };
    Equilibrium {
        state: outcome(d),
        attacker_response: responses,
    }
}
