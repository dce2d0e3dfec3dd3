//! Strategy specifications and their resolution into playable rules.
//!
//! Every defender rule reduces to a per-previous-state probability of
//! playing 0, so the per-round signal probability is always well defined
//! for detection curves. Attacker rules condition either on the defender's
//! current action (the one-memory default, which also covers tit-for-tat)
//! or on the previous state (win-stay-lose-shift).

use serde::Serialize;

use crate::chain::{AttackerStrategy, DefenderStrategy};
use crate::error::{Error, Result};
use crate::game::PayoffVectors;
use crate::optimizer;
use crate::zd;

/// Player role a specification is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Defender,
    Attacker,
}

/// Behavioral family of a tournament strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StrategyKind {
    /// Explicit mixed vector: 4 entries (defender, per previous state) or
    /// 2 entries (attacker, per current defender action); probabilities of
    /// playing 0.
    Mixed(Vec<f64>),
    /// Equalizer pinning the attacker's utility, defender only. With
    /// `clamp`, infeasible candidates are projected onto `[0, 1]` and
    /// flagged; without it they are rejected.
    ZdEqualizer { p1: f64, p4: f64, clamp: bool },
    /// Utility-difference maximizer at a fixed scale factor, defender only.
    ZdDiffMax { phi: f64, clamp: bool },
    /// Always play 0 (no signal / quit).
    All0,
    /// Always play 1 (signal / attack).
    All1,
    /// Fair coin each round.
    Rand,
    /// Copy the opponent: the defender repeats the attacker's previous
    /// action; the attacker copies the signal he just observed.
    Tft,
    /// Repeat the previous action after a payoff above the player's mean
    /// state payoff, switch otherwise.
    Wsls,
    /// Win-stay-lose-shift with an explicit win threshold instead of the
    /// mean state payoff.
    WslsAt(f64),
}

/// A role-tagged strategy specification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySpec {
    pub role: Role,
    pub kind: StrategyKind,
}

impl StrategySpec {
    pub fn defender(kind: StrategyKind) -> Self {
        StrategySpec {
            role: Role::Defender,
            kind,
        }
    }

    pub fn attacker(kind: StrategyKind) -> Self {
        StrategySpec {
            role: Role::Attacker,
            kind,
        }
    }
}

/// Attacker decision rule: probability of playing 0, conditioned on the
/// defender's current action or on the previous state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AttackerRule {
    OnCurrentAction([f64; 2]),
    OnPrevState([f64; 4]),
}

/// A resolved defender: probability of playing 0 per previous state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedDefender {
    pub prob_zero: [f64; 4],
    pub label: String,
    /// True when an infeasible zero-determinant candidate was projected
    /// onto the strategy box.
    pub clamped: bool,
}

/// A resolved attacker rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedAttacker {
    pub rule: AttackerRule,
    pub label: String,
}

fn wsls_vector(payoffs: [f64; 4], own_bit: fn(usize) -> usize, threshold: Option<f64>) -> [f64; 4] {
    let win_above = threshold.unwrap_or_else(|| payoffs.iter().sum::<f64>() / 4.0);
    std::array::from_fn(|state| {
        let prev = own_bit(state);
        let won = payoffs[state] > win_above;
        let action = if won { prev } else { 1 - prev };
        if action == 0 {
            1.0
        } else {
            0.0
        }
    })
}

/// Resolve a defender specification against the payoff vectors it will play.
pub fn resolve_defender(spec: &StrategySpec, payoffs: &PayoffVectors) -> Result<ResolvedDefender> {
    if spec.role != Role::Defender {
        return Err(Error::InvalidStrategy {
            reason: "specification is tagged for the attacker".into(),
        });
    }
    let plain = |prob_zero: [f64; 4], label: &str| ResolvedDefender {
        prob_zero,
        label: label.to_string(),
        clamped: false,
    };
    match &spec.kind {
        StrategyKind::All0 => Ok(plain([1.0; 4], "all0")),
        StrategyKind::All1 => Ok(plain([0.0; 4], "all1")),
        StrategyKind::Rand => Ok(plain([0.5; 4], "rand")),
        StrategyKind::Tft => Ok(plain([1.0, 0.0, 1.0, 0.0], "tft")),
        StrategyKind::Wsls => Ok(plain(wsls_vector(payoffs.u_d(), |s| s >> 1, None), "wsls")),
        StrategyKind::WslsAt(t) => Ok(plain(
            wsls_vector(payoffs.u_d(), |s| s >> 1, Some(*t)),
            "wsls",
        )),
        StrategyKind::Mixed(p) => {
            let arr: [f64; 4] = p
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidStrategy {
                    reason: format!("defender mixed vector needs 4 entries, got {}", p.len()),
                })?;
            let strategy = DefenderStrategy::new(arr)?;
            Ok(plain(strategy.probs(), "mixed"))
        }
        StrategyKind::ZdEqualizer { p1, p4, clamp } => {
            let eq = zd::equalizer_strategy(*p1, *p4, payoffs)?;
            if eq.feasible {
                Ok(ResolvedDefender {
                    prob_zero: eq.strategy()?.probs(),
                    label: format!("zd-equalizer({p1},{p4})"),
                    clamped: false,
                })
            } else if *clamp {
                let (strategy, moved) = eq.clamped();
                Ok(ResolvedDefender {
                    prob_zero: strategy.probs(),
                    label: format!("zd-equalizer({p1},{p4},clamped)"),
                    clamped: moved,
                })
            } else {
                Err(Error::InvalidStrategy {
                    reason: format!(
                        "equalizer at ({p1}, {p4}) is infeasible: candidate {:?}",
                        eq.candidate
                    ),
                })
            }
        }
        StrategyKind::ZdDiffMax { phi, clamp } => {
            let report = optimizer::solve_diff_max(payoffs, &[*phi])?;
            let solution = &report.solutions[0];
            if let Some(strategy) = &solution.strategy {
                Ok(ResolvedDefender {
                    prob_zero: strategy.probs(),
                    label: format!("zd-diffmax({phi})"),
                    clamped: false,
                })
            } else if *clamp {
                let clamped: [f64; 4] = solution.candidate.map(|x| x.clamp(0.0, 1.0));
                Ok(ResolvedDefender {
                    prob_zero: clamped,
                    label: format!("zd-diffmax({phi},clamped)"),
                    clamped: true,
                })
            } else {
                Err(Error::InvalidStrategy {
                    reason: format!(
                        "difference maximizer at phi = {phi} is infeasible: candidate {:?}",
                        solution.candidate
                    ),
                })
            }
        }
    }
}

/// Resolve an attacker specification against the payoff vectors.
pub fn resolve_attacker(spec: &StrategySpec, payoffs: &PayoffVectors) -> Result<ResolvedAttacker> {
    if spec.role != Role::Attacker {
        return Err(Error::InvalidStrategy {
            reason: "specification is tagged for the defender".into(),
        });
    }
    let on_action = |q: [f64; 2], label: &str| ResolvedAttacker {
        rule: AttackerRule::OnCurrentAction(q),
        label: label.to_string(),
    };
    match &spec.kind {
        StrategyKind::All0 => Ok(on_action([1.0; 2], "all0")),
        StrategyKind::All1 => Ok(on_action([0.0; 2], "all1")),
        StrategyKind::Rand => Ok(on_action([0.5; 2], "rand")),
        StrategyKind::Tft => Ok(on_action([1.0, 0.0], "tft")),
        StrategyKind::Wsls => Ok(ResolvedAttacker {
            rule: AttackerRule::OnPrevState(wsls_vector(payoffs.u_a(), |s| s & 1, None)),
            label: "wsls".to_string(),
        }),
        StrategyKind::WslsAt(t) => Ok(ResolvedAttacker {
            rule: AttackerRule::OnPrevState(wsls_vector(payoffs.u_a(), |s| s & 1, Some(*t))),
            label: "wsls".to_string(),
        }),
        StrategyKind::Mixed(q) => {
            let arr: [f64; 2] = q
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidStrategy {
                    reason: format!("attacker mixed vector needs 2 entries, got {}", q.len()),
                })?;
            let strategy = AttackerStrategy::new(arr)?;
            Ok(on_action(strategy.probs(), "mixed"))
        }
        StrategyKind::ZdEqualizer { .. } | StrategyKind::ZdDiffMax { .. } => {
            Err(Error::InvalidStrategy {
                reason: "zero-determinant play is defender-only".into(),
            })
        }
    }
}
