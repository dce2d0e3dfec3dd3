//! Equalizer strategies: defender mixed strategies that pin the attacker's
//! stationary utility regardless of the attacker's play, plus the gradients,
//! value ranges, and dominance comparison of the control variables.
//!
//! The equalizer family is parameterized by `(p1, p4)`. Because the attacker
//! earns nothing in the two quit states, the construction forces
//! `p3 = p1 - 1`, so candidates are only playable when `p1 = 1`; infeasible
//! candidates are reported as such, never silently clamped. A separate
//! clamped projection exists for simulation use and is always flagged.
//!
//! A note on the endpoint at `p1 = 0`: a sometimes-quoted closed form for
//! the maximal pinned utility, `(r_a - s_a) / p4`, is inconsistent with the
//! pinned-utility expression itself, which evaluates to
//! `(r_a - s_a) / (1 + p4)` there and never leaves `[0, r_a - s_a]`. Ranges
//! here are always computed by evaluating the expression, and the tests pin
//! the evaluated values.

use serde::Serialize;

use crate::chain::DefenderStrategy;
use crate::error::{Error, Result};
use crate::game::{AuditGameParams, ModelTag, PayoffVectors};

// ---------------------------------------------------------------------------
// Equalizer construction
// ---------------------------------------------------------------------------

/// An equalizer candidate: the solved strategy vector, its coefficients, and
/// the utility it would pin the attacker to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualizerStrategy {
    /// Solved strategy components; entries may fall outside `[0, 1]`.
    pub candidate: [f64; 4],
    pub alpha: f64,
    pub gamma: f64,
    /// Attacker utility enforced when the candidate is playable: `-gamma/alpha`.
    pub predicted_u_a: f64,
    /// True when every component lies in `[0, 1]`.
    pub feasible: bool,
    /// Indices of out-of-range components.
    pub violations: Vec<usize>,
}

impl EqualizerStrategy {
    /// The candidate as a playable strategy; errors when infeasible.
    pub fn strategy(&self) -> Result<DefenderStrategy> {
        if !self.feasible {
            return Err(Error::InvalidStrategy {
                reason: format!(
                    "equalizer candidate {:?} leaves [0,1] at components {:?}",
                    self.candidate, self.violations
                ),
            });
        }
        DefenderStrategy::new(self.candidate)
    }

    /// Componentwise projection onto `[0, 1]`, with a flag saying whether
    /// anything moved. Clamped strategies are approximations only and no
    /// longer pin the attacker's utility exactly.
    pub fn clamped(&self) -> (DefenderStrategy, bool) {
        let clamped: [f64; 4] = self.candidate.map(|x| x.clamp(0.0, 1.0));
        let moved = clamped
            .iter()
            .zip(self.candidate.iter())
            .any(|(a, b)| a != b);
        (
            DefenderStrategy::new(clamped).expect("clamped components lie in [0,1]"),
            moved,
        )
    }
}

/// Solve the equalizer equation group for the defender at `(p1, p4)`.
///
/// With `gamma = p1 - 1` and `alpha = (p4 + 1 - p1) / u_a[11]`, the remaining
/// components are `p2 = 1 + alpha * u_a[01] + gamma` and `p3 = gamma`, and
/// the pinned attacker utility is `-gamma / alpha`.
pub fn equalizer_strategy(p1: f64, p4: f64, payoffs: &PayoffVectors) -> Result<EqualizerStrategy> {
    for (name, value) in [("p1", p1), ("p4", p4)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange {
                name: if name == "p1" { "p1" } else { "p4" },
                index: 0,
                value,
            });
        }
    }
    let u_a = payoffs.u_a();
    if u_a[3] == 0.0 {
        return Err(Error::ZeroAttackPayoff);
    }
    let denom = p4 + 1.0 - p1;
    if denom == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let gamma = p1 - 1.0;
    let alpha = denom / u_a[3];
    let p2 = 1.0 + alpha * u_a[1] + gamma;
    let candidate = [p1, p2, gamma, p4];
    let violations: Vec<usize> = candidate
        .iter()
        .enumerate()
        .filter(|(_, &x)| !(0.0..=1.0).contains(&x))
        .map(|(i, _)| i)
        .collect();
    Ok(EqualizerStrategy {
        candidate,
        alpha,
        gamma,
        predicted_u_a: -gamma / alpha,
        feasible: violations.is_empty(),
        violations,
    })
}

// ---------------------------------------------------------------------------
// Pinned-utility expression and its gradients
// ---------------------------------------------------------------------------

/// The attacker utility pinned by the equalizer at `(p1, p4)`:
/// `(1 - p1) / (p4 + 1 - p1) * u_a[11]`.
pub fn attacker_utility_formula(p1: f64, p4: f64, payoffs: &PayoffVectors) -> Result<f64> {
    let denom = p4 + 1.0 - p1;
    if denom == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    Ok((1.0 - p1) / denom * payoffs.u_a()[3])
}

/// The pinned utility as a function of the signal-audit probability alone,
/// holding `(p1, p4)` fixed: `(1 - p1) / (p4 + 1 - p1) * (r_a - tau * s_a)`.
pub fn attacker_utility_at_tau(
    p1: f64,
    p4: f64,
    params: &AuditGameParams,
    tau: f64,
) -> Result<f64> {
    let denom = p4 + 1.0 - p1;
    if denom == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    Ok((1.0 - p1) / denom * (params.r_a() - tau * params.s_a()))
}

/// Partial derivatives of the pinned attacker utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlGradients {
    pub wrt_p1: f64,
    pub wrt_p4: f64,
    /// Present only for probabilistic-model payoffs.
    pub wrt_tau: Option<f64>,
}

/// Analytic gradients of the pinned utility with respect to `p1`, `p4`, and
/// (in the probabilistic model) `tau`. All three are nonpositive whenever
/// `u_a[11] > 0`.
pub fn control_gradients(p1: f64, p4: f64, payoffs: &PayoffVectors) -> Result<ControlGradients> {
    let denom = p4 + 1.0 - p1;
    if denom == 0.0 {
        return Err(Error::DegenerateTarget);
    }
    let u11 = payoffs.u_a()[3];
    let wrt_tau = match (payoffs.model(), payoffs.params()) {
        (ModelTag::Probabilistic, Some(params)) => Some(params.s_a() * (p1 - 1.0) / denom),
        _ => None,
    };
    Ok(ControlGradients {
        wrt_p1: -p4 / (denom * denom) * u11,
        wrt_p4: (p1 - 1.0) / (denom * denom) * u11,
        wrt_tau,
    })
}

// ---------------------------------------------------------------------------
// Value ranges and dominance
// ---------------------------------------------------------------------------

/// A control variable the defender can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    P1,
    P4,
    Tau,
}

/// Attained value range of the pinned utility when one variable sweeps its
/// domain and the others stay fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlRange {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
}

impl ControlRange {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Which variable moves the pinned utility more per unit change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominant {
    P1,
    P4,
    Tie,
}

/// Ranges of the pinned utility under single-variable sweeps, plus the
/// dominance verdict at `(p1, p4)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlAnalysis {
    pub ranges: Vec<ControlRange>,
    pub dominant: Dominant,
}

fn sorted(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Sweep each control variable over its domain (endpoint evaluation; the
/// expression is monotone in each variable) and compare gradient magnitudes.
///
/// `|d/dp4| > |d/dp1|` exactly when `1 - p1 > p4`, so the dominance verdict
/// reduces to comparing `p1 + p4` with 1. The degenerate corner
/// `(p1, p4) = (1, 0)` is excluded from swept ranges by one-sided limits.
pub fn control_range_and_dominance(
    p1: f64,
    p4: f64,
    payoffs: &PayoffVectors,
) -> Result<ControlAnalysis> {
    for (name, value) in [("p1", p1), ("p4", p4)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange {
                name: if name == "p1" { "p1" } else { "p4" },
                index: 0,
                value,
            });
        }
    }
    let u11 = payoffs.u_a()[3];
    let mut ranges = Vec::new();

    // Sweep p1 in [0, 1] with p4 fixed. At p4 = 0 the expression is constant
    // u11 on [0, 1) and the p1 = 1 endpoint is its one-sided limit.
    let (lo, hi) = if p4 == 0.0 {
        (u11, u11)
    } else {
        sorted(
            attacker_utility_formula(0.0, p4, payoffs)?,
            attacker_utility_formula(1.0, p4, payoffs)?,
        )
    };
    ranges.push(ControlRange {
        variable: SweepVariable::P1,
        lo,
        hi,
    });

    // Sweep p4 in [0, 1] with p1 fixed. At p1 = 1 the expression is constant
    // zero on (0, 1] and the p4 = 0 endpoint is its one-sided limit.
    let (lo, hi) = if p1 == 1.0 {
        (0.0, 0.0)
    } else {
        sorted(
            attacker_utility_formula(p1, 0.0, payoffs)?,
            attacker_utility_formula(p1, 1.0, payoffs)?,
        )
    };
    ranges.push(ControlRange {
        variable: SweepVariable::P4,
        lo,
        hi,
    });

    // Sweep tau in [0, 1] for probabilistic payoffs, unless (p1, p4) itself
    // is the degenerate corner where the pinned utility is undefined.
    if payoffs.model() == ModelTag::Probabilistic {
        if let Some(params) = payoffs.params() {
            if p4 + 1.0 - p1 != 0.0 {
                let (lo, hi) = sorted(
                    attacker_utility_at_tau(p1, p4, &params, 0.0)?,
                    attacker_utility_at_tau(p1, p4, &params, 1.0)?,
                );
                ranges.push(ControlRange {
                    variable: SweepVariable::Tau,
                    lo,
                    hi,
                });
            }
        }
    }

    let dominant = if 1.0 - p1 > p4 {
        Dominant::P4
    } else if 1.0 - p1 < p4 {
        Dominant::P1
    } else {
        Dominant::Tie
    };
    Ok(ControlAnalysis { ranges, dominant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{stationary_utilities, AttackerStrategy};
    use crate::game::SignalPolicy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn det_defaults() -> PayoffVectors {
        PayoffVectors::deterministic(&AuditGameParams::defaults())
    }

    #[test]
    fn midpoint_candidate_is_reported_infeasible() {
        let eq = equalizer_strategy(0.5, 0.5, &det_defaults()).unwrap();
        assert!((eq.predicted_u_a - 2.5).abs() < 1e-12);
        let expect = [0.5, 2.5, -0.5, 0.5];
        for i in 0..4 {
            assert!((eq.candidate[i] - expect[i]).abs() < 1e-12);
        }
        assert!(!eq.feasible);
        assert_eq!(eq.violations, vec![1, 2]);
        assert!(eq.strategy().is_err());
        let (clamped, moved) = eq.clamped();
        assert!(moved);
        assert_eq!(clamped.probs(), [0.5, 1.0, 0.0, 0.5]);
    }

    #[test]
    fn degenerate_corner_rejected() {
        assert_eq!(
            equalizer_strategy(1.0, 0.0, &det_defaults()),
            Err(Error::DegenerateTarget)
        );
    }

    #[test]
    fn zero_pin_candidate() {
        let eq = equalizer_strategy(1.0, 0.5, &det_defaults()).unwrap();
        assert_eq!(eq.predicted_u_a, 0.0);
        let expect = [1.0, 2.0, 0.0, 0.5];
        for i in 0..4 {
            assert!((eq.candidate[i] - expect[i]).abs() < 1e-12);
        }
        assert!(!eq.feasible);
        assert_eq!(eq.violations, vec![1]);
    }

    #[test]
    fn zero_attack_payoff_rejected() {
        // r_a = tau * s_a makes the attack-state payoff vanish.
        let params = AuditGameParams::new(8.0, 5.0, 2.0, 4.0, 5.0, true).unwrap();
        let policy = SignalPolicy::new(0.8, 0.1).unwrap();
        let payoffs = PayoffVectors::probabilistic(&params, &policy);
        assert_eq!(payoffs.u_a()[3], 0.0);
        assert_eq!(
            equalizer_strategy(0.5, 0.5, &payoffs),
            Err(Error::ZeroAttackPayoff)
        );
    }

    #[test]
    fn candidate_satisfies_equalizer_equations() {
        let payoffs = det_defaults();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p1: f64 = rng.random();
            let p4: f64 = rng.random();
            let Ok(eq) = equalizer_strategy(p1, p4, &payoffs) else {
                continue;
            };
            // p_hat = alpha * U_A + gamma * 1 componentwise.
            let p_hat = [
                eq.candidate[0] - 1.0,
                eq.candidate[1] - 1.0,
                eq.candidate[2],
                eq.candidate[3],
            ];
            for i in 0..4 {
                let rhs = eq.alpha * payoffs.u_a()[i] + eq.gamma;
                assert!((p_hat[i] - rhs).abs() <= 1e-12);
            }
            // The pinned value agrees with the closed expression.
            let formula = attacker_utility_formula(p1, p4, &payoffs).unwrap();
            assert!((eq.predicted_u_a - formula).abs() <= 1e-9);
        }
    }

    #[test]
    fn feasibility_forces_certain_signal_after_quiet_rounds() {
        // Over a dense grid, every feasible candidate has p1 = 1 and p3 = 0.
        let payoffs = det_defaults();
        for i in 0..=100 {
            for j in 0..=100 {
                let (p1, p4) = (i as f64 / 100.0, j as f64 / 100.0);
                if let Ok(eq) = equalizer_strategy(p1, p4, &payoffs) {
                    if eq.feasible {
                        assert_eq!(eq.candidate[0], 1.0);
                        assert_eq!(eq.candidate[2], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn feasible_equalizer_pins_the_stationary_utility() {
        // A policy with delta*s_a < r_a < tau*s_a flips the sign of the
        // attack-state payoff and opens a feasible equalizer family.
        let params = AuditGameParams::new(8.0, 5.0, 2.0, 1.0, 2.0, true).unwrap();
        let policy = SignalPolicy::new(0.9, 0.2).unwrap();
        let payoffs = PayoffVectors::probabilistic(&params, &policy);
        let eq = equalizer_strategy(1.0, 0.6, &payoffs).unwrap();
        assert!(eq.feasible, "candidate {:?}", eq.candidate);
        let p = eq.strategy().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..10 {
            let q = AttackerStrategy::new(std::array::from_fn(|_| rng.random_range(0.05..0.95)))
                .unwrap();
            let out = stationary_utilities(&p, &q, &payoffs).unwrap();
            assert!(
                (out.u_a - eq.predicted_u_a).abs() <= 1e-9,
                "u_a = {}, predicted {}",
                out.u_a,
                eq.predicted_u_a
            );
        }
    }

    #[test]
    fn formula_endpoints() {
        let payoffs = det_defaults();
        for p4 in [0.1, 0.5, 1.0] {
            assert_eq!(attacker_utility_formula(1.0, p4, &payoffs).unwrap(), 0.0);
        }
        for p1 in [0.0, 0.3, 0.9] {
            assert!((attacker_utility_formula(p1, 0.0, &payoffs).unwrap() - 5.0).abs() < 1e-12);
        }
        // The evaluated value at p1 = 0 stays inside [0, u_a[11]]; it is
        // u11 / (1 + p4), not u11 / p4.
        let at_zero = attacker_utility_formula(0.0, 0.5, &payoffs).unwrap();
        assert!((at_zero - 5.0 / 1.5).abs() < 1e-12);
        assert!(at_zero <= 5.0);
    }

    #[test]
    fn gradient_values_at_midpoint() {
        let g = control_gradients(0.5, 0.5, &det_defaults()).unwrap();
        assert!((g.wrt_p1 - -2.5).abs() < 1e-12);
        assert!((g.wrt_p4 - -2.5).abs() < 1e-12);
        assert_eq!(g.wrt_tau, None);

        let payoffs =
            PayoffVectors::probabilistic(&AuditGameParams::defaults(), &SignalPolicy::defaults());
        let g = control_gradients(0.5, 0.5, &payoffs).unwrap();
        assert!((g.wrt_tau.unwrap() - -2.5).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let payoffs =
            PayoffVectors::probabilistic(&AuditGameParams::defaults(), &SignalPolicy::defaults());
        let params = payoffs.params().unwrap();
        let h = 1e-6;
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p1: f64 = rng.random_range(0.1..0.9);
            let p4: f64 = rng.random_range(0.1..0.9);
            let g = control_gradients(p1, p4, &payoffs).unwrap();
            let fd_p1 = (attacker_utility_formula(p1 + h, p4, &payoffs).unwrap()
                - attacker_utility_formula(p1 - h, p4, &payoffs).unwrap())
                / (2.0 * h);
            let fd_p4 = (attacker_utility_formula(p1, p4 + h, &payoffs).unwrap()
                - attacker_utility_formula(p1, p4 - h, &payoffs).unwrap())
                / (2.0 * h);
            let tau = payoffs.policy().unwrap().tau();
            let fd_tau = (attacker_utility_at_tau(p1, p4, &params, tau + h).unwrap()
                - attacker_utility_at_tau(p1, p4, &params, tau - h).unwrap())
                / (2.0 * h);
            assert!((g.wrt_p1 - fd_p1).abs() / g.wrt_p1.abs() <= 1e-6);
            assert!((g.wrt_p4 - fd_p4).abs() / g.wrt_p4.abs() <= 1e-6);
            assert!((g.wrt_tau.unwrap() - fd_tau).abs() / g.wrt_tau.unwrap().abs() <= 1e-6);
            assert!(g.wrt_p1 <= 0.0 && g.wrt_p4 <= 0.0 && g.wrt_tau.unwrap() <= 0.0);
        }
    }

    #[test]
    fn sweep_ranges_at_fixed_midpoints() {
        let payoffs = det_defaults();
        let analysis = control_range_and_dominance(0.5, 0.5, &payoffs).unwrap();
        let p1_range = analysis.ranges[0];
        let p4_range = analysis.ranges[1];
        assert_eq!(p1_range.variable, SweepVariable::P1);
        assert!((p1_range.lo - 0.0).abs() < 1e-12);
        assert!((p1_range.hi - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(p4_range.variable, SweepVariable::P4);
        assert!((p4_range.lo - 5.0 / 3.0).abs() < 1e-12);
        assert!((p4_range.hi - 5.0).abs() < 1e-12);
        assert_eq!(analysis.dominant, Dominant::Tie);
    }

    #[test]
    fn dominance_follows_gradient_magnitudes() {
        let payoffs = det_defaults();
        // p1 + p4 < 1: |d/dp4| = 0.8 * k exceeds |d/dp1| = 0.2 * k.
        let g = control_gradients(0.2, 0.2, &payoffs).unwrap();
        assert!(g.wrt_p4.abs() > g.wrt_p1.abs());
        let analysis = control_range_and_dominance(0.2, 0.2, &payoffs).unwrap();
        assert_eq!(analysis.dominant, Dominant::P4);
        // p1 + p4 > 1: the comparison flips.
        let g = control_gradients(0.8, 0.8, &payoffs).unwrap();
        assert!(g.wrt_p1.abs() > g.wrt_p4.abs());
        let analysis = control_range_and_dominance(0.8, 0.8, &payoffs).unwrap();
        assert_eq!(analysis.dominant, Dominant::P1);
    }

    #[test]
    fn degenerate_corner_ranges_use_limits() {
        let payoffs = det_defaults();
        // Sweeping p1 with p4 = 0: constant u11 by the one-sided limit.
        let analysis = control_range_and_dominance(0.5, 0.0, &payoffs).unwrap();
        assert_eq!((analysis.ranges[0].lo, analysis.ranges[0].hi), (5.0, 5.0));
        // Sweeping p4 with p1 = 1: constant zero.
        let analysis = control_range_and_dominance(1.0, 0.5, &payoffs).unwrap();
        assert_eq!((analysis.ranges[1].lo, analysis.ranges[1].hi), (0.0, 0.0));
    }

    #[test]
    fn formula_range_is_contained() {
        let payoffs = det_defaults();
        let u11 = payoffs.u_a()[3];
        for i in 0..=100 {
            for j in 0..=100 {
                let (p1, p4) = (i as f64 / 100.0, j as f64 / 100.0);
                if let Ok(v) = attacker_utility_formula(p1, p4, &payoffs) {
                    assert!(v >= -1e-12 && v <= u11 + 1e-12);
                }
            }
        }
    }
}
