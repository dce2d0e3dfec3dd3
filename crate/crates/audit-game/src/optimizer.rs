//! Closed-form maximization of the defender-minus-attacker utility gap via
//! the zero-determinant relation with coefficients `alpha = -1`, `beta = 1`.
//!
//! For a scale factor `phi != 0` the defender vector is recovered from
//! `p_hat = phi * (U_D - U_A + gamma * 1)`; the playability constraints
//! `0 <= p_i <= 1` translate into closed-form bounds on `gamma`, and the
//! enforced difference is `-gamma`. The scale factor stays in the recovery
//! formula: dropping it (as a shorthand recovery `p_i = U_D - U_A + gamma
//! (+1)` would) breaks the defining identity for every `phi != 1`, which the
//! tests demonstrate.
//!
//! A brute-force oracle sweeps dense strategy grids and reports every cell
//! whose utility difference is empirically independent of the attacker,
//! giving an implementation-independent check of the closed form.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{self, AttackerStrategy, DefenderStrategy};
use crate::error::{Error, Result};
use crate::game::PayoffVectors;

/// Spread below which the oracle declares a grid cell's utility difference
/// attacker-independent.
pub const ORACLE_SPREAD_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Closed-form gamma bounds
// ---------------------------------------------------------------------------

/// The eight playability bound terms for a given `phi`, and the resulting
/// feasibility interval for `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffBounds {
    pub phi: f64,
    /// Lower-bound terms by state; `gamma_min` is their maximum.
    pub lower_terms: [f64; 4],
    /// Upper-bound terms by state; `gamma_max` is their minimum.
    pub upper_terms: [f64; 4],
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// State index attaining `gamma_min`.
    pub binding_lower: usize,
    /// State index attaining `gamma_max`.
    pub binding_upper: usize,
    pub feasible: bool,
}

/// Closed-form bounds on `gamma` for one `phi`.
///
/// Writing `w_i = u_a[i] - u_d[i]`: for `phi > 0` the lower terms are
/// `w_i - 1/phi` on the no-signal states and `w_i` on the signal states,
/// with the upper terms mirrored; for `phi < 0` the two sets swap roles.
pub fn gamma_bounds(payoffs: &PayoffVectors, phi: f64) -> Result<DiffBounds> {
    if phi == 0.0 || !phi.is_finite() {
        return Err(Error::ZeroPhi);
    }
    let u_d = payoffs.u_d();
    let u_a = payoffs.u_a();
    let w: [f64; 4] = std::array::from_fn(|i| u_a[i] - u_d[i]);
    let inv = 1.0 / phi;
    let (lower_terms, upper_terms): ([f64; 4], [f64; 4]) = if phi > 0.0 {
        (
            [w[0] - inv, w[1] - inv, w[2], w[3]],
            [w[0], w[1], w[2] + inv, w[3] + inv],
        )
    } else {
        (
            [w[0], w[1], w[2] + inv, w[3] + inv],
            [w[0] - inv, w[1] - inv, w[2], w[3]],
        )
    };
    let (binding_lower, gamma_min) = argmax(&lower_terms);
    let (binding_upper, gamma_max) = argmin(&upper_terms);
    Ok(DiffBounds {
        phi,
        lower_terms,
        upper_terms,
        gamma_min,
        gamma_max,
        binding_lower,
        binding_upper,
        feasible: gamma_min <= gamma_max,
    })
}

fn argmax(xs: &[f64; 4]) -> (usize, f64) {
    let mut best = 0;
    for i in 1..4 {
        if xs[i] > xs[best] {
            best = i;
        }
    }
    (best, xs[best])
}

fn argmin(xs: &[f64; 4]) -> (usize, f64) {
    let mut best = 0;
    for i in 1..4 {
        if xs[i] < xs[best] {
            best = i;
        }
    }
    (best, xs[best])
}

/// Recover the defender vector enforcing `u_d - u_a = -gamma` at scale `phi`:
/// `p_i = phi * (u_d[i] - u_a[i] + gamma) + 1` on the no-signal states and
/// the same without the `+1` on the signal states.
pub fn recover_strategy(payoffs: &PayoffVectors, phi: f64, gamma: f64) -> [f64; 4] {
    let u_d = payoffs.u_d();
    let u_a = payoffs.u_a();
    std::array::from_fn(|i| {
        let base = phi * (u_d[i] - u_a[i] + gamma);
        if i < 2 {
            base + 1.0
        } else {
            base
        }
    })
}

// ---------------------------------------------------------------------------
// Grid solve
// ---------------------------------------------------------------------------

/// Outcome of the closed form at one `phi`: the candidate recovered at
/// `gamma_min`, the value `-gamma_min` it would enforce, and the bounds
/// diagnostics. The closed-form value is reported even when infeasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffMaxSolution {
    pub phi: f64,
    /// Chosen offset, `gamma_min`.
    pub gamma: f64,
    /// Recovered components before feasibility filtering.
    pub candidate: [f64; 4],
    /// Playable strategy, present exactly when feasible.
    pub strategy: Option<DefenderStrategy>,
    /// Enforced utility difference `-gamma`.
    pub value: f64,
    pub feasible: bool,
    pub bounds: DiffBounds,
}

/// Per-`phi` solutions over a grid, with the best feasible one singled out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffMaxReport {
    pub solutions: Vec<DiffMaxSolution>,
    /// Index into `solutions` of the feasible solution with the largest
    /// enforced value, when any `phi` is feasible.
    pub best: Option<usize>,
}

impl DiffMaxReport {
    pub fn best_solution(&self) -> Option<&DiffMaxSolution> {
        self.best.map(|i| &self.solutions[i])
    }
}

/// Snap recovery round-off onto the exact bound it binds against.
fn snap_unit(x: f64) -> f64 {
    if x.abs() <= 1e-12 {
        0.0
    } else if (x - 1.0).abs() <= 1e-12 {
        1.0
    } else {
        x
    }
}

/// Evaluate the closed form over a `phi` grid and pick the feasible solution
/// enforcing the largest difference. Infeasible grid points still carry
/// their closed-form value and binding-constraint diagnostics.
pub fn solve_diff_max(payoffs: &PayoffVectors, phi_grid: &[f64]) -> Result<DiffMaxReport> {
    if phi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut solutions = Vec::with_capacity(phi_grid.len());
    for &phi in phi_grid {
        let bounds = gamma_bounds(payoffs, phi)?;
        let gamma = bounds.gamma_min;
        let candidate = recover_strategy(payoffs, phi, gamma).map(snap_unit);
        let strategy = if bounds.feasible {
            DefenderStrategy::new(candidate).ok()
        } else {
            None
        };
        solutions.push(DiffMaxSolution {
            phi,
            gamma,
            candidate,
            feasible: strategy.is_some(),
            strategy,
            value: -gamma,
            bounds,
        });
    }
    let best = solutions
        .iter()
        .enumerate()
        .filter(|(_, s)| s.feasible)
        .max_by(|(_, a), (_, b)| a.value.total_cmp(&b.value))
        .map(|(i, _)| i);
    Ok(DiffMaxReport { solutions, best })
}

/// The default scale grid: 60 log-spaced magnitudes in `[0.01, 10]` for each
/// sign, negatives first.
pub fn default_phi_grid() -> Vec<f64> {
    let mags: Vec<f64> = (0..60)
        .map(|i| 10f64.powf(-2.0 + 3.0 * i as f64 / 59.0))
        .collect();
    let mut grid: Vec<f64> = mags.iter().rev().map(|m| -m).collect();
    grid.extend(&mags);
    grid
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// A defender grid cell whose utility difference was the same for every
/// ergodic attacker cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnforcingCell {
    pub p: [f64; 4],
    /// Midpoint of the (tiny) observed value interval.
    pub value: f64,
    pub spread: f64,
}

/// Empirical sweep report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub enforcing: Vec<EnforcingCell>,
    pub p_cells: usize,
    /// Defender cells with fewer than two ergodic attacker evaluations.
    pub non_ergodic_cells: usize,
    pub p_step: f64,
    pub q_step: f64,
    pub spread_tol: f64,
}

impl OracleReport {
    /// The enforcing cell with the largest value, if any.
    pub fn best(&self) -> Option<&EnforcingCell> {
        self.enforcing
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }
}

fn unit_grid(step: f64) -> Vec<f64> {
    assert!(
        step > 0.0 && step <= 0.5,
        "grid step must lie in (0, 0.5], got {step}"
    );
    let n = (1.0 / step).round() as usize;
    assert!(
        (n as f64 * step - 1.0).abs() < 1e-9,
        "grid step must divide 1, got {step}"
    );
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Sweep every defender cell of a `[0, 1]^4` grid against every attacker
/// cell of a `[0, 1]^2` grid, computing the stationary utility difference
/// per cell pair; report the defender cells whose difference is independent
/// of the attacker (spread at most [`ORACLE_SPREAD_TOL`]).
///
/// Attacker cells where the chain is not ergodic at determinant tolerance
/// are skipped; defender cells with fewer than two ergodic evaluations are
/// flagged rather than classified.
pub fn brute_force_diff_oracle(payoffs: &PayoffVectors, p_step: f64, q_step: f64) -> OracleReport {
    let p_axis = unit_grid(p_step);
    let q_axis = unit_grid(q_step);
    let n = p_axis.len();

    let u_d = payoffs.u_d();
    let u_a = payoffs.u_a();
    let diff: [f64; 4] = std::array::from_fn(|i| u_d[i] - u_a[i]);

    let q_cells: Vec<AttackerStrategy> = q_axis
        .iter()
        .flat_map(|&q1| {
            q_axis
                .iter()
                .map(move |&q2| AttackerStrategy::new([q1, q2]).expect("grid values in range"))
        })
        .collect();

    let results: Vec<(Option<EnforcingCell>, bool)> = (0..n * n * n * n)
        .into_par_iter()
        .map(|idx| {
            let p = [
                p_axis[idx / (n * n * n)],
                p_axis[idx / (n * n) % n],
                p_axis[idx / n % n],
                p_axis[idx % n],
            ];
            let strategy = DefenderStrategy::new(p).expect("grid values in range");
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut valid = 0usize;
            for q in &q_cells {
                let cof = chain::stationary_cofactors(&strategy, q);
                let d_one = chain::dot(cof, [1.0; 4]);
                if d_one.abs() <= chain::ERGODICITY_TOL {
                    continue;
                }
                let value = chain::dot(cof, diff) / d_one;
                lo = lo.min(value);
                hi = hi.max(value);
                valid += 1;
            }
            if valid < 2 {
                return (None, true);
            }
            let spread = hi - lo;
            if spread <= ORACLE_SPREAD_TOL {
                (
                    Some(EnforcingCell {
                        p,
                        value: (lo + hi) / 2.0,
                        spread,
                    }),
                    false,
                )
            } else {
                (None, false)
            }
        })
        .collect();

    let mut enforcing = Vec::new();
    let mut non_ergodic_cells = 0usize;
    for (cell, skipped) in results {
        if let Some(cell) = cell {
            enforcing.push(cell);
        }
        if skipped {
            non_ergodic_cells += 1;
        }
    }
    OracleReport {
        enforcing,
        p_cells: n * n * n * n,
        non_ergodic_cells,
        p_step,
        q_step,
        spread_tol: ORACLE_SPREAD_TOL,
    }
}
