//! One-memory strategies, the round-to-round Markov chain, and the
//! determinant identity behind zero-determinant play.
//!
//! The defender conditions on the previous round's state; the attacker
//! conditions on the defender's current action. Stationary utilities are
//! computed two ways — a 4x4 determinant ratio evaluated by exact cofactor
//! expansion, and a direct linear solve of the stationary system — and the
//! two routes cross-check each other.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{GameState, PayoffVectors};

/// Below this magnitude the determinant ratio is treated as 0/0 and the
/// eigen route decides ergodicity.
pub const ERGODICITY_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Strategy vectors
// ---------------------------------------------------------------------------

/// Defender mixed strategy: `p[i]` is the probability of playing 0
/// (no signal) when the previous round ended in state `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefenderStrategy([f64; 4]);

/// Attacker mixed strategy: `q[j]` is the probability of playing 0 (quit)
/// when the defender's current action is `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackerStrategy([f64; 2]);

fn check_probs<const N: usize>(name: &'static str, values: [f64; N]) -> Result<[f64; N]> {
    for (index, &value) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange { name, index, value });
        }
    }
    Ok(values)
}

impl DefenderStrategy {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        Ok(DefenderStrategy(check_probs("p", p)?))
    }

    pub fn probs(&self) -> [f64; 4] {
        self.0
    }

    /// Probability of playing 0 given the previous state.
    pub fn prob_no_signal(&self, prev: GameState) -> f64 {
        self.0[prev.index()]
    }
}

impl AttackerStrategy {
    pub fn new(q: [f64; 2]) -> Result<Self> {
        Ok(AttackerStrategy(check_probs("q", q)?))
    }

    pub fn probs(&self) -> [f64; 2] {
        self.0
    }

    /// Probability of playing 0 given the defender's current action bit.
    pub fn prob_quit(&self, defender_bit: usize) -> f64 {
        self.0[defender_bit]
    }
}

// ---------------------------------------------------------------------------
// Transition matrix
// ---------------------------------------------------------------------------

/// Row-stochastic 4x4 transition matrix over [`GameState`]; rows index the
/// previous state, columns the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovMatrix {
    rows: [[f64; 4]; 4],
}

impl MarkovMatrix {
    pub fn rows(&self) -> [[f64; 4]; 4] {
        self.rows
    }

    pub fn row(&self, i: usize) -> [f64; 4] {
        self.rows[i]
    }
}

/// Compose the one-round transition matrix from the two mixed strategies.
///
/// Row `i` is `(p_i q_1, p_i (1 - q_1), (1 - p_i) q_2, (1 - p_i)(1 - q_2))`.
pub fn build_transition(p: &DefenderStrategy, q: &AttackerStrategy) -> MarkovMatrix {
    let [q1, q2] = q.probs();
    let mut rows = [[0.0; 4]; 4];
    for (i, row) in rows.iter_mut().enumerate() {
        let pi = p.probs()[i];
        *row = [
            pi * q1,
            pi * (1.0 - q1),
            (1.0 - pi) * q2,
            (1.0 - pi) * (1.0 - q2),
        ];
    }
    MarkovMatrix { rows }
}

// ---------------------------------------------------------------------------
// Stationary vector (direct linear solve)
// ---------------------------------------------------------------------------

/// Gauss-Jordan solve of a 4x4 system with partial pivoting. Returns `None`
/// when a pivot falls below `tol` relative to the matrix scale.
fn solve4(mut a: [[f64; 5]; 4], tol: f64) -> Option<[f64; 4]> {
    let scale = a
        .iter()
        .flat_map(|r| r[..4].iter())
        .fold(0.0_f64, |m, &x| m.max(x.abs()))
        .max(1.0);
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() <= tol * scale {
            return None;
        }
        a.swap(col, piv);
        let pivot_row = a[col];
        for (r, row) in a.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let f = row[col] / pivot_row[col];
            for (k, &pv) in pivot_row.iter().enumerate().skip(col) {
                row[k] -= f * pv;
            }
        }
    }
    Some([
        a[0][4] / a[0][0],
        a[1][4] / a[1][1],
        a[2][4] / a[2][2],
        a[3][4] / a[3][3],
    ])
}

/// Solve `v^T M = v^T`, `sum(v) = 1` by stacking the normalization row onto
/// the rank-deficient stationary system and solving the normal equations.
///
/// Returns [`Error::NonErgodic`] when the stationary distribution is not
/// unique at tolerance `tol` (two or more recurrent classes).
pub fn stationary_vector(m: &MarkovMatrix, tol: f64) -> Result<[f64; 4]> {
    // A = M^T - I; least squares of [A; 1^T] v = (0, 0, 0, 0, 1)^T.
    let a: [[f64; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| m.rows[j][i] - if i == j { 1.0 } else { 0.0 })
    });
    // Normal equations: (A^T A + 11^T) v = 1.
    let sys: [[f64; 5]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if j == 4 {
                1.0
            } else {
                // the 11^T contribution plus the A^T A entry
                1.0 + (0..4).map(|k| a[k][i] * a[k][j]).sum::<f64>()
            }
        })
    });
    let mut v = solve4(sys, tol).ok_or(Error::NonErgodic)?;
    // Scrub sign noise and renormalize.
    for x in v.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    let sum: f64 = v.iter().sum();
    if !(sum.is_finite() && sum > 0.5) {
        return Err(Error::NonErgodic);
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Zero-determinant identity
// ---------------------------------------------------------------------------

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cofactors of the fourth column of the zero-determinant matrix, so that
/// `zd_determinant(p, q, f) = dot(cofactors, f)`. The cofactor vector is
/// proportional to the stationary vector whenever the chain is ergodic.
pub(crate) fn stationary_cofactors(p: &DefenderStrategy, q: &AttackerStrategy) -> [f64; 4] {
    let pv = p.probs();
    let [q1, q2] = q.probs();
    // First three columns of the determinant matrix: the transition column,
    // the defender-controlled column p_hat, and the mixed column.
    let col = |i: usize| -> [f64; 3] {
        let pi = pv[i];
        let c0 = pi * q1 - if i == 0 { 1.0 } else { 0.0 };
        let c1 = pi - if i <= 1 { 1.0 } else { 0.0 };
        let c2 = (1.0 - pi) * q2 + pi * q1 - if i == 0 || i == 2 { 1.0 } else { 0.0 };
        [c0, c1, c2]
    };
    let rows = [col(0), col(1), col(2), col(3)];
    let minor = |skip: usize| -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        let mut r = 0;
        for (i, row) in rows.iter().enumerate() {
            if i == skip {
                continue;
            }
            out[r] = *row;
            r += 1;
        }
        out
    };
    [
        -det3(minor(0)),
        det3(minor(1)),
        -det3(minor(2)),
        det3(minor(3)),
    ]
}

/// The 4x4 zero-determinant form `D(p, q, f)`, evaluated by exact cofactor
/// expansion along the `f` column.
///
/// `D` is proportional — not equal — to `v . f`; consumers must use ratios
/// such as `D(p, q, U) / D(p, q, 1)`.
pub fn zd_determinant(p: &DefenderStrategy, q: &AttackerStrategy, f: [f64; 4]) -> f64 {
    let c = stationary_cofactors(p, q);
    dot(c, f)
}

pub(crate) fn dot(a: [f64; 4], b: [f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

// ---------------------------------------------------------------------------
// Stationary utilities
// ---------------------------------------------------------------------------

/// Which route produced a stationary outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Determinant-ratio evaluation.
    Determinant,
    /// Direct linear solve of the stationary system.
    Eigen,
}

/// Stationary distribution and per-round utilities of an ergodic chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryOutcome {
    pub v: [f64; 4],
    pub u_d: f64,
    pub u_a: f64,
    pub ergodic: bool,
    pub method: SolveMethod,
}

/// Stationary per-round utilities of both players.
///
/// Uses the determinant ratio when `|D(p, q, 1)|` is comfortably nonzero and
/// falls back to the direct solve otherwise; reports [`Error::NonErgodic`]
/// when both routes degenerate.
pub fn stationary_utilities(
    p: &DefenderStrategy,
    q: &AttackerStrategy,
    payoffs: &PayoffVectors,
) -> Result<StationaryOutcome> {
    let m = build_transition(p, q);
    let cof = stationary_cofactors(p, q);
    let d_one = dot(cof, [1.0; 4]);
    let v = stationary_vector(&m, ERGODICITY_TOL);

    if d_one.abs() > ERGODICITY_TOL {
        let u_d = dot(cof, payoffs.u_d()) / d_one;
        let u_a = dot(cof, payoffs.u_a()) / d_one;
        let v = v?; // a valid determinant demands a unique stationary vector
        debug_assert!((dot(v, payoffs.u_a()) - u_a).abs() < 1e-6);
        Ok(StationaryOutcome {
            v,
            u_d,
            u_a,
            ergodic: true,
            method: SolveMethod::Determinant,
        })
    } else {
        let v = v?;
        Ok(StationaryOutcome {
            v,
            u_d: dot(v, payoffs.u_d()),
            u_a: dot(v, payoffs.u_a()),
            ergodic: true,
            method: SolveMethod::Eigen,
        })
    }
}
