//! Round-by-round iterated play with seeded, reproducible randomness.
//!
//! Repetitions run in parallel; each derives its own stream seed from the
//! master seed and repetition index, so results are bit-identical regardless
//! of scheduling.

mod strategies;

pub use strategies::{
    resolve_attacker, resolve_defender, AttackerRule, ResolvedAttacker, ResolvedDefender, Role,
    StrategyKind, StrategySpec,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::game::{AttackerAction, DefenderAction, GameState, ModelTag, PayoffVectors};

/// One round of play: what each side saw, did, and earned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub prev_state: GameState,
    /// The defender's mixed probability of signaling given the previous
    /// state, recorded before sampling; detection curves threshold on it.
    pub signal_prob: f64,
    pub defender: DefenderAction,
    pub attacker: AttackerAction,
    pub state: GameState,
    pub pay_d: f64,
    pub pay_a: f64,
}

/// Echo of the inputs that produced a tournament, for manifests and
/// reproduction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TournamentConfig {
    pub defender: String,
    pub attacker: String,
    pub model: ModelTag,
    pub rounds: u32,
    pub repetitions: u32,
    pub initial_state: GameState,
    pub defender_clamped: bool,
}

/// Full tournament outcome: every round of every repetition plus
/// cross-repetition means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TournamentResult {
    pub records: Vec<Vec<RoundRecord>>,
    pub per_round_mean_u_d: Vec<f64>,
    pub per_round_mean_u_a: Vec<f64>,
    pub mean_u_d: f64,
    pub mean_u_a: f64,
    pub seed: u64,
    pub config: TournamentConfig,
}

impl TournamentResult {
    /// Pooled `(signal probability, attacked)` samples across repetitions.
    pub fn detection_samples(&self) -> Vec<(f64, bool)> {
        self.records
            .iter()
            .flatten()
            .map(|r| (r.signal_prob, r.attacker == AttackerAction::Attack))
            .collect()
    }
}

/// Stable per-repetition stream seed: splitmix64 of the master seed offset
/// by the repetition index.
pub fn derive_stream_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_zero(rng: &mut ChaCha12Rng, prob_zero: f64) -> usize {
    if prob_zero >= 1.0 {
        0
    } else if prob_zero <= 0.0 {
        1
    } else if rng.random::<f64>() < prob_zero {
        0
    } else {
        1
    }
}

fn play_repetition(
    defender: &ResolvedDefender,
    attacker: &ResolvedAttacker,
    payoffs: &PayoffVectors,
    rounds: u32,
    initial_state: GameState,
    stream_seed: u64,
) -> Vec<RoundRecord> {
    let mut rng = ChaCha12Rng::seed_from_u64(stream_seed);
    let mut prev = initial_state;
    let mut records = Vec::with_capacity(rounds as usize);
    for round in 0..rounds {
        let prob_zero_d = defender.prob_zero[prev.index()];
        let signal_prob = 1.0 - prob_zero_d;
        let d_bit = sample_zero(&mut rng, prob_zero_d);
        let prob_zero_a = match attacker.rule {
            AttackerRule::OnCurrentAction(q) => q[d_bit],
            AttackerRule::OnPrevState(v) => v[prev.index()],
        };
        let a_bit = sample_zero(&mut rng, prob_zero_a);
        let d = DefenderAction::from_bit(d_bit);
        let a = AttackerAction::from_bit(a_bit);
        let state = GameState::new(d, a);
        records.push(RoundRecord {
            round,
            prev_state: prev,
            signal_prob,
            defender: d,
            attacker: a,
            state,
            pay_d: payoffs.u_d()[state.index()],
            pay_a: payoffs.u_a()[state.index()],
        });
        prev = state;
    }
    records
}

/// Play `repetitions` independent runs of `rounds` sequential rounds,
/// starting each run from state `00`.
pub fn play_iterated(
    defender: &StrategySpec,
    attacker: &StrategySpec,
    payoffs: &PayoffVectors,
    rounds: u32,
    repetitions: u32,
    seed: u64,
) -> Result<TournamentResult> {
    play_iterated_from(
        defender,
        attacker,
        payoffs,
        rounds,
        repetitions,
        seed,
        GameState::from_index(0).unwrap(),
    )
}

/// [`play_iterated`] with an explicit initial state for sensitivity runs.
#[allow(clippy::too_many_arguments)]
pub fn play_iterated_from(
    defender: &StrategySpec,
    attacker: &StrategySpec,
    payoffs: &PayoffVectors,
    rounds: u32,
    repetitions: u32,
    seed: u64,
    initial_state: GameState,
) -> Result<TournamentResult> {
    assert!(rounds >= 1, "rounds must be at least 1");
    assert!(repetitions >= 1, "repetitions must be at least 1");
    let resolved_d = resolve_defender(defender, payoffs)?;
    let resolved_a = resolve_attacker(attacker, payoffs)?;

    let records: Vec<Vec<RoundRecord>> = (0..repetitions as u64)
        .into_par_iter()
        .map(|rep| {
            play_repetition(
                &resolved_d,
                &resolved_a,
                payoffs,
                rounds,
                initial_state,
                derive_stream_seed(seed, rep),
            )
        })
        .collect();

    let n = repetitions as f64;
    let mut per_round_mean_u_d = vec![0.0; rounds as usize];
    let mut per_round_mean_u_a = vec![0.0; rounds as usize];
    for rep in &records {
        for (t, r) in rep.iter().enumerate() {
            per_round_mean_u_d[t] += r.pay_d;
            per_round_mean_u_a[t] += r.pay_a;
        }
    }
    for t in 0..rounds as usize {
        per_round_mean_u_d[t] /= n;
        per_round_mean_u_a[t] /= n;
    }
    let mean_u_d = per_round_mean_u_d.iter().sum::<f64>() / rounds as f64;
    let mean_u_a = per_round_mean_u_a.iter().sum::<f64>() / rounds as f64;

    Ok(TournamentResult {
        records,
        per_round_mean_u_d,
        per_round_mean_u_a,
        mean_u_d,
        mean_u_a,
        seed,
        config: TournamentConfig {
            defender: resolved_d.label.clone(),
            attacker: resolved_a.label.clone(),
            model: payoffs.model(),
            rounds,
            repetitions,
            initial_state,
            defender_clamped: resolved_d.clamped,
        },
    })
}
