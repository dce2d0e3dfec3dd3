//! Signaling audit games between a database defender and an attacker.
//!
//! The defender watches access alerts, chooses whether to warn the visitor
//! in real time, and audits — always after a signal in the deterministic
//! model, with calibrated probabilities in the probabilistic one. Iterated
//! play turns the per-round interaction into a four-state Markov chain, and
//! a determinant identity over that chain lets the defender play
//! zero-determinant strategies: pinning the attacker's long-run utility
//! regardless of his play, or maximizing the gap between her utility and
//! his via closed-form bounds.
//!
//! Modules:
//! - [`game`]: parameters, payoff vectors of both models, one-shot
//!   sequential equilibrium;
//! - [`chain`]: one-memory strategies, transition matrix, stationary
//!   analysis, the determinant identity;
//! - [`zd`]: equalizer construction, control gradients, value ranges,
//!   dominance of the control variables;
//! - [`optimizer`]: closed-form utility-difference maximization and a
//!   brute-force grid oracle;
//! - [`sim`]: seeded iterated tournaments against classic baselines;
//! - [`roc`]: detection curves over the signal probability.

pub mod chain;
pub mod error;
pub mod game;
pub mod optimizer;
pub mod roc;
pub mod sim;
pub mod zd;

pub use error::{Error, Result};
