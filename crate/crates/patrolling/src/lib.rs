//! Continuous patrolling games on metric networks.
//!
//! A patroller walks a network at unit speed; an attacker picks a point and a
//! time window of length alpha. This crate builds patrol tours with provable
//! interception guarantees, mixed attack strategies with provable caps on the
//! interception probability, exact evaluators for both, and a discretized
//! double-oracle solver that brackets the game value.

pub mod attack;
pub mod best_response;
pub mod error;
pub mod eval;
pub mod extremity;
pub mod fixtures;
pub mod interval;
pub mod matrix_game;
pub mod network;
pub mod oracle;
pub mod patrol;
pub mod ratio;
pub mod tour;

pub use error::{Error, Result};
pub use network::{MetricNetwork, NetPoint};
pub use ratio::Ratio;
