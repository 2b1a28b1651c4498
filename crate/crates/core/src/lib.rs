//! Simulation toolkit for Grover-search based quantum secret sharing.
//!
//! The crate is organised bottom-up:
//!
//! - [`statevec`]: dense n-qubit state vectors, phase oracle, reflection about a
//!   reference state, Born-rule measurement.
//! - [`grover`]: Grover iteration driver and the two-level closed-form recursion
//!   used to cross-check it.
//! - [`protocol`]: dealer/receiver session state machine for the multi-marked and
//!   single-marked sharing schemes.
//! - [`adversary`]: cheat strategies and exact/Monte Carlo detection statistics.

pub mod adversary;
pub mod error;
pub mod grover;
pub mod protocol;
pub mod rng;
pub mod statevec;

pub use error::{Error, Result};
