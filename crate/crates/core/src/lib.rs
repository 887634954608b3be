//! Maximal CHSH violation, geometric quantum discord and concurrence of
//! two-qubit states, the analytic corridors relating them, and their
//! evolution under phase damping, non-Markovian amplitude decay and a
//! random external field.

pub mod channels;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod measures;
pub mod numerics;
pub mod states;

pub use error::{Error, Result};
