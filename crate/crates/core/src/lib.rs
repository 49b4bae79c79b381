//! Photonic proximal policy optimization.
//!
//! A truncated Fock-basis simulator for two-mode continuous-variable circuits,
//! a variational photonic policy built on it, PPO training on a CartPole whose
//! observation is restricted to the pole, and a seeded multi-agent harness.

pub mod baseline;
pub mod checkpoint;
pub mod circuit;
pub mod env;
pub mod error;
pub mod fock;
pub mod harness;
pub mod policy;
pub mod ppo;

pub use error::{Error, Result};
