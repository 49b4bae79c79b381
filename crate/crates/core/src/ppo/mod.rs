//! PPO with a KL penalty, an entropy bonus and an L2 penalty on active gates.

mod adam;
mod buffer;
mod loss;
mod returns;
mod update;

pub use adam::{adam_step, AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_DELTA};
pub use buffer::{RolloutBuffer, TrajectoryStep};
pub use loss::{
    clip_objective, entropy_categorical, gradient, kl_categorical, ppo_loss, value_loss,
    value_loss_with_gradient, LossBreakdown, LossOutput, LossSample,
};
pub use returns::{discounted_returns, gae_advantages};
pub use update::{update, Optimizers, UpdateDiagnostics};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a single update trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryMode {
    /// Only the episode that just finished; the memory is emptied afterwards.
    Episode,
    /// The most recent `memory` transitions, kept across episodes.
    Window,
}

impl fmt::Display for MemoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoryMode::Episode => "episode",
            MemoryMode::Window => "window",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub gamma: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub c2: f64,
    pub alpha: f64,
    pub tau: f64,
    pub lr_policy: f64,
    pub lr_value: f64,
    pub minibatch: usize,
    pub epochs: usize,
    pub horizon: usize,
    pub memory: usize,
    pub memory_mode: MemoryMode,
    pub normalize_advantages: bool,
    /// Multiply both learning rates by `lr_decay_factor` every this many
    /// updates; 0 disables decay.
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            gamma: 0.99,
            lambda: 0.95,
            epsilon: 0.2,
            beta: 0.1,
            c2: 0.01,
            alpha: 0.075,
            tau: 1.0,
            lr_policy: 0.01,
            lr_value: 0.005,
            minibatch: 8,
            epochs: 4,
            horizon: 200,
            memory: 10_000,
            memory_mode: MemoryMode::Episode,
            normalize_advantages: true,
            lr_decay_every: 0,
            lr_decay_factor: 0.5,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let coefficients = [
            ("epsilon", self.epsilon),
            ("beta", self.beta),
            ("c2", self.c2),
            ("alpha", self.alpha),
            ("lr_policy", self.lr_policy),
            ("lr_value", self.lr_value),
            ("lr_decay_factor", self.lr_decay_factor),
        ];
        for (name, v) in coefficients {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be a nonnegative number, got {v}"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        for (name, v) in [
            ("minibatch", self.minibatch),
            ("epochs", self.epochs),
            ("horizon", self.horizon),
            ("memory", self.memory),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }

    /// Sets one field from its textual value, e.g. `("gamma", "0.95")`.
    pub fn set(&mut self, name: &str, value: &str) -> Result<()> {
        let mut table = toml::Table::try_from(&*self).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if !table.contains_key(name) {
            return Err(Error::InvalidConfig(format!("unknown hyperparameter {name:?}")));
        }
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        // Integers are accepted for float fields.
        let parsed = match (&table[name], parsed) {
            (toml::Value::Float(_), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (_, v) => v,
        };
        table.insert(name.to_string(), parsed);
        let updated: Hyperparameters = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("hyperparameter {name}: {}", e.message())))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Learning rates after `updates` completed updates.
    pub fn learning_rates(&self, updates: usize) -> (f64, f64) {
        if self.lr_decay_every == 0 {
            return (self.lr_policy, self.lr_value);
        }
        let k = self.lr_decay_factor.powi((updates / self.lr_decay_every) as i32);
        (self.lr_policy * k, self.lr_value * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let hp = Hyperparameters::default();
        hp.validate().unwrap();
        assert_eq!((hp.gamma, hp.lambda, hp.epsilon, hp.beta), (0.99, 0.95, 0.2, 0.1));
        assert_eq!((hp.alpha, hp.lr_policy, hp.lr_value), (0.075, 0.01, 0.005));
        assert_eq!((hp.horizon, hp.memory, hp.minibatch), (200, 10_000, 8));
    }

    #[test]
    fn overrides_by_name() {
        let mut hp = Hyperparameters::default();
        hp.set("gamma", "0.9").unwrap();
        hp.set("lr_policy", "1").unwrap();
        hp.set("epochs", "2").unwrap();
        hp.set("memory_mode", "window").unwrap();
        hp.set("normalize_advantages", "false").unwrap();
        assert_eq!((hp.gamma, hp.lr_policy, hp.epochs), (0.9, 1.0, 2));
        assert_eq!(hp.memory_mode, MemoryMode::Window);
        assert!(!hp.normalize_advantages);
        for (k, v) in [("gama", "0.9"), ("gamma", "1.5"), ("epochs", "two"), ("minibatch", "0"), ("memory_mode", "ring")] {
            assert!(matches!(hp.set(k, v), Err(Error::InvalidConfig(_))), "{k}={v}");
        }
        assert_eq!(hp.gamma, 0.9);
    }

    #[test]
    fn step_decay() {
        let hp = Hyperparameters {
            lr_decay_every: 10,
            ..Hyperparameters::default()
        };
        assert_eq!(hp.learning_rates(9), (0.01, 0.005));
        assert_eq!(hp.learning_rates(25), (0.0025, 0.00125));
    }
}
