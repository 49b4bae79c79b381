use std::collections::VecDeque;

use crate::circuit::{ActionDistribution, ObservationPair};
use crate::error::{Error, Result};

use super::{discounted_returns, gae_advantages};

/// One environment transition with the behaviour policy's view of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub obs: ObservationPair,
    pub next_obs: ObservationPair,
    pub action: usize,
    pub reward: f64,
    /// Distribution the action was sampled from.
    pub old: ActionDistribution,
    /// Critic estimate at collection time.
    pub value: f64,
    pub done: bool,
    /// The episode ended on the horizon rather than on failure.
    pub truncated: bool,
}

impl TrajectoryStep {
    pub fn log_prob_old(&self) -> f64 {
        self.old.log_prob(self.action)
    }
}

/// Bounded transition memory; the oldest transitions fall out first.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBuffer {
    steps: VecDeque<TrajectoryStep>,
    capacity: usize,
    returns: Vec<f64>,
    advantages: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("memory must hold at least one transition".into()));
        }
        Ok(RolloutBuffer {
            steps: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
            returns: Vec::new(),
            advantages: Vec::new(),
        })
    }

    pub fn push(&mut self, step: TrajectoryStep) -> Result<()> {
        if !step.reward.is_finite() {
            return Err(Error::ContractViolation("non-finite reward".into()));
        }
        if self.steps.len() == self.capacity {
            self.steps.pop_front();
        }
        self.steps.push_back(step);
        self.returns.clear();
        self.advantages.clear();
        Ok(())
    }

    pub fn clear(&mut self) {
        self.steps.clear();
        self.returns.clear();
        self.advantages.clear();
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn steps(&self) -> impl Iterator<Item = &TrajectoryStep> {
        self.steps.iter()
    }

    pub fn step(&self, i: usize) -> &TrajectoryStep {
        &self.steps[i]
    }

    /// Half-open index ranges of consecutive episode segments.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, s) in self.steps.iter().enumerate() {
            if s.done {
                out.push((start, i + 1));
                start = i + 1;
            }
        }
        if start < self.steps.len() {
            out.push((start, self.steps.len()));
        }
        out
    }

    /// Fills Monte-Carlo returns and GAE advantages per episode segment.
    ///
    /// `values` holds the critic's estimate of each stored observation and
    /// `bootstrap` maps the final observation of a segment cut short (by the
    /// horizon or by the end of the buffer) to its value.
    pub fn compute<F>(&mut self, values: &[f64], mut bootstrap: F, gamma: f64, lambda: f64) -> Result<()>
    where
        F: FnMut(&ObservationPair) -> f64,
    {
        if values.len() != self.steps.len() {
            return Err(Error::Shape(format!(
                "{} values for {} transitions",
                values.len(),
                self.steps.len()
            )));
        }
        let mut returns = Vec::with_capacity(self.steps.len());
        let mut advantages = Vec::with_capacity(self.steps.len());
        for (a, b) in self.segments() {
            let rewards: Vec<f64> = (a..b).map(|i| self.steps[i].reward).collect();
            let last = &self.steps[b - 1];
            let boot = if last.done && !last.truncated {
                0.0
            } else {
                bootstrap(&last.next_obs)
            };
            returns.extend(discounted_returns(&rewards, gamma));
            advantages.extend(gae_advantages(&rewards, &values[a..b], boot, gamma, lambda)?);
        }
        self.returns = returns;
        self.advantages = advantages;
        Ok(())
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn advantages(&self) -> &[f64] {
        &self.advantages
    }
}
