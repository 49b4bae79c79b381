use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::ValueNetParams;
use crate::circuit::ActionDistribution;
use crate::env::{restrict, CartPole, DoneReason};
use crate::error::{Error, Result};
use crate::policy::{init_policy, Policy};
use crate::ppo::{update, MemoryMode, Optimizers, RolloutBuffer, TrajectoryStep};

use super::{moving_average, ExperimentConfig};

// Independent random streams per agent.
const STREAM_INIT: u64 = 0;
const STREAM_ENV: u64 = 1;
const STREAM_ACTIONS: u64 = 2;
const STREAM_SHUFFLE: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    Active,
    FilteredLow,
    FilteredHighStart,
    Completed,
    /// Stopped by a numerical error in the simulator or the learner.
    Aborted,
}

impl fmt::Display for AgentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentStatus::Active => "active",
            AgentStatus::FilteredLow => "filtered_low",
            AgentStatus::FilteredHighStart => "filtered_high_start",
            AgentStatus::Completed => "completed",
            AgentStatus::Aborted => "aborted",
        })
    }
}

impl FromStr for AgentStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "active" => AgentStatus::Active,
            "filtered_low" => AgentStatus::FilteredLow,
            "filtered_high_start" => AgentStatus::FilteredHighStart,
            "completed" => AgentStatus::Completed,
            "aborted" => AgentStatus::Aborted,
            other => return Err(Error::Parse(format!("unknown agent status {other:?}"))),
        })
    }
}

/// Per-episode training diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLog {
    pub reward: f64,
    pub policy_loss: f64,
    pub clip_term: f64,
    pub kl_term: f64,
    pub entropy_term: f64,
    pub l2_term: f64,
    pub value_loss: f64,
    /// Smallest circuit output squared norm during the episode and its update.
    pub min_state_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSnapshot {
    pub episode: usize,
    pub policy: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRecord {
    pub seed: u64,
    pub episodes: Vec<EpisodeLog>,
    pub status: AgentStatus,
    pub abort_reason: Option<String>,
    pub snapshots: Vec<ParamSnapshot>,
    pub wall_seconds: f64,
}

impl AgentRecord {
    pub fn rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.reward).collect()
    }

    pub fn moving_average(&self, window: usize) -> Vec<f64> {
        moving_average(&self.rewards(), window)
    }

    pub fn survives(&self) -> bool {
        self.status == AgentStatus::Completed
    }
}

struct Agent {
    policy: Box<dyn Policy>,
    value: ValueNetParams,
    opt: Optimizers,
    buffer: RolloutBuffer,
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

fn snapshot(agent: &Agent, episode: usize) -> ParamSnapshot {
    ParamSnapshot {
        episode,
        policy: agent.policy.to_checkpoint(),
        value: agent.value.to_checkpoint(),
    }
}

/// Called after each episode with `(seed, episode index, log)`.
pub type Progress<'a> = &'a (dyn Fn(u64, usize, &EpisodeLog) + Sync);

/// Trains one agent for `cfg.episodes` episodes; numerical failures end the
/// run early with [`AgentStatus::Aborted`] instead of returning an error.
pub fn run_agent(cfg: &ExperimentConfig, seed: u64) -> Result<AgentRecord> {
    run_agent_with_progress(cfg, seed, &|_, _, _| {})
}

pub fn run_agent_with_progress(cfg: &ExperimentConfig, seed: u64, progress: Progress<'_>) -> Result<AgentRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let sim = cfg.sim_config()?;
    let hp = &cfg.hp;
    let mut init_rng = stream(seed, STREAM_INIT);
    let mut env_rng = stream(seed, STREAM_ENV);
    let mut action_rng = stream(seed, STREAM_ACTIONS);
    let mut shuffle_rng = stream(seed, STREAM_SHUFFLE);

    let mut record = AgentRecord {
        seed,
        episodes: Vec::with_capacity(cfg.episodes),
        status: AgentStatus::Active,
        abort_reason: None,
        snapshots: Vec::new(),
        wall_seconds: 0.0,
    };
    let abort = |mut record: AgentRecord, e: Error| -> Result<AgentRecord> {
        if !e.is_numerical() {
            return Err(e);
        }
        record.status = AgentStatus::Aborted;
        record.abort_reason = Some(e.to_string());
        record.wall_seconds = started.elapsed().as_secs_f64();
        Ok(record)
    };

    let policy = match init_policy(cfg.policy, &mut init_rng, cfg.layers, &sim) {
        Ok(p) => p,
        Err(e) => return abort(record, e),
    };
    let value = ValueNetParams::init(&mut init_rng);
    let mut agent = Agent {
        opt: Optimizers::new(policy.num_params(), value.num_params()),
        policy,
        value,
        buffer: RolloutBuffer::new(hp.memory)?,
    };
    let env = CartPole::new(hp.horizon);

    for episode in 0..cfg.episodes {
        match run_episode(&mut agent, &env, cfg, &mut env_rng, &mut action_rng, &mut shuffle_rng) {
            Ok(log) => {
                progress(seed, episode, &log);
                record.episodes.push(log);
            }
            Err(e) => return abort(record, e),
        }
        let done = episode + 1;
        if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < cfg.episodes {
            record.snapshots.push(snapshot(&agent, done));
        }
    }
    record.snapshots.push(snapshot(&agent, cfg.episodes));
    record.status = AgentStatus::Completed;
    record.wall_seconds = started.elapsed().as_secs_f64();
    Ok(record)
}

fn run_episode(
    agent: &mut Agent,
    env: &CartPole,
    cfg: &ExperimentConfig,
    env_rng: &mut ChaCha8Rng,
    action_rng: &mut ChaCha8Rng,
    shuffle_rng: &mut ChaCha8Rng,
) -> Result<EpisodeLog> {
    let hp = &cfg.hp;
    let mut state = env.reset(env_rng);
    let mut total = 0.0;
    let mut min_norm = None;
    loop {
        let obs = restrict(&state);
        let eval = agent.policy.evaluate(&obs)?;
        min_norm = min_opt(min_norm, eval.norm_sqr);
        let dist = ActionDistribution::from_scores(eval.scores[0], eval.scores[1], hp.tau)?;
        let action = dist.sample(action_rng);
        let value = crate::baseline::value_forward(&obs, &agent.value);
        let step = env.step(&state, action)?;
        total += step.reward;
        agent.buffer.push(TrajectoryStep {
            obs,
            next_obs: step.observation,
            action,
            reward: step.reward,
            old: dist,
            value,
            done: step.done,
            truncated: step.done_reason == Some(DoneReason::Horizon),
        })?;
        state = step.state;
        if step.done {
            break;
        }
    }
    let diag = update(
        &mut agent.buffer,
        agent.policy.as_mut(),
        &mut agent.value,
        &mut agent.opt,
        hp,
        shuffle_rng,
    )?;
    if hp.memory_mode == MemoryMode::Episode {
        agent.buffer.clear();
    }
    Ok(EpisodeLog {
        reward: total,
        policy_loss: diag.loss.total,
        clip_term: diag.loss.clip,
        kl_term: diag.loss.kl,
        entropy_term: diag.loss.entropy,
        l2_term: diag.loss.l2,
        value_loss: diag.value_loss,
        min_state_norm: min_opt(min_norm, diag.min_state_norm),
    })
}

/// Trains every seed in parallel; records come back in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<AgentRecord>> {
    run_experiment_with_progress(cfg, &|_, _, _| {})
}

pub fn run_experiment_with_progress(cfg: &ExperimentConfig, progress: Progress<'_>) -> Result<Vec<AgentRecord>> {
    cfg.validate()?;
    cfg.seeds
        .par_iter()
        .map(|&seed| run_agent_with_progress(cfg, seed, progress))
        .collect()
}
