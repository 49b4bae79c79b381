use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SimConfig;
use crate::policy::PolicyKind;
use crate::ppo::Hyperparameters;

pub const DEFAULT_WINDOW: usize = 20;
pub const DEFAULT_FILTER_EPISODE: usize = 500;
pub const DEFAULT_FILTER_THRESHOLD: f64 = 100.0;

/// A full experiment: which policy, how many agents, and how they train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policy: PolicyKind,
    pub layers: usize,
    pub cutoff: usize,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub filter_enabled: bool,
    pub filter_episode: usize,
    pub filter_threshold: f64,
    pub window: usize,
    /// Write parameter checkpoints every this many episodes (0: final only).
    pub checkpoint_every: usize,
    pub output_dir: PathBuf,
    pub hp: Hyperparameters,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            policy: PolicyKind::Reupload,
            layers: 3,
            cutoff: 16,
            episodes: 1000,
            seeds: (1..=20).collect(),
            filter_enabled: true,
            filter_episode: DEFAULT_FILTER_EPISODE,
            filter_threshold: DEFAULT_FILTER_THRESHOLD,
            window: DEFAULT_WINDOW,
            checkpoint_every: 100,
            output_dir: PathBuf::from("runs"),
            hp: Hyperparameters::default(),
        }
    }
}

/// The on-disk form. Agents are given either as `seeds = [..]` or as
/// `num_agents` consecutive seeds starting at `seed_base`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    policy: Option<PolicyKind>,
    layers: Option<usize>,
    cutoff: Option<usize>,
    episodes: Option<usize>,
    num_agents: Option<usize>,
    seed_base: Option<u64>,
    seeds: Option<Vec<u64>>,
    filter_enabled: Option<bool>,
    filter_episode: Option<usize>,
    filter_threshold: Option<f64>,
    window: Option<usize>,
    checkpoint_every: Option<usize>,
    output_dir: Option<PathBuf>,
    hp: Option<toml::Table>,
}

/// Command-line settings layered on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub policy: Option<PolicyKind>,
    pub layers: Option<usize>,
    pub cutoff: Option<usize>,
    pub episodes: Option<usize>,
    pub num_agents: Option<usize>,
    pub seed_base: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// `(name, value)` pairs for individual hyperparameters.
    pub hp: Vec<(String, String)>,
}

fn seed_range(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base + i).collect()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::resolve(Some(text), &ConfigOverrides::default())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Defaults, then the file (if any), then the overrides.
    pub fn resolve(file: Option<&str>, cli: &ConfigOverrides) -> Result<Self> {
        let f: ConfigFile = match file {
            Some(text) => toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?,
            None => ConfigFile::default(),
        };
        let mut cfg = ExperimentConfig::default();
        if let Some(table) = f.hp {
            for (k, v) in table {
                let text = match v {
                    toml::Value::String(s) => s,
                    other => other.to_string(),
                };
                cfg.hp.set(&k, &text)?;
            }
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = cli.$field.clone().or(f.$field.clone()) { cfg.$field = v; }
            )*};
        }
        take!(policy, layers, cutoff, episodes, output_dir);
        macro_rules! take_file {
            ($($field:ident),*) => {$( if let Some(v) = f.$field.clone() { cfg.$field = v; } )*};
        }
        take_file!(filter_enabled, filter_episode, filter_threshold, window, checkpoint_every);

        let base = cli.seed_base.or(f.seed_base);
        let count = cli.num_agents.or(f.num_agents);
        cfg.seeds = match (&f.seeds, base.is_some() || cli.num_agents.is_some()) {
            (Some(seeds), false) => {
                if let Some(n) = count {
                    if n != seeds.len() {
                        return Err(Error::InvalidConfig(format!(
                            "num_agents = {n} but {} seeds are listed",
                            seeds.len()
                        )));
                    }
                }
                seeds.clone()
            }
            _ => seed_range(base.unwrap_or(1), count.unwrap_or(cfg.seeds.len())),
        };
        for (k, v) in &cli.hp {
            cfg.hp.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.hp.validate()?;
        if self.episodes < 1 {
            return Err(Error::InvalidConfig("episodes must be at least 1".into()));
        }
        if self.window < 1 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if self.policy != PolicyKind::Classical {
            if self.layers < 1 {
                return Err(Error::InvalidConfig("a photonic policy needs at least one layer".into()));
            }
            self.sim_config()?;
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        Ok(())
    }

    pub fn num_agents(&self) -> usize {
        self.seeds.len()
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        SimConfig::new(2, self.cutoff)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppo::MemoryMode;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!((c.layers, c.cutoff, c.episodes, c.num_agents()), (3, 16, 1000, 20));
        c.validate().unwrap();
    }

    #[test]
    fn file_and_overrides() {
        let text = r#"
            policy = "classical"
            episodes = 50
            num_agents = 3
            seed_base = 10
            hp.gamma = 0.9
            hp.memory_mode = "window"
            filter_enabled = false
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.policy, PolicyKind::Classical);
        assert_eq!(c.seeds, vec![10, 11, 12]);
        assert_eq!(c.hp.gamma, 0.9);
        assert_eq!(c.hp.memory_mode, MemoryMode::Window);
        assert!(!c.filter_enabled);

        let cli = ConfigOverrides {
            episodes: Some(7),
            num_agents: Some(2),
            hp: vec![("gamma".into(), "0.5".into())],
            ..ConfigOverrides::default()
        };
        let c = ExperimentConfig::resolve(Some(text), &cli).unwrap();
        assert_eq!((c.episodes, c.seeds.clone(), c.hp.gamma), (7, vec![10, 11], 0.5));

        let listed = ExperimentConfig::from_toml_str("seeds = [4, 9]\n[hp]\nepochs = 2\n").unwrap();
        assert_eq!((listed.seeds, listed.hp.epochs), (vec![4, 9], 2));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig {
            seeds: vec![3, 1, 2],
            ..ExperimentConfig::default()
        };
        let back: ExperimentConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "bogus = 1",
            "hp.bogus = 1",
            "episodes = 0",
            "policy = \"quantum\"",
            "seeds = [1, 1]",
            "seeds = [1, 2]\nnum_agents = 3",
            "cutoff = 1",
            "hp.gamma = 2.0",
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::InvalidConfig(_))), "{text}");
        }
    }
}
