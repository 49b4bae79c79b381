use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::plot::{line_chart, Series, PALETTE};
use super::{aggregate, apply_filters, run_experiment, AgentRecord, AgentStatus, AggregateRow, ExperimentConfig, FilterRules};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

pub fn agent_csv_name(seed: u64) -> String {
    format!("agent_{seed}.csv")
}

/// One line of a per-agent CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCsvRow {
    pub episode: usize,
    pub seed: u64,
    pub reward: f64,
    pub moving_avg: f64,
    pub policy_loss: f64,
    pub clip_term: f64,
    pub kl_term: f64,
    pub entropy_term: f64,
    pub l2_term: f64,
    pub value_loss: f64,
    /// Empty for the classical policy.
    pub min_state_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCsvRow {
    pub episode: usize,
    pub n_surviving: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_moving_avg: f64,
    pub std_moving_avg: f64,
}

impl From<&AggregateRow> for AggregateCsvRow {
    fn from(r: &AggregateRow) -> Self {
        AggregateCsvRow {
            episode: r.episode,
            n_surviving: r.n_surviving,
            mean_reward: r.mean_reward,
            std_reward: r.std_reward,
            mean_moving_avg: r.mean_moving_avg,
            std_moving_avg: r.std_moving_avg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestAgent {
    pub seed: u64,
    pub status: AgentStatus,
    pub episodes_run: usize,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort_reason: Option<String>,
}

/// Everything needed to rerun an experiment, plus what the run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    /// True when no aggregate was produced (no agents, or none survived).
    pub empty: bool,
    pub surviving: usize,
    /// Informational only.
    pub wall_seconds_per_episode: f64,
    pub config: ExperimentConfig,
    pub agents: Vec<ManifestAgent>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {}", path.display(), e.message())))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

pub fn read_agent_csv(path: &Path) -> Result<Vec<AgentCsvRow>> {
    read_csv(path)
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateCsvRow>> {
    read_csv(path)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn agent_rows(record: &AgentRecord, window: usize) -> Vec<AgentCsvRow> {
    let ma = record.moving_average(window);
    record
        .episodes
        .iter()
        .zip(ma)
        .enumerate()
        .map(|(i, (e, moving_avg))| AgentCsvRow {
            episode: i + 1,
            seed: record.seed,
            reward: e.reward,
            moving_avg,
            policy_loss: e.policy_loss,
            clip_term: e.clip_term,
            kl_term: e.kl_term,
            entropy_term: e.entropy_term,
            l2_term: e.l2_term,
            value_loss: e.value_loss,
            min_state_norm: e.min_state_norm,
        })
        .collect()
}

/// Writes CSVs, plots, checkpoints and the manifest into `cfg.output_dir`.
pub fn emit_outputs(records: &[AgentRecord], aggregate: Option<&[AggregateRow]>, cfg: &ExperimentConfig) -> Result<Manifest> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let surviving = records.iter().filter(|r| r.survives()).count();
    let total_episodes: usize = records.iter().map(|r| r.episodes.len()).sum();
    let total_seconds: f64 = records.iter().map(|r| r.wall_seconds).sum();
    let manifest = Manifest {
        version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        empty: aggregate.is_none_or(|a| a.is_empty()),
        surviving,
        wall_seconds_per_episode: if total_episodes > 0 { total_seconds / total_episodes as f64 } else { 0.0 },
        config: cfg.clone(),
        agents: records
            .iter()
            .map(|r| ManifestAgent {
                seed: r.seed,
                status: r.status,
                episodes_run: r.episodes.len(),
                wall_seconds: r.wall_seconds,
                abort_reason: r.abort_reason.clone(),
            })
            .collect(),
    };

    for r in records {
        write_csv(&dir.join(agent_csv_name(r.seed)), agent_rows(r, cfg.window))?;
        if !r.snapshots.is_empty() {
            let cdir = dir.join("checkpoints").join(format!("agent_{}", r.seed));
            fs::create_dir_all(&cdir).map_err(|e| Error::io(&cdir, e))?;
            for s in &r.snapshots {
                write_text(&cdir.join(format!("policy_ep{}.txt", s.episode)), &s.policy)?;
                write_text(&cdir.join(format!("value_ep{}.txt", s.episode)), &s.value)?;
            }
        }
    }
    if !records.is_empty() {
        let averages: Vec<Vec<f64>> = records.iter().map(|r| r.moving_average(cfg.window)).collect();
        let labels: Vec<String> = records.iter().map(|r| format!("seed {} ({})", r.seed, r.status)).collect();
        let series: Vec<Series<'_>> = averages
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(k, (values, label))| Series {
                label,
                values,
                color: PALETTE[k % PALETTE.len()],
            })
            .collect();
        let svg = line_chart(
            &format!("{} policy: moving average ({}) per agent", cfg.policy, cfg.window),
            "reward",
            &series,
            None,
        );
        write_text(&dir.join("agents.svg"), &svg)?;
    }
    if let Some(rows) = aggregate.filter(|a| !a.is_empty()) {
        write_csv(&dir.join(AGGREGATE_FILE), rows.iter().map(AggregateCsvRow::from))?;
        let mean: Vec<f64> = rows.iter().map(|r| r.mean_moving_avg).collect();
        let lower: Vec<f64> = rows.iter().map(|r| r.mean_moving_avg - r.std_moving_avg).collect();
        let upper: Vec<f64> = rows.iter().map(|r| r.mean_moving_avg + r.std_moving_avg).collect();
        let svg = line_chart(
            &format!("{} policy: {} surviving agents, mean ± σ", cfg.policy, surviving),
            "moving-average reward",
            &[Series {
                label: "mean",
                values: &mean,
                color: PALETTE[0],
            }],
            Some((&lower, &upper)),
        );
        write_text(&dir.join("reward_curves.svg"), &svg)?;
    }
    let text = toml::to_string(&manifest).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    write_text(&dir.join(MANIFEST_FILE), &text)?;
    Ok(manifest)
}

/// Filter rules implied by a configuration.
pub fn filter_rules(cfg: &ExperimentConfig) -> FilterRules {
    FilterRules {
        checkpoint_episode: cfg.filter_episode,
        threshold: cfg.filter_threshold,
        window: cfg.window,
        drop_low: cfg.filter_enabled,
        drop_high_start: cfg.filter_enabled,
    }
}

/// Outcome of a full experiment written to disk.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<AgentRecord>,
    pub aggregate: Option<Vec<AggregateRow>>,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn any_aborted(&self) -> bool {
        self.records.iter().any(|r| r.status == AgentStatus::Aborted)
    }
}

/// Train, filter, aggregate and write everything.
pub fn run_and_emit(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let mut records = run_experiment(cfg)?;
    finish_run(cfg, &mut records).map(|(aggregate, manifest)| RunOutcome {
        records,
        aggregate,
        manifest,
    })
}

pub(crate) fn finish_run(cfg: &ExperimentConfig, records: &mut [AgentRecord]) -> Result<(Option<Vec<AggregateRow>>, Manifest)> {
    apply_filters(records, &filter_rules(cfg));
    let agg = match aggregate(records, cfg.window) {
        Ok(rows) => Some(rows),
        Err(Error::Empty(_)) => None,
        Err(e) => return Err(e),
    };
    let manifest = emit_outputs(records, agg.as_deref(), cfg)?;
    Ok((agg, manifest))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub output_dir: PathBuf,
    pub compared: Vec<String>,
    /// Files whose bytes differ from the original run, or that are missing.
    pub mismatched: Vec<String>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.mismatched.is_empty()
    }
}

/// Reruns the experiment recorded in a manifest and compares the CSVs.
pub fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<ReplayReport> {
    let manifest = Manifest::load(manifest_path)?;
    let original = manifest_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let mut cfg = manifest.config.clone();
    cfg.output_dir = out.map_or_else(|| original.join("replay"), Path::to_path_buf);
    if cfg.output_dir == original {
        return Err(Error::InvalidConfig("replay output must differ from the original run directory".into()));
    }
    run_and_emit(&cfg)?;
    let mut files: Vec<String> = manifest.agents.iter().map(|a| agent_csv_name(a.seed)).collect();
    if !manifest.empty {
        files.push(AGGREGATE_FILE.to_string());
    }
    let mut mismatched = Vec::new();
    for f in &files {
        let a = fs::read(original.join(f)).ok();
        let b = fs::read(cfg.output_dir.join(f)).ok();
        if a.is_none() || a != b {
            mismatched.push(f.clone());
        }
    }
    Ok(ReplayReport {
        output_dir: cfg.output_dir,
        compared: files,
        mismatched,
    })
}
