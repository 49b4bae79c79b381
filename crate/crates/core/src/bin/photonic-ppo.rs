//! Command-line front end: `train`, `replay` and `gates-selftest`.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use photonic_ppo::fock::gates_selftest;
use photonic_ppo::harness::{replay, run_and_emit, ConfigOverrides, ExperimentConfig};
use photonic_ppo::policy::PolicyKind;
use photonic_ppo::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "photonic-ppo", version, about = "Train photonic and classical PPO agents on a restricted CartPole")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a batch of agents and write CSVs, plots, checkpoints and a manifest.
    Train {
        #[arg(long, value_parser = parse_policy)]
        policy: Option<PolicyKind>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long)]
        seed_base: Option<u64>,
        /// TOML file with experiment settings; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Hyperparameter override, also accepted as `--hp.<name>=<value>`.
        #[arg(long = "hp", value_name = "NAME=VALUE")]
        hp: Vec<String>,
        #[arg(long)]
        quiet: bool,
    },
    /// Rerun the experiment behind a manifest and compare the CSVs byte for byte.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the gate matrices against closed-form oracles.
    GatesSelftest,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `--hp.gamma=0.9` and `--hp.gamma 0.9` become `--hp gamma=0.9`.
fn normalize_args(args: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.into_iter().peekable();
    while let Some(arg) = it.next() {
        match arg.strip_prefix("--hp.") {
            Some(rest) if rest.contains('=') => {
                out.push("--hp".into());
                out.push(rest.into());
            }
            Some(rest) => {
                out.push("--hp".into());
                out.push(format!("{rest}={}", it.next().unwrap_or_default()));
            }
            None => out.push(arg),
        }
    }
    out
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidConfig(_) | Error::Parse(_)) => EXIT_CONFIG,
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => 1,
    }
}

fn train(overrides: ConfigOverrides, config: Option<PathBuf>, quiet: bool) -> anyhow::Result<u8> {
    let text = match &config {
        Some(path) => Some(std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };
    let cfg = ExperimentConfig::resolve(text.as_deref(), &overrides)?;
    if !quiet {
        eprintln!(
            "training {} agents ({} policy, {} episodes) into {}",
            cfg.num_agents(),
            cfg.policy,
            cfg.episodes,
            cfg.output_dir.display()
        );
    }
    let outcome = run_and_emit(&cfg)?;
    if !quiet {
        for r in &outcome.records {
            let ma = r.moving_average(cfg.window);
            eprintln!(
                "seed {:>4}: {:<20} final moving average {:.1}",
                r.seed,
                r.status.to_string(),
                ma.last().copied().unwrap_or(0.0)
            );
            if let Some(reason) = &r.abort_reason {
                eprintln!("           {reason}");
            }
        }
    }
    Ok(if outcome.any_aborted() { EXIT_NUMERICAL } else { 0 })
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Train {
            policy,
            layers,
            cutoff,
            episodes,
            agents,
            seed_base,
            config,
            out,
            hp,
            quiet,
        } => {
            let hp = hp
                .iter()
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                        .ok_or_else(|| Error::InvalidConfig(format!("expected NAME=VALUE, got {kv:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let overrides = ConfigOverrides {
                policy,
                layers,
                cutoff,
                episodes,
                num_agents: agents,
                seed_base,
                output_dir: out,
                hp,
            };
            train(overrides, config, quiet)
        }
        Command::Replay { manifest, out } => {
            let report = replay(&manifest, out.as_deref())?;
            for f in &report.compared {
                let ok = !report.mismatched.contains(f);
                println!("{} {f}", if ok { "identical" } else { "DIFFERS  " });
            }
            Ok(if report.identical() { 0 } else { 1 })
        }
        Command::GatesSelftest => {
            let checks = gates_selftest();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(normalize_args(std::env::args())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
