//! Runs a small multi-agent experiment, writes its artifacts and replays it.
//!
//! cargo run --release --example aggregate_curves [-- <output dir>]

use std::path::PathBuf;

use photonic_ppo::harness::{replay, run_and_emit, ExperimentConfig, MANIFEST_FILE};
use photonic_ppo::policy::PolicyKind;

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("photonic-ppo-aggregate"));
    let cfg = ExperimentConfig {
        policy: PolicyKind::Classical,
        episodes: 100,
        seeds: (1..=8).collect(),
        checkpoint_every: 20,
        output_dir: out.clone(),
        ..ExperimentConfig::default()
    };
    let outcome = run_and_emit(&cfg)?;
    for r in &outcome.records {
        println!("seed {}: {}", r.seed, r.status);
    }
    match &outcome.aggregate {
        Some(rows) => {
            for row in rows.iter().step_by(10) {
                println!(
                    "episode {:>3}: {} surviving, mean {:>6.1} ± {:>5.1}, moving avg {:>6.1} ± {:>5.1}",
                    row.episode, row.n_surviving, row.mean_reward, row.std_reward, row.mean_moving_avg, row.std_moving_avg
                );
            }
        }
        None => println!("no surviving agents; the manifest is marked empty"),
    }
    let report = replay(&out.join(MANIFEST_FILE), Some(&out.join("replay")))?;
    println!(
        "replay of {} files: {}",
        report.compared.len(),
        if report.identical() { "byte-identical" } else { "MISMATCH" }
    );
    println!("artifacts in {}", out.display());
    Ok(())
}
