//! Trains one photonic agent at a reduced cutoff and reports state health.
//!
//! cargo run --release --example train_photonic [-- <single|reupload> <episodes> <cutoff>]

use photonic_ppo::harness::{run_agent_with_progress, EpisodeLog, ExperimentConfig};
use photonic_ppo::policy::PolicyKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let policy: PolicyKind = args.next().as_deref().unwrap_or("reupload").parse()?;
    let episodes = args.next().map(|s| s.parse()).transpose()?.unwrap_or(40);
    let cutoff = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let cfg = ExperimentConfig {
        policy,
        cutoff,
        episodes,
        seeds: vec![1],
        checkpoint_every: 0,
        ..ExperimentConfig::default()
    };
    let progress = |_: u64, episode: usize, log: &EpisodeLog| {
        if episode.is_multiple_of(5) {
            println!(
                "episode {:>4}  reward {:>4.0}  l2 {:.4}  min norm {:.4}",
                episode + 1,
                log.reward,
                log.l2_term,
                log.min_state_norm.unwrap_or(f64::NAN)
            );
        }
    };
    let record = run_agent_with_progress(&cfg, 1, &progress)?;
    let ma = record.moving_average(cfg.window);
    println!(
        "{} policy, D={}: final moving average {:.1}, status {}, {:.2} s/episode",
        cfg.policy,
        cfg.cutoff,
        ma.last().copied().unwrap_or(0.0),
        record.status,
        record.wall_seconds / record.episodes.len().max(1) as f64
    );
    Ok(())
}
