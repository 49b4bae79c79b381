//! Trains one classical 2-8-2 agent and prints its learning curve.
//!
//! cargo run --release --example train_classical [-- <episodes> <seed>]

use photonic_ppo::harness::{run_agent, ExperimentConfig};
use photonic_ppo::policy::PolicyKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().map(|s| s.parse()).transpose()?.unwrap_or(150);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let cfg = ExperimentConfig {
        policy: PolicyKind::Classical,
        episodes,
        seeds: vec![seed],
        checkpoint_every: 0,
        ..ExperimentConfig::default()
    };
    let record = run_agent(&cfg, seed)?;
    let ma = record.moving_average(cfg.window);
    for (i, (log, avg)) in record.episodes.iter().zip(&ma).enumerate().step_by(10) {
        println!(
            "episode {:>4}  reward {:>5.0}  moving avg {:>6.1}  kl {:.4}  entropy {:.3}",
            i + 1,
            log.reward,
            avg,
            log.kl_term,
            log.entropy_term
        );
    }
    println!("final moving average {:.1} after {:.2} s", ma.last().copied().unwrap_or(0.0), record.wall_seconds);
    Ok(())
}
