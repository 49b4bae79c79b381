use std::fs;

use photonic_ppo::harness::{
    agent_csv_name, agent_rows, emit_outputs, read_agent_csv, read_aggregate_csv, replay, run_agent, run_and_emit,
    run_experiment, AgentStatus, ExperimentConfig, Manifest, AGGREGATE_FILE, MANIFEST_FILE,
};
use photonic_ppo::policy::PolicyKind;

fn classical(episodes: usize, seeds: Vec<u64>, dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        policy: PolicyKind::Classical,
        episodes,
        seeds,
        checkpoint_every: 10,
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[test]
fn agent_csv_round_trips_to_twelve_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        policy: PolicyKind::Reupload,
        cutoff: 6,
        layers: 1,
        ..classical(4, vec![3], dir.path())
    };
    let outcome = run_and_emit(&cfg).unwrap();
    let want = agent_rows(&outcome.records[0], cfg.window);
    let got = read_agent_csv(&dir.path().join(agent_csv_name(3))).unwrap();
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!((g.episode, g.seed), (w.episode, w.seed));
        for (a, b) in [
            (g.reward, w.reward),
            (g.moving_avg, w.moving_avg),
            (g.policy_loss, w.policy_loss),
            (g.clip_term, w.clip_term),
            (g.kl_term, w.kl_term),
            (g.entropy_term, w.entropy_term),
            (g.l2_term, w.l2_term),
            (g.value_loss, w.value_loss),
        ] {
            assert!(close(a, b), "{a} vs {b}");
        }
        assert!(close(g.min_state_norm.unwrap(), w.min_state_norm.unwrap()));
    }
}

#[test]
fn csv_headers_follow_the_documented_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = classical(3, vec![1], dir.path());
    run_and_emit(&cfg).unwrap();
    let agent = fs::read_to_string(dir.path().join(agent_csv_name(1))).unwrap();
    assert_eq!(
        agent.lines().next().unwrap(),
        "episode,seed,reward,moving_avg,policy_loss,clip_term,kl_term,entropy_term,l2_term,value_loss,min_state_norm"
    );
    // Classical agents have no state norm.
    assert!(agent.lines().nth(1).unwrap().ends_with(','));
    let agg = fs::read_to_string(dir.path().join(AGGREGATE_FILE)).unwrap();
    assert_eq!(
        agg.lines().next().unwrap(),
        "episode,n_surviving,mean_reward,std_reward,mean_moving_avg,std_moving_avg"
    );
    let rows = read_aggregate_csv(&dir.path().join(AGGREGATE_FILE)).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].episode, 1);
    assert_eq!(rows[0].std_reward, 0.0);
    for f in ["agents.svg", "reward_curves.svg", "checkpoints/agent_1/policy_ep3.txt", "checkpoints/agent_1/value_ep3.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn manifest_replays_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = classical(15, vec![1, 2], dir.path());
    run_and_emit(&cfg).unwrap();
    let manifest = Manifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.config, cfg);
    assert_eq!(manifest.agents.len(), 2);

    let report = replay(&dir.path().join(MANIFEST_FILE), None).unwrap();
    assert!(report.identical(), "{:?}", report.mismatched);
    assert_eq!(report.output_dir, dir.path().join("replay"));
    assert_eq!(report.compared.len(), 3);

    // A tampered original is reported, not silently accepted.
    let path = dir.path().join(agent_csv_name(2));
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("garbage\n");
    fs::write(&path, text).unwrap();
    let report = replay(&dir.path().join(MANIFEST_FILE), Some(&dir.path().join("again"))).unwrap();
    assert_eq!(report.mismatched, vec![agent_csv_name(2)]);
}

#[test]
fn no_survivors_gives_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_outputs(&[], None, &classical(5, vec![], dir.path())).unwrap();
    assert!(manifest.empty);
    assert_eq!(manifest.surviving, 0);
    assert!(!dir.path().join(AGGREGATE_FILE).exists());

    // Every agent trips the early-performance rule with a negative threshold.
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        filter_threshold: -1.0,
        ..classical(25, vec![1, 2], dir.path())
    };
    let outcome = run_and_emit(&cfg).unwrap();
    assert!(outcome.aggregate.is_none());
    assert!(outcome.records.iter().all(|r| r.status == AgentStatus::FilteredHighStart));
    let loaded = Manifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(loaded.empty);
    assert!(dir.path().join(agent_csv_name(1)).exists());
}

#[test]
fn agents_do_not_share_state() {
    let dir = tempfile::tempdir().unwrap();
    let together = run_experiment(&classical(12, vec![1, 2], dir.path())).unwrap();
    for r in &together {
        let alone = run_agent(&classical(12, vec![r.seed], dir.path()), r.seed).unwrap();
        assert_eq!(alone.rewards(), r.rewards());
        assert_eq!(alone.snapshots, r.snapshots);
    }
    assert_ne!(together[0].rewards(), together[1].rewards());
}
