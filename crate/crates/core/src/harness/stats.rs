use crate::error::{Error, Result};

use super::{AgentRecord, AgentStatus};

/// Trailing mean over `window` episodes; the first entries average the
/// available prefix.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..values.len())
        .map(|i| {
            let slice = &values[(i + 1).saturating_sub(window)..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterRules {
    /// Agents whose moving average at this episode (1-based) is below the
    /// threshold are dropped.
    pub checkpoint_episode: usize,
    pub threshold: f64,
    pub window: usize,
    pub drop_low: bool,
    pub drop_high_start: bool,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            checkpoint_episode: super::DEFAULT_FILTER_EPISODE,
            threshold: super::DEFAULT_FILTER_THRESHOLD,
            window: super::DEFAULT_WINDOW,
            drop_low: true,
            drop_high_start: true,
        }
    }
}

impl FilterRules {
    pub fn disabled() -> Self {
        FilterRules {
            drop_low: false,
            drop_high_start: false,
            ..FilterRules::default()
        }
    }
}

/// Status an agent gets from the filter rules given its rewards.
pub fn classify(rewards: &[f64], rules: &FilterRules) -> AgentStatus {
    if rewards.is_empty() {
        return AgentStatus::Completed;
    }
    let ma = moving_average(rewards, rules.window);
    let first_window = ma[rules.window.min(ma.len()) - 1];
    if rules.drop_high_start && first_window > rules.threshold {
        return AgentStatus::FilteredHighStart;
    }
    if rules.drop_low
        && rules.checkpoint_episode >= 1
        && ma.len() >= rules.checkpoint_episode
        && ma[rules.checkpoint_episode - 1] < rules.threshold
    {
        return AgentStatus::FilteredLow;
    }
    AgentStatus::Completed
}

/// Marks filtered agents. Only `status` changes; aborted agents stay aborted.
pub fn apply_filters(records: &mut [AgentRecord], rules: &FilterRules) {
    for r in records.iter_mut() {
        if matches!(r.status, AgentStatus::Aborted) {
            continue;
        }
        r.status = classify(&r.rewards(), rules);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub episode: usize,
    pub n_surviving: usize,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_moving_avg: f64,
    pub std_moving_avg: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-episode mean and population standard deviation over surviving agents.
pub fn aggregate(records: &[AgentRecord], window: usize) -> Result<Vec<AggregateRow>> {
    let survivors: Vec<&AgentRecord> = records.iter().filter(|r| r.survives()).collect();
    if survivors.is_empty() {
        return Err(Error::Empty("no surviving agents to aggregate".into()));
    }
    let episodes = survivors.iter().map(|r| r.episodes.len()).min().unwrap_or(0);
    let rewards: Vec<Vec<f64>> = survivors.iter().map(|r| r.rewards()).collect();
    let averages: Vec<Vec<f64>> = rewards.iter().map(|r| moving_average(r, window)).collect();
    Ok((0..episodes)
        .map(|t| {
            let r: Vec<f64> = rewards.iter().map(|v| v[t]).collect();
            let m: Vec<f64> = averages.iter().map(|v| v[t]).collect();
            let (mean_reward, std_reward) = mean_std(&r);
            let (mean_moving_avg, std_moving_avg) = mean_std(&m);
            AggregateRow {
                episode: t + 1,
                n_surviving: survivors.len(),
                mean_reward,
                std_reward,
                mean_moving_avg,
                std_moving_avg,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::EpisodeLog;

    pub(crate) fn record(seed: u64, rewards: &[f64]) -> AgentRecord {
        AgentRecord {
            seed,
            episodes: rewards
                .iter()
                .map(|&reward| EpisodeLog {
                    reward,
                    policy_loss: 0.0,
                    clip_term: 0.0,
                    kl_term: 0.0,
                    entropy_term: 0.0,
                    l2_term: 0.0,
                    value_loss: 0.0,
                    min_state_norm: None,
                })
                .collect(),
            status: AgentStatus::Completed,
            abort_reason: None,
            snapshots: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn moving_average_examples() {
        let xs: Vec<f64> = (1..=40).map(f64::from).collect();
        let ma = moving_average(&xs, 20);
        assert_eq!(ma.len(), 40);
        assert_eq!(ma[39], 30.5);
        assert_eq!(ma[0], 1.0);
        assert_eq!(ma[3], 2.5);
    }

    #[test]
    fn filter_rules() {
        let rules = FilterRules::default();
        assert_eq!(classify(&vec![10.0; 600], &rules), AgentStatus::FilteredLow);
        let mut high = vec![150.0; 30];
        high.extend(vec![200.0; 570]);
        assert_eq!(classify(&high, &rules), AgentStatus::FilteredHighStart);
        let climbing: Vec<f64> = (0..600).map(|i| (20.0 + i as f64 * 0.4).min(180.0)).collect();
        assert_eq!(classify(&climbing, &rules), AgentStatus::Completed);
        // Short runs never reach the checkpoint episode.
        assert_eq!(classify(&vec![10.0; 100], &rules), AgentStatus::Completed);
        assert_eq!(classify(&vec![10.0; 600], &FilterRules::disabled()), AgentStatus::Completed);
    }

    #[test]
    fn filters_only_change_membership() {
        let mut records = vec![record(1, &[10.0; 600]), record(2, &(0..600).map(|i| i as f64).collect::<Vec<_>>())];
        let before = records.clone();
        apply_filters(&mut records, &FilterRules::default());
        assert_eq!(records[0].status, AgentStatus::FilteredLow);
        assert_eq!(records[1].status, AgentStatus::Completed);
        for (a, b) in records.iter().zip(&before) {
            assert_eq!(a.episodes, b.episodes);
        }
    }

    #[test]
    fn aggregate_examples() {
        let one = aggregate(&[record(1, &[3.0, 5.0])], 20).unwrap();
        assert_eq!((one[1].mean_reward, one[1].std_reward, one[1].mean_moving_avg), (5.0, 0.0, 4.0));
        let two = aggregate(&[record(1, &[100.0; 3]), record(2, &[200.0; 3])], 20).unwrap();
        assert_eq!((two[2].mean_reward, two[2].std_reward, two[2].n_surviving), (150.0, 50.0, 2));
        let mut gone = record(3, &[1.0]);
        gone.status = AgentStatus::FilteredLow;
        assert!(matches!(aggregate(&[gone], 20), Err(Error::Empty(_))));
    }
}
