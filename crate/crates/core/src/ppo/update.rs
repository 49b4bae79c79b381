use rand::seq::SliceRandom;
use rand::Rng;

use crate::baseline::{value_forward, ValueNetParams};
use crate::error::{Error, Result};
use crate::policy::Policy;

use super::{adam_step, ppo_loss, value_loss_with_gradient, AdamState, Hyperparameters, LossBreakdown, LossSample, RolloutBuffer};

/// Adam state for the policy and the critic, plus the update counter used for
/// learning-rate decay.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers {
    pub policy: AdamState,
    pub value: AdamState,
    pub updates: usize,
}

impl Optimizers {
    pub fn new(policy_params: usize, value_params: usize) -> Self {
        Optimizers {
            policy: AdamState::new(policy_params),
            value: AdamState::new(value_params),
            updates: 0,
        }
    }
}

/// Minibatch averages over one update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateDiagnostics {
    pub loss: LossBreakdown,
    pub value_loss: f64,
    pub mean_kl: f64,
    pub mean_entropy: f64,
    /// Smallest output-state squared norm met while evaluating the loss.
    pub min_state_norm: Option<f64>,
    pub samples: usize,
    pub minibatches: usize,
}

/// Runs `epochs` passes of shuffled minibatches over the buffer.
///
/// Returns are Monte-Carlo discounted sums; advantages are GAE on the current
/// critic, optionally standardized over the whole buffer.
pub fn update<R: Rng + ?Sized>(
    buffer: &mut RolloutBuffer,
    policy: &mut dyn Policy,
    value: &mut ValueNetParams,
    opt: &mut Optimizers,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<UpdateDiagnostics> {
    if buffer.is_empty() {
        return Err(Error::Empty("update on an empty buffer".into()));
    }
    let values: Vec<f64> = buffer.steps().map(|s| value_forward(&s.obs, value)).collect();
    buffer.compute(&values, |o| value_forward(o, value), hp.gamma, hp.lambda)?;

    let mut advantages = buffer.advantages().to_vec();
    if hp.normalize_advantages {
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let sd = (advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
        for a in &mut advantages {
            *a = (*a - mean) / (sd + 1e-8);
        }
    }
    let samples: Vec<LossSample> = buffer
        .steps()
        .zip(&advantages)
        .map(|(s, &advantage)| LossSample {
            obs: s.obs,
            action: s.action,
            advantage,
            old: s.old,
        })
        .collect();
    let targets: Vec<_> = buffer.steps().map(|s| s.obs).zip(buffer.returns().iter().copied()).collect();

    let (lr_policy, lr_value) = hp.learning_rates(opt.updates);
    let mut diag = UpdateDiagnostics {
        samples: samples.len(),
        ..UpdateDiagnostics::default()
    };
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut policy_params = policy.flat_params();
    let mut value_params = value.to_flat();
    for _ in 0..hp.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(hp.minibatch) {
            let batch: Vec<LossSample> = chunk.iter().map(|&i| samples[i]).collect();
            let out = ppo_loss(&batch, &*policy, hp, true)?;
            let grad = out.gradient.expect("gradient requested");
            adam_step(&mut policy_params, &grad, &mut opt.policy, lr_policy)?;
            policy.set_flat_params(&policy_params)?;

            let vbatch: Vec<_> = chunk.iter().map(|&i| targets[i]).collect();
            let (vloss, vgrad) = value_loss_with_gradient(&vbatch, value)?;
            adam_step(&mut value_params, &vgrad, &mut opt.value, lr_value)?;
            value.set_flat(&value_params)?;

            let b = &out.breakdown;
            diag.loss.total += b.total;
            diag.loss.clip += b.clip;
            diag.loss.kl += b.kl;
            diag.loss.entropy += b.entropy;
            diag.loss.l2 += b.l2;
            diag.value_loss += vloss;
            diag.min_state_norm = match (diag.min_state_norm, out.min_norm_sqr) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            diag.minibatches += 1;
        }
    }
    let m = diag.minibatches as f64;
    diag.loss.total /= m;
    diag.loss.clip /= m;
    diag.loss.kl /= m;
    diag.loss.entropy /= m;
    diag.loss.l2 /= m;
    diag.value_loss /= m;
    diag.mean_kl = diag.loss.kl;
    diag.mean_entropy = diag.loss.entropy;
    opt.updates += 1;
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{ActionDistribution, ObservationPair};
    use crate::policy::ClassicalPolicy;
    use crate::ppo::TrajectoryStep;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frozen_buffer(policy: &dyn Policy, tau: f64) -> RolloutBuffer {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut b = RolloutBuffer::new(1000).unwrap();
        for t in 0..30 {
            let obs = ObservationPair::new(rng.random_range(-0.2..0.2), rng.random_range(-1.0..1.0));
            let e = policy.evaluate(&obs).unwrap();
            let old = ActionDistribution::from_scores(e.scores[0], e.scores[1], tau).unwrap();
            b.push(TrajectoryStep {
                obs,
                next_obs: obs,
                action: old.sample(&mut rng),
                reward: 1.0,
                old,
                value: 0.0,
                done: t == 29,
                truncated: false,
            })
            .unwrap();
        }
        b
    }

    #[test]
    fn update_is_deterministic() {
        let hp = Hyperparameters::default();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut policy = ClassicalPolicy::init(&mut rng);
            let mut value = ValueNetParams::init(&mut rng);
            let mut buffer = frozen_buffer(&policy, hp.tau);
            let mut opt = Optimizers::new(42, 32);
            let d1 = update(&mut buffer, &mut policy, &mut value, &mut opt, &hp, &mut rng).unwrap();
            let d2 = update(&mut buffer, &mut policy, &mut value, &mut opt, &hp, &mut rng).unwrap();
            (policy, value, opt, d1, d2)
        };
        let (a, b) = (run(), run());
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
        assert_eq!(a.3, b.3);
        assert_eq!(a.4, b.4);
        assert_eq!(a.3.minibatches, 4 * 4);
        assert!(a.3.mean_kl <= 0.5, "{}", a.3.mean_kl);
        assert!(a.3.min_state_norm.is_none());
    }

    #[test]
    fn zero_advantage_moves_only_through_entropy() {
        let hp = Hyperparameters {
            gamma: 1.0,
            lambda: 1.0,
            normalize_advantages: false,
            c2: 0.0,
            epochs: 1,
            ..Hyperparameters::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut policy = ClassicalPolicy::init(&mut rng);
        let before = policy.clone();
        // A critic that predicts the exact return leaves all advantages at zero.
        let mut buffer = RolloutBuffer::new(10).unwrap();
        let o = ObservationPair::default();
        let old = ActionDistribution::from_scores(policy.evaluate(&o).unwrap().scores[0], policy.evaluate(&o).unwrap().scores[1], 1.0).unwrap();
        buffer
            .push(TrajectoryStep {
                obs: o,
                next_obs: o,
                action: 0,
                reward: 0.0,
                old,
                value: 0.0,
                done: true,
                truncated: false,
            })
            .unwrap();
        let mut value = ValueNetParams::zeros();
        let mut opt = Optimizers::new(42, 32);
        update(&mut buffer, &mut policy, &mut value, &mut opt, &hp, &mut rng).unwrap();
        assert_eq!(policy, before);
        assert_eq!(buffer.advantages(), &[0.0]);
    }

    #[test]
    fn empty_buffer_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut policy = ClassicalPolicy::init(&mut rng);
        let r = update(
            &mut RolloutBuffer::new(4).unwrap(),
            &mut policy,
            &mut ValueNetParams::zeros(),
            &mut Optimizers::new(42, 32),
            &Hyperparameters::default(),
            &mut rng,
        );
        assert!(matches!(r, Err(Error::Empty(_))));
    }
}
