use crate::baseline::ValueNetParams;
use crate::circuit::{ActionDistribution, ObservationPair};
use crate::error::{Error, Result};
use crate::policy::Policy;

use super::Hyperparameters;

/// `min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)`.
pub fn clip_objective(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}

/// `KL(new || old) = sum_a p_new(a) (log p_new(a) - log p_old(a))`.
pub fn kl_categorical(new: &ActionDistribution, old: &ActionDistribution) -> f64 {
    (0..2)
        .map(|a| new.prob(a) * (new.log_prob(a) - old.log_prob(a)))
        .sum::<f64>()
        .max(0.0)
}

pub fn entropy_categorical(p: &ActionDistribution) -> f64 {
    -(0..2).map(|a| p.prob(a) * p.log_prob(a)).sum::<f64>()
}

/// One transition as seen by the policy loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample {
    pub obs: ObservationPair,
    pub action: usize,
    pub advantage: f64,
    /// Behaviour distribution recorded when the action was taken.
    pub old: ActionDistribution,
}

/// Batch means of the loss terms and the resulting total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub total: f64,
    pub clip: f64,
    pub kl: f64,
    pub entropy: f64,
    /// Unweighted sum of squares of the active-gate magnitudes.
    pub l2: f64,
}

impl LossBreakdown {
    /// `-(clip - beta kl + c2 entropy) + alpha l2`.
    pub fn compose(clip: f64, kl: f64, entropy: f64, l2: f64, hp: &Hyperparameters) -> Self {
        LossBreakdown {
            total: -(clip - hp.beta * kl + hp.c2 * entropy) + hp.alpha * l2,
            clip,
            kl,
            entropy,
            l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    pub breakdown: LossBreakdown,
    pub gradient: Option<Vec<f64>>,
    /// Smallest output-state squared norm seen, for photonic policies.
    pub min_norm_sqr: Option<f64>,
}

struct SampleTerms {
    clip: f64,
    kl: f64,
    entropy: f64,
    /// `d(clip - beta kl + c2 entropy) / dz` with `z = scores / tau`.
    d_objective: [f64; 2],
}

fn sample_terms(new: &ActionDistribution, s: &LossSample, hp: &Hyperparameters) -> SampleTerms {
    let p = new.probs();
    let lp = new.log_probs();
    let lo = s.old.log_probs();
    let ratio = (lp[s.action] - lo[s.action]).exp();
    let clip = clip_objective(ratio, s.advantage, hp.epsilon);
    let kl = kl_categorical(new, &s.old);
    let entropy = entropy_categorical(new);
    // The min picks the unclipped branch unless clipping strictly lowers it.
    let unclipped_active = ratio * s.advantage <= ratio.clamp(1.0 - hp.epsilon, 1.0 + hp.epsilon) * s.advantage;
    let raw_kl: f64 = (0..2).map(|b| p[b] * (lp[b] - lo[b])).sum();
    let mut d = [0.0; 2];
    for b in 0..2 {
        let indicator = if b == s.action { 1.0 } else { 0.0 };
        let d_clip = if unclipped_active {
            s.advantage * ratio * (indicator - p[b])
        } else {
            0.0
        };
        let d_kl = p[b] * ((lp[b] - lo[b]) - raw_kl);
        let d_entropy = -p[b] * (lp[b] + entropy);
        d[b] = d_clip - hp.beta * d_kl + hp.c2 * d_entropy;
    }
    SampleTerms {
        clip,
        kl,
        entropy,
        d_objective: d,
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Negated PPO objective over a minibatch, with its gradient when requested.
pub fn ppo_loss(samples: &[LossSample], policy: &dyn Policy, hp: &Hyperparameters, with_gradient: bool) -> Result<LossOutput> {
    if samples.is_empty() {
        return Err(Error::Empty("policy loss over an empty minibatch".into()));
    }
    let n = samples.len() as f64;
    let (mut clip, mut kl, mut entropy) = (0.0, 0.0, 0.0);
    let mut min_norm = None;
    let mut grad = with_gradient.then(|| vec![0.0; policy.num_params()]);
    for s in samples {
        let mut terms = None;
        let mut upstream = |eval: &crate::policy::PolicyEval| -> Result<[f64; 2]> {
            let dist = ActionDistribution::from_scores(eval.scores[0], eval.scores[1], hp.tau)?;
            let t = sample_terms(&dist, s, hp);
            // loss = -objective / n and z = s / tau
            let up = [-t.d_objective[0] / (n * hp.tau), -t.d_objective[1] / (n * hp.tau)];
            terms = Some(t);
            Ok(up)
        };
        let eval = match grad.as_mut() {
            Some(g) => {
                let (eval, gs) = policy.evaluate_with_gradient(&s.obs, &mut upstream)?;
                for (acc, x) in g.iter_mut().zip(gs) {
                    *acc += x;
                }
                eval
            }
            None => {
                let eval = policy.evaluate(&s.obs)?;
                upstream(&eval)?;
                eval
            }
        };
        let t = terms.expect("upstream is always called");
        clip += t.clip;
        kl += t.kl;
        entropy += t.entropy;
        min_norm = min_opt(min_norm, eval.norm_sqr);
    }
    let l2 = policy.l2_active();
    if let Some(g) = grad.as_mut() {
        for (acc, x) in g.iter_mut().zip(policy.l2_active_gradient()) {
            *acc += hp.alpha * x;
        }
    }
    let breakdown = LossBreakdown::compose(clip / n, kl / n, entropy / n, l2, hp);
    if !breakdown.total.is_finite() {
        return Err(Error::NumericalDegeneracy("non-finite policy loss".into()));
    }
    Ok(LossOutput {
        breakdown,
        gradient: grad,
        min_norm_sqr: min_norm,
    })
}

/// Mean squared error of the critic against `(observation, target)` pairs.
pub fn value_loss(batch: &[(ObservationPair, f64)], vparams: &ValueNetParams) -> Result<f64> {
    Ok(value_loss_with_gradient(batch, vparams)?.0)
}

pub fn value_loss_with_gradient(batch: &[(ObservationPair, f64)], vparams: &ValueNetParams) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::Empty("value loss over an empty batch".into()));
    }
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; vparams.num_params()];
    for (obs, target) in batch {
        let (v, g) = vparams.value_with_gradient(obs);
        let err = v - target;
        loss += err * err / n;
        for (acc, x) in grad.iter_mut().zip(g) {
            *acc += 2.0 * err * x / n;
        }
    }
    Ok((loss, grad))
}

/// Central finite-difference gradient with per-coordinate step `h`.
pub fn gradient<F>(mut objective: F, at: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut x = at.to_vec();
    let mut out = Vec::with_capacity(at.len());
    for i in 0..at.len() {
        x[i] = at[i] + h;
        let up = objective(&x)?;
        x[i] = at[i] - h;
        let down = objective(&x)?;
        x[i] = at[i];
        let g = (up - down) / (2.0 * h);
        if !g.is_finite() {
            return Err(Error::NumericalDegeneracy(format!("non-finite difference on coordinate {i}")));
        }
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::EncodingVariant;
    use crate::fock::SimConfig;
    use crate::policy::{ClassicalPolicy, QuantumPolicy};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(p0: f64) -> ActionDistribution {
        ActionDistribution::from_scores(p0.ln(), (1.0 - p0).ln(), 1.0).unwrap()
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_objective(1.0, 3.5, 0.2), 3.5);
        assert!((clip_objective(1.5, 2.0, 0.2) - 2.4).abs() < 1e-15);
        assert!((clip_objective(0.5, -1.0, 0.2) - -0.8).abs() < 1e-15);
    }

    #[test]
    fn kl_and_entropy_examples() {
        let u = dist(0.5);
        assert_eq!(kl_categorical(&u, &u), 0.0);
        let want = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((kl_categorical(&dist(0.9), &u) - want).abs() < 1e-12);
        assert!((want - 0.368064).abs() < 1e-6);
        assert!((entropy_categorical(&u) - 2f64.ln()).abs() < 1e-15);
        assert!(entropy_categorical(&dist(1.0 - 1e-12)) < 1e-10);
        let want = -(0.7311 * 0.7311f64.ln() + 0.2689 * 0.2689f64.ln());
        assert!((entropy_categorical(&dist(0.7311)) - want).abs() < 1e-12);
        assert!((want - 0.58216).abs() < 1e-5);
    }

    fn random_batch(rng: &mut ChaCha8Rng, n: usize) -> Vec<LossSample> {
        (0..n)
            .map(|_| LossSample {
                obs: ObservationPair::new(rng.random_range(-0.2..0.2), rng.random_range(-1.5..1.5)),
                action: rng.random_range(0..2),
                advantage: rng.random_range(-2.0..2.0),
                old: dist(rng.random_range(0.2..0.8)),
            })
            .collect()
    }

    fn check_gradient(policy: &mut dyn Policy, batch: &[LossSample], hp: &Hyperparameters) {
        let analytic = ppo_loss(batch, policy, hp, true).unwrap().gradient.unwrap();
        let at = policy.flat_params();
        let numeric = gradient(
            |x| {
                policy.set_flat_params(x)?;
                ppo_loss(batch, policy, hp, false).map(|o| o.breakdown.total)
            },
            &at,
            1e-5,
        );
        policy.set_flat_params(&at).unwrap();
        let numeric = numeric.unwrap();
        for (i, (a, b)) in analytic.iter().zip(&numeric).enumerate() {
            if b.abs() > 1e-6 {
                assert!(((a - b) / b).abs() < 1e-4, "coordinate {i}: {a} vs {b}");
            } else {
                assert!((a - b).abs() < 1e-8, "coordinate {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn classical_loss_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let hp = Hyperparameters::default();
        let mut policy = ClassicalPolicy::init(&mut rng);
        let batch = random_batch(&mut rng, 6);
        check_gradient(&mut policy, &batch, &hp);
    }

    #[test]
    fn quantum_loss_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hp = Hyperparameters {
            tau: 0.7,
            ..Hyperparameters::default()
        };
        let cfg = SimConfig::new(2, 6).unwrap();
        let mut policy = QuantumPolicy::init(&mut rng, 1, EncodingVariant::Reupload, &cfg).unwrap();
        let batch = random_batch(&mut rng, 3);
        check_gradient(&mut policy, &batch, &hp);
    }

    #[test]
    fn term_isolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let policy = ClassicalPolicy::init(&mut rng);
        let mut batch = random_batch(&mut rng, 4);
        let hp = Hyperparameters {
            beta: 0.0,
            c2: 0.0,
            alpha: 0.0,
            ..Hyperparameters::default()
        };
        let out = ppo_loss(&batch, &policy, &hp, false).unwrap();
        assert!((out.breakdown.total + out.breakdown.clip).abs() < 1e-15);

        // Matched old policy and zero advantages leave only entropy and L2.
        let hp = Hyperparameters::default();
        for s in &mut batch {
            let e = policy.evaluate(&s.obs).unwrap();
            s.old = ActionDistribution::from_scores(e.scores[0], e.scores[1], hp.tau).unwrap();
            s.advantage = 0.0;
        }
        let out = ppo_loss(&batch, &policy, &hp, false).unwrap();
        assert_eq!(out.breakdown.clip, 0.0);
        assert!(out.breakdown.kl.abs() < 1e-15);
        assert!((out.breakdown.total - (-hp.c2 * out.breakdown.entropy + hp.alpha * out.breakdown.l2)).abs() < 1e-15);
    }

    #[test]
    fn value_loss_examples() {
        let v = ValueNetParams::zeros();
        let o = ObservationPair::default();
        assert_eq!(value_loss(&[(o, 0.0), (o, 0.0)], &v).unwrap(), 0.0);
        assert_eq!(value_loss(&[(o, 2.0)], &v).unwrap(), 4.0);
        let mut v1 = ValueNetParams::zeros();
        v1.b_hidden[0] = 100.0;
        v1.w_out[0] = 1.0;
        // V = tanh(100) = 1 (to roundoff) everywhere; targets 0 and 2 give 1.0.
        assert!((value_loss(&[(o, 0.0), (o, 2.0)], &v1).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(value_loss(&[], &v), Err(Error::Empty(_))));
        assert!(matches!(
            ppo_loss(&[], &ClassicalPolicy::init(&mut ChaCha8Rng::seed_from_u64(0)), &Hyperparameters::default(), false),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn finite_difference_examples() {
        assert_eq!(gradient(|_| Ok(3.0), &[1.0, 2.0], 1e-4).unwrap(), vec![0.0, 0.0]);
        let g = gradient(|x| Ok(x.iter().map(|v| v * v).sum()), &[1.0, 2.0], 1e-4).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6);
        assert!(gradient(|x| Ok(1.0 / (x[0] - 1.0)), &[1.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn clip_is_pessimistic(ratio in 1e-3f64..10.0, adv in -10.0f64..10.0, eps in 0.0f64..0.5) {
            prop_assert!(clip_objective(ratio, adv, eps) <= ratio * adv);
        }

        #[test]
        fn kl_is_nonnegative(a in 1e-6f64..1.0 - 1e-6, b in 1e-6f64..1.0 - 1e-6) {
            let k = kl_categorical(&dist(a), &dist(b));
            prop_assert!(k >= 0.0);
            if (a - b).abs() < 1e-15 {
                prop_assert!(k < 1e-12);
            }
        }
    }
}
