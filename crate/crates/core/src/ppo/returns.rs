use crate::error::{Error, Result};

/// `out[t] = r_t + gamma * out[t + 1]`, summed right to left.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (t, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[t] = acc;
    }
    out
}

/// Generalized advantage estimates via `A_t = delta_t + gamma lambda A_{t+1}`.
///
/// `bootstrap_value` is `V(s_T)` after the last step, zero for a terminal state.
pub fn gae_advantages(rewards: &[f64], values: &[f64], bootstrap_value: f64, gamma: f64, lambda: f64) -> Result<Vec<f64>> {
    if rewards.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} rewards but {} values",
            rewards.len(),
            values.len()
        )));
    }
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    let mut next_value = bootstrap_value;
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        acc = delta + gamma * lambda * acc;
        out[t] = acc;
        next_value = values[t];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(rewards: &[f64], values: &[f64], boot: f64, gamma: f64, lambda: f64) -> Vec<f64> {
        let n = rewards.len();
        let v = |t: usize| if t < n { values[t] } else { boot };
        (0..n)
            .map(|t| {
                (0..n - t)
                    .map(|l| (gamma * lambda).powi(l as i32) * (rewards[t + l] + gamma * v(t + l + 1) - values[t + l]))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn returns_examples() {
        assert_eq!(discounted_returns(&[1.0], 0.99), vec![1.0]);
        let r = discounted_returns(&[1.0, 1.0, 1.0], 0.99);
        let want = [2.9701, 1.99, 1.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(discounted_returns(&[3.0, -1.0, 2.0], 0.0), vec![3.0, -1.0, 2.0]);
        assert!(discounted_returns(&[], 0.9).is_empty());
    }

    #[test]
    fn gae_examples() {
        assert_eq!(gae_advantages(&[1.0], &[0.5], 0.0, 0.99, 0.95).unwrap(), vec![0.5]);
        let (r, v) = ([1.0, 0.5, 2.0], [0.3, -0.2, 1.1]);
        let a = gae_advantages(&r, &v, 0.7, 0.9, 0.0).unwrap();
        let deltas = [1.0 + 0.9 * -0.2 - 0.3, 0.5 + 0.9 * 1.1 + 0.2, 2.0 + 0.9 * 0.7 - 1.1];
        for (x, y) in a.iter().zip(deltas) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(matches!(gae_advantages(&[1.0], &[], 0.0, 0.9, 0.9), Err(Error::Shape(_))));
    }

    proptest! {
        #[test]
        fn returns_recursion_is_exact(rewards in proptest::collection::vec(-5.0f64..5.0, 1..60), gamma in 0.0f64..=1.0) {
            let out = discounted_returns(&rewards, gamma);
            for t in 0..rewards.len() - 1 {
                prop_assert_eq!(out[t], rewards[t] + gamma * out[t + 1]);
            }
        }

        #[test]
        fn gae_matches_double_sum(
            data in proptest::collection::vec((-2.0f64..2.0, -5.0f64..5.0), 1..=50),
            boot in -5.0f64..5.0, gamma in 0.5f64..=1.0, lambda in 0.0f64..=1.0,
        ) {
            let (r, v): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
            let fast = gae_advantages(&r, &v, boot, gamma, lambda).unwrap();
            let slow = brute_force(&r, &v, boot, gamma, lambda);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
            }
        }
    }
}
