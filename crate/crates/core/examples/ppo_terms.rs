//! Evaluates the PPO building blocks on small hand-made inputs.
//!
//! cargo run --example ppo_terms

use photonic_ppo::circuit::ActionDistribution;
use photonic_ppo::ppo::{
    adam_step, clip_objective, discounted_returns, entropy_categorical, gae_advantages, kl_categorical, AdamState,
};

fn main() -> anyhow::Result<()> {
    let rewards = [1.0, 1.0, 1.0];
    println!("returns, gamma 0.99: {:?}", discounted_returns(&rewards, 0.99));
    let values = [2.5, 1.8, 0.9];
    println!(
        "GAE, gamma 0.99 lambda 0.95: {:?}",
        gae_advantages(&rewards, &values, 0.0, 0.99, 0.95)?
    );
    for (ratio, adv) in [(1.0, 2.0), (1.5, 2.0), (0.5, -1.0)] {
        println!("clip(ratio {ratio}, advantage {adv}) = {}", clip_objective(ratio, adv, 0.2));
    }
    let new = ActionDistribution::from_scores(0.9f64.ln(), 0.1f64.ln(), 1.0)?;
    let old = ActionDistribution::from_scores(0.0, 0.0, 1.0)?;
    println!("KL(new || old) = {:.6}", kl_categorical(&new, &old));
    println!("entropy(new) = {:.6}, entropy(old) = {:.6}", entropy_categorical(&new), entropy_categorical(&old));

    let mut params = vec![0.0, 0.0];
    let mut adam = AdamState::new(2);
    adam_step(&mut params, &[0.3, -4.0], &mut adam, 0.01)?;
    println!("first Adam step from grad (0.3, -4.0): {params:?}");
    Ok(())
}
