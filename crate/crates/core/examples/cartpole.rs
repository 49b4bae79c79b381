//! Plays CartPole with a hand-written controller and prints the debug trace.
//!
//! cargo run --example cartpole [-- --trace]

use photonic_ppo::env::{restrict, CartPole};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn play(env: &CartPole, rng: &mut ChaCha8Rng, trace: bool, controller: impl Fn(f64, f64, &mut ChaCha8Rng) -> usize) -> anyhow::Result<f64> {
    let mut state = env.reset(rng);
    let mut total = 0.0;
    loop {
        if trace {
            println!("{}", state.trace_row());
        }
        let obs = restrict(&state);
        let action = controller(obs.pole_angle, obs.angular_velocity, rng);
        let step = env.step(&state, action)?;
        total += step.reward;
        state = step.state;
        if step.done {
            if trace {
                println!("{}", state.trace_row());
            }
            println!("episode over after {} steps ({})", state.step_count, step.done_reason.expect("done"));
            return Ok(total);
        }
    }
}

fn main() -> anyhow::Result<()> {
    let trace = std::env::args().any(|a| a == "--trace");
    let env = CartPole::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let random = play(&env, &mut rng, false, |_, _, rng| rng.random_range(0..2))?;
    println!("random actions: reward {random}");

    // Push toward the side the pole is falling to, using only (phi, omega).
    let lean = play(&env, &mut rng, trace, |phi, omega, _| usize::from(phi + 0.5 * omega > 0.0))?;
    println!("lean controller: reward {lean}");
    Ok(())
}
