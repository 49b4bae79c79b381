//! Evaluates the two-mode photonic policy and checks its adjoint gradient.
//!
//! cargo run --release --example photonic_policy

use photonic_ppo::circuit::{
    feature_transform, init_params, policy_distribution, CompiledCircuit, EncodingVariant, ObservationPair,
};
use photonic_ppo::fock::SimConfig;
use photonic_ppo::ppo::gradient;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let cfg = SimConfig::new(2, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let obs = ObservationPair::new(0.03, -0.4);
    println!(
        "observation (phi, omega) = ({}, {}) encodes as ({:.4}, {:.4})",
        obs.pole_angle,
        obs.angular_velocity,
        feature_transform(obs.pole_angle),
        feature_transform(obs.angular_velocity)
    );

    for variant in [EncodingVariant::SingleEncode, EncodingVariant::Reupload] {
        let params = init_params(&mut rng, 3, variant, &cfg)?;
        let circuit = CompiledCircuit::new(&params, &cfg)?;
        let out = circuit.evaluate(&obs)?;
        let dist = policy_distribution(out.quadratures[0], out.quadratures[1], 1.0)?;
        println!(
            "{:>8}: <P1> {:+.5}  <P2> {:+.5}  pi(left) {:.4}  norm {:.5}  ({} parameters)",
            variant.to_string(),
            out.quadratures[0],
            out.quadratures[1],
            dist.p0,
            out.norm_sqr,
            circuit.num_params()
        );

        // d<P1>/dtheta by the adjoint pass and by central differences.
        let (_, adjoint) = circuit.evaluate_with_gradient(&obs, |_| Ok([1.0, 0.0]))?;
        let flat = params.to_flat();
        let numeric = gradient(
            |x| {
                let mut p = params.clone();
                p.set_flat(x)?;
                Ok(CompiledCircuit::new(&p, &cfg)?.evaluate(&obs)?.quadratures[0])
            },
            &flat,
            1e-5,
        )?;
        let worst = adjoint
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("          adjoint vs finite-difference gradient: max |diff| {worst:.2e}");
    }
    Ok(())
}
