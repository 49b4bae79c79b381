//! The photonic policy circuit.
//!
//! Two qumodes carry the pole angle and angular velocity. Both start squeezed,
//! the transformed observations are written in as P-quadrature displacements,
//! and `L` variational layers follow. Each layer is
//! `BS, D, R, BS, S, R, K` with real in-layer displacement and squeezing
//! magnitudes, for 14 trainable scalars per layer. The policy reads out
//! `<P_1>` and `<P_2>` and turns them into action probabilities with a
//! temperature softmax.

mod engine;
mod params;

pub use engine::{CircuitOutput, CompiledCircuit};
pub use params::{EncodingVariant, LayerParams, PolicyParams, PARAMS_PER_LAYER};
pub(crate) use params::ACTIVE_SLOTS;

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fock::{
    apply_gate, beamsplitter_gate, displacement_gate, kerr_gate, quadrature_expectation,
    rotation_gate, squeezing_gate, FockState, Modes, SimConfig,
};

/// Squeezing applied to both vacuum modes before encoding.
pub const INIT_SQUEEZING: f64 = 0.5;
/// Encoding displacements act along P.
pub const ENCODING_PHASE: f64 = FRAC_PI_2;
/// Quadrature angle of the readout (`P`).
pub const READOUT_ANGLE: f64 = FRAC_PI_2;
/// Standard deviation of the initial in-layer displacement and squeezing magnitudes.
pub const INIT_MAGNITUDE_STD: f64 = 0.05;

/// The two observed CartPole features.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObservationPair {
    pub pole_angle: f64,
    pub angular_velocity: f64,
}

impl ObservationPair {
    pub fn new(pole_angle: f64, angular_velocity: f64) -> Self {
        ObservationPair {
            pole_angle,
            angular_velocity,
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.pole_angle, self.angular_velocity]
    }
}

/// Two-action categorical distribution with cached log-probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionDistribution {
    pub p0: f64,
    pub p1: f64,
    pub log_p0: f64,
    pub log_p1: f64,
}

impl ActionDistribution {
    /// Softmax of `scores / tau`, shifted by the maximum before exponentiating.
    pub fn from_scores(s0: f64, s1: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidConfig(format!("temperature must be positive, got {tau}")));
        }
        let (z0, z1) = (s0 / tau, s1 / tau);
        if !z0.is_finite() || !z1.is_finite() {
            return Err(Error::NumericalDegeneracy(format!("non-finite policy scores ({s0}, {s1})")));
        }
        // log p0 = -log(1 + e^{z1 - z0}), evaluated on the non-overflowing side
        let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        let diff = z1 - z0;
        Ok(ActionDistribution {
            p0: 1.0 / (1.0 + diff.exp()),
            p1: 1.0 / (1.0 + (-diff).exp()),
            log_p0: -softplus(diff),
            log_p1: -softplus(-diff),
        })
    }

    pub fn prob(&self, action: usize) -> f64 {
        if action == 0 {
            self.p0
        } else {
            self.p1
        }
    }

    pub fn log_prob(&self, action: usize) -> f64 {
        if action == 0 {
            self.log_p0
        } else {
            self.log_p1
        }
    }

    pub fn probs(&self) -> [f64; 2] {
        [self.p0, self.p1]
    }

    pub fn log_probs(&self) -> [f64; 2] {
        [self.log_p0, self.log_p1]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if rng.random::<f64>() < self.p0 {
            0
        } else {
            1
        }
    }
}

/// `sign(s) (4/pi) |arctan s|^(1/3)`, keeping encodings inside `(-1.4804, 1.4804)`.
pub fn feature_transform(s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s.signum() * (4.0 / PI) * s.atan().abs().cbrt()
}

/// Action distribution from the two P-quadrature readouts.
pub fn policy_distribution(p1: f64, p2: f64, tau: f64) -> Result<ActionDistribution> {
    ActionDistribution::from_scores(p1, p2, tau)
}

/// Number of trainable scalars in the ansatz.
pub fn param_count(params: &PolicyParams) -> usize {
    params.layers.len() * PARAMS_PER_LAYER
}

/// Random initial parameters: phases uniform on `[0, 2 pi)`, active magnitudes
/// normal with standard deviation [`INIT_MAGNITUDE_STD`] and clamped to the
/// gate safety limits.
pub fn init_params<R: Rng + ?Sized>(
    rng: &mut R,
    layers: usize,
    variant: EncodingVariant,
    cfg: &SimConfig,
) -> Result<PolicyParams> {
    if layers < 1 {
        return Err(Error::InvalidConfig("at least one layer is required".into()));
    }
    let normal = Normal::new(0.0, INIT_MAGNITUDE_STD).expect("valid normal");
    let phase = |rng: &mut R| rng.random_range(0.0..2.0 * PI);
    let mut out = Vec::with_capacity(layers);
    for _ in 0..layers {
        let mut lp = LayerParams::default();
        lp.bs1_theta = phase(rng);
        lp.bs1_phi = phase(rng);
        for k in 0..2 {
            lp.disp[k] = normal
                .sample(rng)
                .clamp(-cfg.displacement_limit, cfg.displacement_limit);
        }
        lp.rot1 = [phase(rng), phase(rng)];
        lp.bs2_theta = phase(rng);
        lp.bs2_phi = phase(rng);
        for k in 0..2 {
            lp.squeeze[k] = normal.sample(rng).clamp(-cfg.squeezing_limit, cfg.squeezing_limit);
        }
        lp.rot2 = [phase(rng), phase(rng)];
        lp.kerr = [phase(rng), phase(rng)];
        out.push(lp);
    }
    Ok(PolicyParams {
        layers: out,
        variant,
    })
}

fn require_two_modes(cfg: &SimConfig) -> Result<()> {
    if cfg.modes != 2 {
        return Err(Error::InvalidConfig(format!(
            "the policy circuit needs 2 modes, got {}",
            cfg.modes
        )));
    }
    Ok(())
}

fn encode(state: &FockState, obs: &ObservationPair, cfg: &SimConfig) -> Result<FockState> {
    let mut s = state.clone();
    for (mode, value) in obs.as_array().into_iter().enumerate() {
        let g = displacement_gate(feature_transform(value), ENCODING_PHASE, cfg)?;
        s = apply_gate(&s, &g, Modes::Single(mode))?;
    }
    Ok(s)
}

fn squeezed_vacuum(cfg: &SimConfig) -> Result<FockState> {
    let mut s = FockState::vacuum(*cfg);
    let g = squeezing_gate(INIT_SQUEEZING, 0.0, cfg)?;
    for mode in 0..2 {
        s = apply_gate(&s, &g, Modes::Single(mode))?;
    }
    Ok(s)
}

/// Squeezed two-mode vacuum followed by the observation displacements.
pub fn prepare_input(obs: &ObservationPair, cfg: &SimConfig) -> Result<FockState> {
    require_two_modes(cfg)?;
    encode(&squeezed_vacuum(cfg)?, obs, cfg)
}

/// One variational layer: `BS, D+R per mode, BS, S+R per mode, K per mode`.
pub fn apply_layer(state: &FockState, lp: &LayerParams, cfg: &SimConfig) -> Result<FockState> {
    require_two_modes(cfg)?;
    let pair = Modes::Pair(0, 1);
    let mut s = apply_gate(state, &beamsplitter_gate(lp.bs1_theta, lp.bs1_phi, cfg)?, pair)?;
    for k in 0..2 {
        s = apply_gate(&s, &displacement_gate(lp.disp[k], 0.0, cfg)?, Modes::Single(k))?;
        s = apply_gate(&s, &rotation_gate(lp.rot1[k], cfg), Modes::Single(k))?;
    }
    s = apply_gate(&s, &beamsplitter_gate(lp.bs2_theta, lp.bs2_phi, cfg)?, pair)?;
    for k in 0..2 {
        s = apply_gate(&s, &squeezing_gate(lp.squeeze[k], 0.0, cfg)?, Modes::Single(k))?;
        s = apply_gate(&s, &rotation_gate(lp.rot2[k], cfg), Modes::Single(k))?;
    }
    for k in 0..2 {
        s = apply_gate(&s, &kerr_gate(lp.kerr[k], cfg), Modes::Single(k))?;
    }
    Ok(s)
}

/// Output state of the full circuit, built gate by gate.
pub fn forward_state(obs: &ObservationPair, params: &PolicyParams, cfg: &SimConfig) -> Result<FockState> {
    require_two_modes(cfg)?;
    let mut s = squeezed_vacuum(cfg)?;
    if params.variant == EncodingVariant::SingleEncode {
        s = encode(&s, obs, cfg)?;
    }
    for lp in &params.layers {
        if params.variant == EncodingVariant::Reupload {
            s = encode(&s, obs, cfg)?;
        }
        s = apply_layer(&s, lp, cfg)?;
    }
    Ok(s)
}

/// `(<P_1>, <P_2>)` of the circuit output.
pub fn forward(obs: &ObservationPair, params: &PolicyParams, cfg: &SimConfig) -> Result<(f64, f64)> {
    let s = forward_state(obs, params, cfg)?;
    Ok((
        quadrature_expectation(&s, 0, READOUT_ANGLE)?,
        quadrature_expectation(&s, 1, READOUT_ANGLE)?,
    ))
}
