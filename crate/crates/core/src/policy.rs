//! A common interface over the photonic and classical policies.
//!
//! A policy maps an observation to two scores; the action distribution is the
//! softmax of `scores / tau`. Gradients are pulled back from an upstream
//! `dL/dscores` supplied once the scores are known.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::ClassicalPolicyParams;
use crate::circuit::{
    init_params, CircuitOutput, CompiledCircuit, EncodingVariant, ObservationPair, PolicyParams, ACTIVE_SLOTS,
    PARAMS_PER_LAYER,
};
use crate::error::{Error, Result};
use crate::fock::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "single", alias = "single-encode")]
    SingleEncode,
    #[serde(rename = "reupload")]
    Reupload,
}

impl PolicyKind {
    pub fn variant(self) -> Option<EncodingVariant> {
        match self {
            PolicyKind::Classical => None,
            PolicyKind::SingleEncode => Some(EncodingVariant::SingleEncode),
            PolicyKind::Reupload => Some(EncodingVariant::Reupload),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Classical => "classical",
            PolicyKind::SingleEncode => "single",
            PolicyKind::Reupload => "reupload",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(PolicyKind::Classical),
            other => Ok(match other.parse::<EncodingVariant>() {
                Ok(EncodingVariant::SingleEncode) => PolicyKind::SingleEncode,
                Ok(EncodingVariant::Reupload) => PolicyKind::Reupload,
                Err(_) => return Err(Error::Parse(format!("unknown policy kind {other:?}"))),
            }),
        }
    }
}

/// Scores and, for the photonic policy, the squared norm of the output state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEval {
    pub scores: [f64; 2],
    pub norm_sqr: Option<f64>,
}

pub trait Policy: Send + Sync {
    fn kind(&self) -> PolicyKind;
    fn num_params(&self) -> usize;
    fn flat_params(&self) -> Vec<f64>;
    fn set_flat_params(&mut self, v: &[f64]) -> Result<()>;
    fn evaluate(&self, obs: &ObservationPair) -> Result<PolicyEval>;
    /// Evaluation plus the gradient of `upstream(eval) . scores` in flat order.
    fn evaluate_with_gradient(
        &self,
        obs: &ObservationPair,
        upstream: &mut dyn FnMut(&PolicyEval) -> Result<[f64; 2]>,
    ) -> Result<(PolicyEval, Vec<f64>)>;
    /// Sum of squares of the active-gate magnitudes; zero for policies without any.
    fn l2_active(&self) -> f64;
    fn l2_active_gradient(&self) -> Vec<f64>;
    fn to_checkpoint(&self) -> String;
}

/// The photonic circuit; `<P_1>, <P_2>` are the scores.
#[derive(Debug, Clone)]
pub struct QuantumPolicy {
    params: PolicyParams,
    compiled: CompiledCircuit,
}

impl QuantumPolicy {
    pub fn new(params: PolicyParams, cfg: &SimConfig) -> Result<Self> {
        let compiled = CompiledCircuit::new(&params, cfg)?;
        Ok(QuantumPolicy { params, compiled })
    }

    pub fn init<R: Rng + ?Sized>(rng: &mut R, layers: usize, variant: EncodingVariant, cfg: &SimConfig) -> Result<Self> {
        Self::new(init_params(rng, layers, variant, cfg)?, cfg)
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn config(&self) -> &SimConfig {
        self.compiled.config()
    }
}

fn quantum_eval(out: &CircuitOutput) -> PolicyEval {
    PolicyEval {
        scores: out.quadratures,
        norm_sqr: Some(out.norm_sqr),
    }
}

/// Sum of squares of the in-layer displacement and squeezing magnitudes.
pub fn l2_active(params: &PolicyParams) -> f64 {
    params
        .layers
        .iter()
        .map(|l| l.disp.iter().chain(&l.squeeze).map(|x| x * x).sum::<f64>())
        .sum()
}

impl Policy for QuantumPolicy {
    fn kind(&self) -> PolicyKind {
        match self.params.variant {
            EncodingVariant::SingleEncode => PolicyKind::SingleEncode,
            EncodingVariant::Reupload => PolicyKind::Reupload,
        }
    }

    fn num_params(&self) -> usize {
        self.compiled.num_params()
    }

    fn flat_params(&self) -> Vec<f64> {
        self.params.to_flat()
    }

    fn set_flat_params(&mut self, v: &[f64]) -> Result<()> {
        let mut params = self.params.clone();
        params.set_flat(v)?;
        let compiled = CompiledCircuit::new(&params, self.compiled.config())?;
        self.params = params;
        self.compiled = compiled;
        Ok(())
    }

    fn evaluate(&self, obs: &ObservationPair) -> Result<PolicyEval> {
        Ok(quantum_eval(&self.compiled.evaluate(obs)?))
    }

    fn evaluate_with_gradient(
        &self,
        obs: &ObservationPair,
        upstream: &mut dyn FnMut(&PolicyEval) -> Result<[f64; 2]>,
    ) -> Result<(PolicyEval, Vec<f64>)> {
        let (out, grad) = self.compiled.evaluate_with_gradient(obs, |o| upstream(&quantum_eval(o)))?;
        Ok((quantum_eval(&out), grad))
    }

    fn l2_active(&self) -> f64 {
        l2_active(&self.params)
    }

    fn l2_active_gradient(&self) -> Vec<f64> {
        let flat = self.params.to_flat();
        let mut g = vec![0.0; flat.len()];
        for layer in 0..self.params.layers.len() {
            for slot in ACTIVE_SLOTS {
                let i = layer * PARAMS_PER_LAYER + slot;
                g[i] = 2.0 * flat[i];
            }
        }
        g
    }

    fn to_checkpoint(&self) -> String {
        self.params.to_checkpoint()
    }
}

/// The 2-8-2 network; its logits are the scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPolicy {
    pub params: ClassicalPolicyParams,
}

impl ClassicalPolicy {
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        ClassicalPolicy {
            params: ClassicalPolicyParams::init(rng),
        }
    }
}

impl Policy for ClassicalPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Classical
    }

    fn num_params(&self) -> usize {
        self.params.num_params()
    }

    fn flat_params(&self) -> Vec<f64> {
        self.params.to_flat()
    }

    fn set_flat_params(&mut self, v: &[f64]) -> Result<()> {
        self.params.set_flat(v)
    }

    fn evaluate(&self, obs: &ObservationPair) -> Result<PolicyEval> {
        Ok(PolicyEval {
            scores: self.params.logits(obs),
            norm_sqr: None,
        })
    }

    fn evaluate_with_gradient(
        &self,
        obs: &ObservationPair,
        upstream: &mut dyn FnMut(&PolicyEval) -> Result<[f64; 2]>,
    ) -> Result<(PolicyEval, Vec<f64>)> {
        let eval = self.evaluate(obs)?;
        let up = upstream(&eval)?;
        let (_, grad) = self.params.logits_with_gradient(obs, up);
        Ok((eval, grad))
    }

    fn l2_active(&self) -> f64 {
        0.0
    }

    fn l2_active_gradient(&self) -> Vec<f64> {
        vec![0.0; self.num_params()]
    }

    fn to_checkpoint(&self) -> String {
        self.params.to_checkpoint()
    }
}

/// A freshly initialized policy of the requested kind.
pub fn init_policy<R: Rng + ?Sized>(
    kind: PolicyKind,
    rng: &mut R,
    layers: usize,
    cfg: &SimConfig,
) -> Result<Box<dyn Policy>> {
    Ok(match kind.variant() {
        None => Box::new(ClassicalPolicy::init(rng)),
        Some(variant) => Box::new(QuantumPolicy::init(rng, layers, variant, cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{forward, LayerParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kinds_parse() {
        for k in [PolicyKind::Classical, PolicyKind::SingleEncode, PolicyKind::Reupload] {
            assert_eq!(k.to_string().parse::<PolicyKind>().unwrap(), k);
        }
        assert_eq!("single-encode".parse::<PolicyKind>().unwrap(), PolicyKind::SingleEncode);
        assert!("quantum".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn l2_examples() {
        let mut p = PolicyParams::zeros(3, EncodingVariant::Reupload);
        assert_eq!(l2_active(&p), 0.0);
        p.layers[1].disp[0] = 0.5;
        assert_eq!(l2_active(&p), 0.25);
        for l in &mut p.layers {
            *l = LayerParams {
                disp: [0.1; 2],
                squeeze: [0.1; 2],
                bs1_theta: 3.0,
                kerr: [2.0; 2],
                rot1: [1.0; 2],
                ..LayerParams::default()
            };
        }
        assert!((l2_active(&p) - 0.12).abs() < 1e-15);
    }

    #[test]
    fn quantum_policy_matches_forward_and_tracks_updates() {
        let cfg = SimConfig::new(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pol = QuantumPolicy::init(&mut rng, 2, EncodingVariant::SingleEncode, &cfg).unwrap();
        let obs = ObservationPair::new(0.04, -0.3);
        let e = pol.evaluate(&obs).unwrap();
        let (p1, p2) = forward(&obs, pol.params(), &cfg).unwrap();
        assert!((e.scores[0] - p1).abs() < 1e-12 && (e.scores[1] - p2).abs() < 1e-12);
        let mut flat = pol.flat_params();
        flat[2] = 0.3;
        pol.set_flat_params(&flat).unwrap();
        let (p1, _) = forward(&obs, pol.params(), &cfg).unwrap();
        assert!((pol.evaluate(&obs).unwrap().scores[0] - p1).abs() < 1e-12);
        let g = pol.l2_active_gradient();
        assert_eq!(g[2], 0.6);
        for (i, (gi, xi)) in g.iter().zip(&flat).enumerate() {
            let active = ACTIVE_SLOTS.contains(&(i % PARAMS_PER_LAYER));
            assert_eq!(*gi, if active { 2.0 * xi } else { 0.0 });
        }
    }

    #[test]
    fn rejected_update_leaves_policy_intact() {
        let cfg = SimConfig::new(2, 8).unwrap();
        let mut pol = QuantumPolicy::new(PolicyParams::zeros(1, EncodingVariant::Reupload), &cfg).unwrap();
        let mut flat = pol.flat_params();
        flat[2] = 100.0;
        assert!(pol.set_flat_params(&flat).unwrap_err().is_numerical());
        assert_eq!(pol.flat_params()[2], 0.0);
    }

    #[test]
    fn classical_policy_has_no_active_gates() {
        let pol = ClassicalPolicy::init(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(pol.num_params(), 42);
        assert_eq!(pol.l2_active(), 0.0);
        assert!(pol.evaluate(&ObservationPair::default()).unwrap().norm_sqr.is_none());
    }
}
