//! Precompiled policy circuit with adjoint-mode gradients.
//!
//! Trainable gates depend only on the parameters, so they are synthesized once
//! per parameter vector together with their parameter derivatives. Encoding
//! displacements depend on the observation and are built per call.
//!
//! For a readout `f = <psi|O|psi> / <psi|psi>` the derivative with respect to a
//! parameter of gate `U_j` is `2 Re <lambda_j, dU_j psi_{j-1}>`, where
//! `lambda = (O - f) psi / <psi|psi>` is pulled back through `U_K^dagger ..
//! U_{j+1}^dagger`. The conjugate transpose is the exact adjoint of the
//! truncated (non-unitary) gate, so no unitarity is assumed.

use num_complex::Complex64;

use super::params::{EncodingVariant, PolicyParams, PARAMS_PER_LAYER};
use super::{feature_transform, ObservationPair, ENCODING_PHASE, INIT_SQUEEZING, READOUT_ANGLE};
use crate::error::{Error, Result};
use crate::fock::{
    apply_matrix, beamsplitter_with_derivatives, displacement_gate, displacement_with_derivative,
    quadrature_apply, squeezing_gate, squeezing_with_derivative, CMatrix, FockState, Modes,
    SimConfig, Transpose,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone)]
enum LinearOp {
    Dense { m: CMatrix, mode: usize },
    Diagonal { d: Vec<Complex64>, mode: usize },
    /// Two-mode operator on the whole two-mode space as `(row, col, value)`.
    Sparse { entries: Vec<(usize, usize, Complex64)> },
}

impl LinearOp {
    fn sparse_from(m: &CMatrix) -> Self {
        let entries = m
            .indexed_iter()
            .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
            .map(|((i, j), z)| (i, j, *z))
            .collect();
        LinearOp::Sparse { entries }
    }

    fn apply(&self, v: &[Complex64], cfg: &SimConfig, t: Transpose) -> Vec<Complex64> {
        match self {
            LinearOp::Dense { m, mode } => apply_matrix(v, m, Modes::Single(*mode), cfg, t),
            LinearOp::Diagonal { d, mode } => {
                let c = cfg.cutoff;
                let stride = if *mode == 0 { c } else { 1 };
                v.iter()
                    .enumerate()
                    .map(|(i, z)| {
                        let x = d[(i / stride) % c];
                        z * if t == Transpose::Adjoint { x.conj() } else { x }
                    })
                    .collect()
            }
            LinearOp::Sparse { entries } => {
                let mut out = vec![ZERO; v.len()];
                for &(i, j, z) in entries {
                    match t {
                        Transpose::None => out[i] += z * v[j],
                        Transpose::Adjoint => out[j] += z.conj() * v[i],
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Step {
    op: LinearOp,
    /// `(flat parameter index, dU/dtheta)`.
    partials: Vec<(usize, LinearOp)>,
}

/// Readout of one circuit evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitOutput {
    /// `(<P_1>, <P_2>)`, normalized by the state's squared norm.
    pub quadratures: [f64; 2],
    /// Squared norm of the output state before normalization.
    pub norm_sqr: f64,
}

/// Circuit with all parameter-dependent gates synthesized.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    cfg: SimConfig,
    variant: EncodingVariant,
    initial: Vec<Complex64>,
    layers: Vec<Vec<Step>>,
    num_params: usize,
}

impl CompiledCircuit {
    pub fn new(params: &PolicyParams, cfg: &SimConfig) -> Result<Self> {
        if cfg.modes != 2 {
            return Err(Error::InvalidConfig(format!(
                "the policy circuit needs 2 modes, got {}",
                cfg.modes
            )));
        }
        let sq = squeezing_gate(INIT_SQUEEZING, 0.0, cfg)?.entries;
        let mut initial = FockState::vacuum(*cfg).into_amplitudes();
        for mode in 0..2 {
            initial = apply_matrix(&initial, &sq, Modes::Single(mode), cfg, Transpose::None);
        }

        let d = cfg.cutoff;
        let number: Vec<f64> = (0..d).map(|n| n as f64).collect();
        let mut layers = Vec::with_capacity(params.layers.len());
        for (l, lp) in params.layers.iter().enumerate() {
            let base = l * PARAMS_PER_LAYER;
            let mut steps = Vec::with_capacity(11);

            let beamsplitter = |theta: f64, phi: f64, at: usize| -> Result<Step> {
                let (g, [dt, dp]) = beamsplitter_with_derivatives(theta, phi, cfg)?;
                Ok(Step {
                    op: LinearOp::sparse_from(&g.entries),
                    partials: vec![(at, LinearOp::sparse_from(&dt)), (at + 1, LinearOp::sparse_from(&dp))],
                })
            };
            let rotation = |phi: f64, mode: usize, at: usize| -> Step {
                let u: Vec<Complex64> = number.iter().map(|n| Complex64::from_polar(1.0, phi * n)).collect();
                let du = u.iter().zip(&number).map(|(z, n)| I * n * z).collect();
                Step {
                    op: LinearOp::Diagonal { d: u, mode },
                    partials: vec![(at, LinearOp::Diagonal { d: du, mode })],
                }
            };

            steps.push(beamsplitter(lp.bs1_theta, lp.bs1_phi, base)?);
            for k in 0..2 {
                let (g, dg) = displacement_with_derivative(lp.disp[k], 0.0, cfg)?;
                steps.push(Step {
                    op: LinearOp::Dense { m: g.entries, mode: k },
                    partials: vec![(base + 2 + k, LinearOp::Dense { m: dg, mode: k })],
                });
                steps.push(rotation(lp.rot1[k], k, base + 4 + k));
            }
            steps.push(beamsplitter(lp.bs2_theta, lp.bs2_phi, base + 6)?);
            for k in 0..2 {
                let (g, dg) = squeezing_with_derivative(lp.squeeze[k], 0.0, cfg)?;
                steps.push(Step {
                    op: LinearOp::Dense { m: g.entries, mode: k },
                    partials: vec![(base + 8 + k, LinearOp::Dense { m: dg, mode: k })],
                });
                steps.push(rotation(lp.rot2[k], k, base + 10 + k));
            }
            for k in 0..2 {
                let u: Vec<Complex64> = number
                    .iter()
                    .map(|n| Complex64::from_polar(1.0, lp.kerr[k] * n * n))
                    .collect();
                let du = u.iter().zip(&number).map(|(z, n)| I * n * n * z).collect();
                steps.push(Step {
                    op: LinearOp::Diagonal { d: u, mode: k },
                    partials: vec![(base + 12 + k, LinearOp::Diagonal { d: du, mode: k })],
                });
            }
            layers.push(steps);
        }
        Ok(CompiledCircuit {
            cfg: *cfg,
            variant: params.variant,
            initial,
            layers,
            num_params: params.layers.len() * PARAMS_PER_LAYER,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    fn encoding_steps(&self, obs: &ObservationPair) -> Result<[Step; 2]> {
        let make = |mode: usize, value: f64| -> Result<Step> {
            let g = displacement_gate(feature_transform(value), ENCODING_PHASE, &self.cfg)?;
            Ok(Step {
                op: LinearOp::Dense { m: g.entries, mode },
                partials: Vec::new(),
            })
        };
        Ok([make(0, obs.pole_angle)?, make(1, obs.angular_velocity)?])
    }

    fn sequence<'a>(&'a self, enc: &'a [Step; 2]) -> Vec<&'a Step> {
        let mut seq = Vec::new();
        if self.variant == EncodingVariant::SingleEncode {
            seq.extend(enc.iter());
        }
        for layer in &self.layers {
            if self.variant == EncodingVariant::Reupload {
                seq.extend(enc.iter());
            }
            seq.extend(layer.iter());
        }
        seq
    }

    fn readout(&self, psi: &[Complex64]) -> Result<(CircuitOutput, [Vec<Complex64>; 2])> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NumericalDegeneracy(format!("output state has squared norm {norm}")));
        }
        let o0 = quadrature_apply(psi, 0, READOUT_ANGLE, &self.cfg);
        let o1 = quadrature_apply(psi, 1, READOUT_ANGLE, &self.cfg);
        let expect = |o: &[Complex64]| -> f64 {
            psi.iter().zip(o).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / norm
        };
        let out = CircuitOutput {
            quadratures: [expect(&o0), expect(&o1)],
            norm_sqr: norm,
        };
        Ok((out, [o0, o1]))
    }

    /// Output state amplitudes for one observation.
    pub fn output_state(&self, obs: &ObservationPair) -> Result<FockState> {
        let enc = self.encoding_steps(obs)?;
        let mut psi = self.initial.clone();
        for step in self.sequence(&enc) {
            psi = step.op.apply(&psi, &self.cfg, Transpose::None);
        }
        FockState::from_amplitudes(self.cfg, psi)
    }

    pub fn evaluate(&self, obs: &ObservationPair) -> Result<CircuitOutput> {
        let state = self.output_state(obs)?;
        Ok(self.readout(state.amplitudes())?.0)
    }

    /// Evaluates the circuit, asks `upstream` for `dL/d<P_k>` given the output,
    /// and returns the output together with `dL/dtheta`.
    pub fn evaluate_with_gradient<F>(&self, obs: &ObservationPair, upstream: F) -> Result<(CircuitOutput, Vec<f64>)>
    where
        F: FnOnce(&CircuitOutput) -> Result<[f64; 2]>,
    {
        let enc = self.encoding_steps(obs)?;
        let seq = self.sequence(&enc);
        let mut tape = Vec::with_capacity(seq.len() + 1);
        tape.push(self.initial.clone());
        for step in &seq {
            let next = step.op.apply(tape.last().expect("tape is never empty"), &self.cfg, Transpose::None);
            tape.push(next);
        }
        let psi = tape.last().expect("tape is never empty");
        let (out, obs_applied) = self.readout(psi)?;
        let g = upstream(&out)?;

        let mut lambda: Vec<Complex64> = psi
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += (obs_applied[k][i] - z * out.quadratures[k]) * g[k];
                }
                acc / out.norm_sqr
            })
            .collect();

        let mut grad = vec![0.0; self.num_params];
        for (j, step) in seq.iter().enumerate().rev() {
            let before = &tape[j];
            for (idx, dop) in &step.partials {
                let dpsi = dop.apply(before, &self.cfg, Transpose::None);
                let inner: f64 = lambda.iter().zip(&dpsi).map(|(l, d)| (l.conj() * d).re).sum();
                grad[*idx] += 2.0 * inner;
            }
            if j > 0 {
                lambda = step.op.apply(&lambda, &self.cfg, Transpose::Adjoint);
            }
        }
        Ok((out, grad))
    }
}
