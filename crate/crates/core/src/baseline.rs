//! Classical comparison networks: a 2-8-2 policy and the 2-8-1 critic.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::checkpoint::{self, NamedValues};
use crate::circuit::{ActionDistribution, ObservationPair};
use crate::error::{Error, Result};

pub const HIDDEN: usize = 8;
pub const CLASSICAL_PARAM_COUNT: usize = 2 * HIDDEN + HIDDEN + HIDDEN * 2 + 2;
pub const VALUE_PARAM_COUNT: usize = 2 * HIDDEN + HIDDEN + HIDDEN;

/// Weights ~ N(0, 1/fan_in), biases zero.
fn init_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, fan_in: usize) -> Array2<f64> {
    let normal = Normal::new(0.0, 1.0 / (fan_in as f64).sqrt()).expect("valid normal");
    Array2::from_shape_fn((rows, cols), |_| normal.sample(rng))
}

fn matrix_names(prefix: &str, rows: usize, cols: usize) -> impl Iterator<Item = String> + '_ {
    (0..rows).flat_map(move |i| (0..cols).map(move |j| format!("{prefix}.{i}.{j}")))
}

fn vector_names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}.{i}"))
}

fn take_matrix(values: &mut std::slice::Iter<'_, f64>, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| *values.next().expect("length checked"))
}

fn take_vector(values: &mut std::slice::Iter<'_, f64>, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| *values.next().expect("length checked"))
}

fn check_len(v: &[f64], want: usize) -> Result<()> {
    if v.len() != want {
        return Err(Error::Shape(format!("expected {want} parameters, got {}", v.len())));
    }
    Ok(())
}

fn hidden_layer(obs: &ObservationPair, w_in: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let x = Array1::from(obs.as_array().to_vec());
    (w_in.dot(&x) + b).mapv(f64::tanh)
}

/// Classical policy network `2 -> 8 (tanh) -> 2 -> softmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPolicyParams {
    /// `HIDDEN x 2`, so `hidden = w_in . obs`.
    pub w_in: Array2<f64>,
    pub b_hidden: Array1<f64>,
    /// `2 x HIDDEN`.
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
}

impl ClassicalPolicyParams {
    pub fn zeros() -> Self {
        ClassicalPolicyParams {
            w_in: Array2::zeros((HIDDEN, 2)),
            b_hidden: Array1::zeros(HIDDEN),
            w_out: Array2::zeros((2, HIDDEN)),
            b_out: Array1::zeros(2),
        }
    }

    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        ClassicalPolicyParams {
            w_in: init_matrix(rng, HIDDEN, 2, 2),
            b_hidden: Array1::zeros(HIDDEN),
            w_out: init_matrix(rng, 2, HIDDEN, HIDDEN),
            b_out: Array1::zeros(2),
        }
    }

    pub fn num_params(&self) -> usize {
        self.w_in.len() + self.b_hidden.len() + self.w_out.len() + self.b_out.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.w_in
            .iter()
            .chain(&self.b_hidden)
            .chain(&self.w_out)
            .chain(&self.b_out)
            .copied()
            .collect()
    }

    pub fn set_flat(&mut self, v: &[f64]) -> Result<()> {
        check_len(v, CLASSICAL_PARAM_COUNT)?;
        let mut it = v.iter();
        self.w_in = take_matrix(&mut it, HIDDEN, 2);
        self.b_hidden = take_vector(&mut it, HIDDEN);
        self.w_out = take_matrix(&mut it, 2, HIDDEN);
        self.b_out = take_vector(&mut it, 2);
        Ok(())
    }

    pub fn names() -> Vec<String> {
        matrix_names("w_in", HIDDEN, 2)
            .chain(vector_names("b_hidden", HIDDEN))
            .chain(matrix_names("w_out", 2, HIDDEN))
            .chain(vector_names("b_out", 2))
            .collect()
    }

    pub fn to_named(&self) -> NamedValues {
        Self::names().into_iter().zip(self.to_flat()).collect()
    }

    pub fn to_checkpoint(&self) -> String {
        checkpoint::format("classical policy 2-8-2", &self.to_named())
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let values = checkpoint::lookup_all(&checkpoint::parse(text)?, &Self::names())?;
        let mut p = Self::zeros();
        p.set_flat(&values)?;
        Ok(p)
    }

    /// Output logits `w_out . tanh(w_in . obs + b_hidden) + b_out`.
    pub fn logits(&self, obs: &ObservationPair) -> [f64; 2] {
        let h = hidden_layer(obs, &self.w_in, &self.b_hidden);
        let l = self.w_out.dot(&h) + &self.b_out;
        [l[0], l[1]]
    }

    /// Logits and the flat gradient of `upstream . logits`.
    pub fn logits_with_gradient(&self, obs: &ObservationPair, upstream: [f64; 2]) -> ([f64; 2], Vec<f64>) {
        let x = obs.as_array();
        let h = hidden_layer(obs, &self.w_in, &self.b_hidden);
        let l = self.w_out.dot(&h) + &self.b_out;
        let g_out = Array1::from(upstream.to_vec());
        // d/dh of upstream . logits, then through tanh
        let g_pre = self.w_out.t().dot(&g_out) * h.mapv(|v| 1.0 - v * v);
        let mut grad = Vec::with_capacity(CLASSICAL_PARAM_COUNT);
        for i in 0..HIDDEN {
            grad.extend(x.iter().map(|xj| g_pre[i] * xj));
        }
        grad.extend(g_pre.iter());
        for k in 0..2 {
            grad.extend(h.iter().map(|hj| g_out[k] * hj));
        }
        grad.extend(g_out.iter());
        ([l[0], l[1]], grad)
    }
}

/// Action distribution of the classical policy: softmax of `logits / tau`.
pub fn classical_forward(obs: &ObservationPair, params: &ClassicalPolicyParams, tau: f64) -> Result<ActionDistribution> {
    let [l0, l1] = params.logits(obs);
    ActionDistribution::from_scores(l0, l1, tau)
}

/// Critic `2 -> 8 (tanh) -> 1` with no output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueNetParams {
    pub w_in: Array2<f64>,
    pub b_hidden: Array1<f64>,
    pub w_out: Array1<f64>,
}

impl ValueNetParams {
    pub fn zeros() -> Self {
        ValueNetParams {
            w_in: Array2::zeros((HIDDEN, 2)),
            b_hidden: Array1::zeros(HIDDEN),
            w_out: Array1::zeros(HIDDEN),
        }
    }

    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let w_in = init_matrix(rng, HIDDEN, 2, 2);
        let w_out = init_matrix(rng, 1, HIDDEN, HIDDEN).row(0).to_owned();
        ValueNetParams {
            w_in,
            b_hidden: Array1::zeros(HIDDEN),
            w_out,
        }
    }

    pub fn num_params(&self) -> usize {
        self.w_in.len() + self.b_hidden.len() + self.w_out.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.w_in.iter().chain(&self.b_hidden).chain(&self.w_out).copied().collect()
    }

    pub fn set_flat(&mut self, v: &[f64]) -> Result<()> {
        check_len(v, VALUE_PARAM_COUNT)?;
        let mut it = v.iter();
        self.w_in = take_matrix(&mut it, HIDDEN, 2);
        self.b_hidden = take_vector(&mut it, HIDDEN);
        self.w_out = take_vector(&mut it, HIDDEN);
        Ok(())
    }

    pub fn names() -> Vec<String> {
        matrix_names("w_in", HIDDEN, 2)
            .chain(vector_names("b_hidden", HIDDEN))
            .chain(vector_names("w_out", HIDDEN))
            .collect()
    }

    pub fn to_checkpoint(&self) -> String {
        let named: NamedValues = Self::names().into_iter().zip(self.to_flat()).collect();
        checkpoint::format("value network 2-8-1", &named)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let values = checkpoint::lookup_all(&checkpoint::parse(text)?, &Self::names())?;
        let mut p = Self::zeros();
        p.set_flat(&values)?;
        Ok(p)
    }

    /// Value and the flat gradient of `V(obs)`.
    pub fn value_with_gradient(&self, obs: &ObservationPair) -> (f64, Vec<f64>) {
        let x = obs.as_array();
        let h = hidden_layer(obs, &self.w_in, &self.b_hidden);
        let g_pre = &self.w_out * &h.mapv(|v| 1.0 - v * v);
        let mut grad = Vec::with_capacity(VALUE_PARAM_COUNT);
        for i in 0..HIDDEN {
            grad.extend(x.iter().map(|xj| g_pre[i] * xj));
        }
        grad.extend(g_pre.iter());
        grad.extend(h.iter());
        (self.w_out.dot(&h), grad)
    }
}

pub fn value_forward(obs: &ObservationPair, vparams: &ValueNetParams) -> f64 {
    vparams.w_out.dot(&hidden_layer(obs, &vparams.w_in, &vparams.b_hidden))
}
