//! Weighted Łukasiewicz conjunction neuron.
//!
//! `f(x) = clamp(β − Σ w_k (1 − x_k), 0, 1)` with `w_k, β ≥ 0`. Truth values
//! in `[α, 1]` read as logical high and `[0, 1 − α]` as logical low; a neuron
//! behaves as AND when its corner outputs respect that split, which
//! [`ConjunctionNeuron::check_constraints`] measures.
//!
//! ```
//! use neurorule::lnn::ConjunctionNeuron;
//!
//! let and = ConjunctionNeuron::with_params(vec![0.5, 0.5], 1.0, 0.95).unwrap();
//! let y = and.forward(&[0.8, 0.6]).unwrap();
//! assert!((y - 0.7).abs() < 1e-12);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.95;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjunctionNeuron {
    weights: Vec<f64>,
    bias: f64,
    alpha: f64,
}

/// Partial derivatives of the neuron output, scaled by an upstream factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub bias: f64,
    pub weights: Vec<f64>,
    pub inputs: Vec<f64>,
}

impl Gradient {
    pub fn zeros(n: usize) -> Gradient {
        Gradient {
            bias: 0.0,
            weights: vec![0.0; n],
            inputs: vec![0.0; n],
        }
    }

    /// `self += other`.
    pub fn accumulate(&mut self, other: &Gradient) {
        self.bias += other.bias;
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.inputs.iter_mut().zip(&other.inputs) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.bias *= factor;
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self.inputs.iter_mut().for_each(|x| *x *= factor);
    }
}

impl ConjunctionNeuron {
    /// Classical AND over `n` inputs: all weights and the bias at 1.
    pub fn new(n_inputs: usize) -> ConjunctionNeuron {
        ConjunctionNeuron {
            weights: vec![1.0; n_inputs],
            bias: 1.0,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn with_params(weights: Vec<f64>, bias: f64, alpha: f64) -> Result<ConjunctionNeuron> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::InvalidNeuron(format!("alpha {alpha} outside (0.5, 1]")));
        }
        if !(bias.is_finite() && bias >= 0.0) {
            return Err(Error::InvalidNeuron(format!("bias {bias} must be finite and >= 0")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidNeuron(format!("weight {w} must be finite and >= 0")));
        }
        Ok(ConjunctionNeuron {
            weights,
            bias,
            alpha,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `β − Σ w_k (1 − x_k)` before clamping.
    pub fn pre_activation(&self, x: &[f64]) -> Result<f64> {
        self.check_dims(x)?;
        Ok(self.affine(x))
    }

    fn affine(&self, x: &[f64]) -> f64 {
        self.bias
            - self
                .weights
                .iter()
                .zip(x)
                .map(|(w, xi)| w * (1.0 - xi))
                .sum::<f64>()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(self.pre_activation(x)?.clamp(0.0, 1.0))
    }

    /// Gradient of the output times `upstream`. Zero wherever the output is
    /// clamped at 0 or 1.
    pub fn grad(&self, x: &[f64], upstream: f64) -> Result<Gradient> {
        self.check_dims(x)?;
        let z = self.affine(x);
        if z <= 0.0 || z >= 1.0 {
            return Ok(Gradient::zeros(x.len()));
        }
        Ok(self.affine_grad(x, upstream))
    }

    /// Gradient of [`pre_activation`](Self::pre_activation) times `upstream`,
    /// ignoring the clamp.
    pub fn pre_activation_grad(&self, x: &[f64], upstream: f64) -> Result<Gradient> {
        self.check_dims(x)?;
        Ok(self.affine_grad(x, upstream))
    }

    fn affine_grad(&self, x: &[f64], upstream: f64) -> Gradient {
        Gradient {
            bias: upstream,
            weights: x.iter().map(|xi| -(1.0 - xi) * upstream).collect(),
            inputs: self.weights.iter().map(|w| w * upstream).collect(),
        }
    }

    /// Corner inputs at which the truth-table constraints are evaluated:
    /// all inputs at `α`, then each input alone at `1 − α` with the rest at
    /// 1, then all inputs at `1 − α`.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.n_inputs();
        let (hi, lo) = (self.alpha, 1.0 - self.alpha);
        let mut out = vec![vec![hi; n]];
        for k in 0..n {
            let mut c = vec![1.0; n];
            c[k] = lo;
            out.push(c);
        }
        if n > 0 {
            out.push(vec![lo; n]);
        }
        out
    }

    /// Hinge residuals of the AND truth table, in [`corners`] order: the
    /// all-high corner must output at least `α`, every other corner at most
    /// `1 − α`. All zeros means the neuron is a valid conjunction.
    ///
    /// [`corners`]: ConjunctionNeuron::corners
    pub fn check_constraints(&self) -> Vec<f64> {
        let lo = 1.0 - self.alpha;
        self.corners()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let f = self.affine(c).clamp(0.0, 1.0);
                if i == 0 {
                    (self.alpha - f).max(0.0)
                } else {
                    (f - lo).max(0.0)
                }
            })
            .collect()
    }

    /// Gradient of `Σ r²` over the constraint residuals with respect to
    /// `(β, w)`. Each residual is differentiated through the unclamped affine
    /// form so a saturated violation still gets pushed back.
    pub fn constraint_gradient(&self) -> (f64, Vec<f64>) {
        let residuals = self.check_constraints();
        let mut d_bias = 0.0;
        let mut d_w = vec![0.0; self.n_inputs()];
        for (i, (corner, r)) in self.corners().iter().zip(&residuals).enumerate() {
            if *r == 0.0 {
                continue;
            }
            // r = α − f for the high corner, f − (1 − α) otherwise.
            let sign = if i == 0 { -1.0 } else { 1.0 };
            d_bias += 2.0 * r * sign;
            for (k, x) in corner.iter().enumerate() {
                d_w[k] += 2.0 * r * sign * -(1.0 - x);
            }
        }
        (d_bias, d_w)
    }

    /// One projected gradient step on `task loss + λ Σ r²`, where `grads`
    /// holds the task-loss gradient. Weights and bias are clipped at 0.
    pub fn update(&mut self, grads: &Gradient, learning_rate: f64, lambda: f64) -> Result<()> {
        if !(learning_rate > 0.0) {
            return Err(Error::InvalidNeuron(format!(
                "learning rate {learning_rate} must be positive"
            )));
        }
        if grads.weights.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: grads.weights.len(),
            });
        }
        let (pb, pw) = if lambda > 0.0 {
            self.constraint_gradient()
        } else {
            (0.0, vec![0.0; self.n_inputs()])
        };
        self.bias = (self.bias - learning_rate * (grads.bias + lambda * pb)).max(0.0);
        for ((w, g), p) in self.weights.iter_mut().zip(&grads.weights).zip(&pw) {
            *w = (*w - learning_rate * (g + lambda * p)).max(0.0);
        }
        Ok(())
    }

    /// Overwrites parameters, projecting onto `w, β ≥ 0`.
    pub fn set_params(&mut self, weights: Vec<f64>, bias: f64) -> Result<()> {
        if weights.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs(),
                got: weights.len(),
            });
        }
        self.weights = weights.into_iter().map(|w| w.max(0.0)).collect();
        self.bias = bias.max(0.0);
        Ok(())
    }
}
