//! Adam with bias correction, operating on the network's flat parameter
//! vector.

use super::mlp::{Gradients, Mlp};
use super::FieldError;

pub const DEFAULT_LR: f64 = 5e-5;
pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64, param_count: usize) -> Self {
        Adam {
            lr,
            beta1: BETA1,
            beta2: BETA2,
            eps: EPSILON,
            t: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update. Gradients are checked for finiteness layer by layer
    /// before any state changes.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) -> Result<(), FieldError> {
        for (l, w) in grads.weights.iter().enumerate() {
            if w.data().iter().any(|v| !v.is_finite()) {
                return Err(FieldError::NonFiniteGradient { layer: l, which: "weights" });
            }
        }
        for (l, b) in grads.biases.iter().enumerate() {
            if b.iter().any(|v| !v.is_finite()) {
                return Err(FieldError::NonFiniteGradient { layer: l, which: "biases" });
            }
        }
        let g = grads.flat();
        if g.len() != self.m.len() {
            return Err(FieldError::Shape(format!(
                "{} gradient entries for {} optimizer slots",
                g.len(),
                self.m.len()
            )));
        }
        let mut params = mlp.params_flat();
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..g.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        mlp.set_params_flat(&params)
    }
}
