use ndarray::Zip;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::network::{DenseLayer, DenseNetwork, Gradients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamParams {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Bias-corrected Adam moments for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    params: AdamParams,
    step: u64,
    first: Vec<DenseLayer>,
    second: Vec<DenseLayer>,
}

impl Adam {
    pub fn new(net: &DenseNetwork, params: AdamParams) -> Self {
        let zeros: Vec<DenseLayer> = net
            .layers()
            .iter()
            .map(|l| DenseLayer::zeros(l.weights.nrows(), l.weights.ncols()))
            .collect();
        Self {
            params,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    pub fn params(&self) -> &AdamParams {
        &self.params
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one descent step. Rejects non-finite gradients before touching
    /// any state.
    pub fn step(&mut self, net: &mut DenseNetwork, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != self.first.len() {
            return Err(Error::DimensionMismatch {
                expected: self.first.len(),
                actual: grads.layers.len(),
            });
        }
        if !grads.is_finite() {
            return Err(Error::NonFinite("gradient"));
        }
        self.step += 1;
        let AdamParams {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.params;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };
        for (((layer, g), m), v) in net
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            Zip::from(&mut layer.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&g.weights)
                .for_each(update);
            Zip::from(&mut layer.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&g.bias)
                .for_each(update);
        }
        Ok(())
    }
}
