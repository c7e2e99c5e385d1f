//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use super::{Gradients, Network};
use crate::error::{Error, Result};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Per-parameter moment estimates for one [`Network`].
///
/// The update is deterministic: identical network, gradients and state
/// produce bit-identical parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_bias: Vec<Vec<f64>>,
    v_bias: Vec<Vec<f64>>,
    step_count: u64,
}

impl Adam {
    pub fn new(net: &Network) -> Self {
        let zw: Vec<Vec<f64>> = net.layers().iter().map(|l| vec![0.0; l.weights().len()]).collect();
        let zb: Vec<Vec<f64>> = net.layers().iter().map(|l| vec![0.0; l.bias().len()]).collect();
        Adam {
            m_weights: zw.clone(),
            v_weights: zw,
            m_bias: zb.clone(),
            v_bias: zb,
            step_count: 0,
        }
    }

    /// Applies one Adam step; refuses the whole step on non-finite gradients.
    pub fn step(&mut self, net: &mut Network, grads: &Gradients, lr: f64) -> Result<()> {
        if self.m_weights.len() != net.layers().len() {
            return Err(Error::shape("optimizer state layers", net.layers().len(), self.m_weights.len()));
        }
        if !grads.is_finite() {
            return Err(Error::numeric("non-finite gradient, step refused"));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - BETA1.powi(t);
        let bc2 = 1.0 - BETA2.powi(t);

        for k in 0..net.layers().len() {
            let gw = grads.layer_weights(k);
            let gb = grads.layer_bias(k);
            if gw.len() != self.m_weights[k].len() || gb.len() != self.m_bias[k].len() {
                return Err(Error::shape("optimizer gradients", self.m_weights[k].len(), gw.len()));
            }
            let dw = Self::deltas(&mut self.m_weights[k], &mut self.v_weights[k], gw, lr, bc1, bc2);
            let db = Self::deltas(&mut self.m_bias[k], &mut self.v_bias[k], gb, lr, bc1, bc2);
            net.apply_update(k, &dw, &db);
        }
        Ok(())
    }

    fn deltas(m: &mut [f64], v: &mut [f64], g: &[f64], lr: f64, bc1: f64, bc2: f64) -> Vec<f64> {
        m.iter_mut()
            .zip(v.iter_mut())
            .zip(g.iter())
            .map(|((mi, vi), &gi)| {
                *mi = BETA1 * *mi + (1.0 - BETA1) * gi;
                *vi = BETA2 * *vi + (1.0 - BETA2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                -lr * m_hat / (v_hat.sqrt() + EPS)
            })
            .collect()
    }
}
