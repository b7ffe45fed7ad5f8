//! Adam optimizer with bias correction, moments kept in f64 regardless of
//! the network's element type.

use super::network::Network;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Optimizer state aligned to a network's parameter-visit order.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state shaped to `net`.
    pub fn new<S: Scalar>(net: &mut Network<S>, lr: f64, beta1: f64, beta2: f64, eps: f64) -> AdamState {
        let mut m = Vec::new();
        net.for_each_param(&mut |p, _| m.push(vec![0.0; p.len()]));
        let v = m.clone();
        AdamState { step: 0, lr, beta1, beta2, eps, m, v }
    }

    /// One update: `p ← p − lr·m̂/(√v̂ + ε)` with bias-corrected moments.
    /// `grad_scale` multiplies accumulated gradients first (1/batch for
    /// mini-batch means). Increments the step counter by exactly one.
    pub fn apply<S: Scalar>(&mut self, net: &mut Network<S>, grad_scale: f64) -> Result<()> {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let mut idx = 0;
        let mut shape_ok = true;
        let (m, v) = (&mut self.m, &mut self.v);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        net.for_each_param(&mut |p, g| {
            if idx >= m.len() || m[idx].len() != p.len() {
                shape_ok = false;
                idx += 1;
                return;
            }
            let (mb, vb) = (&mut m[idx], &mut v[idx]);
            for i in 0..p.len() {
                let gi = g[i].to_f64() * grad_scale;
                mb[i] = b1 * mb[i] + (1.0 - b1) * gi;
                vb[i] = b2 * vb[i] + (1.0 - b2) * gi * gi;
                let mh = mb[i] / bc1;
                let vh = vb[i] / bc2;
                let upd = lr * mh / (vh.sqrt() + eps);
                p[i] = S::from_f64(p[i].to_f64() - upd);
            }
            idx += 1;
        });
        if !shape_ok || idx != m.len() {
            return Err(Error::InvalidArgument("optimizer state does not match network".into()));
        }
        Ok(())
    }
}
