//! Sequential network: a layer list, seeded initialization, tape-based
//! backprop, and finite-difference verification helpers.

use rand::Rng;

use super::layers::{Layer, LayerSpec};
use super::scalar::Scalar;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng;

/// A feed-forward stack. Parameters live inside the layers.
#[derive(Debug, Clone)]
pub struct Network<S> {
    pub layers: Vec<Layer<S>>,
}

/// Recorded activations from one forward pass: `values[0]` is the input,
/// `values[i+1]` the output of layer `i`.
pub struct Tape<S> {
    pub values: Vec<Tensor<S>>,
}

impl<S> Tape<S> {
    pub fn output(&self) -> &Tensor<S> {
        self.values.last().expect("tape holds at least the input")
    }
}

impl<S: Scalar> Network<S> {
    /// Build from specs with seeded initialization: He-uniform
    /// (±√(6/fan_in)) before ReLU-bound convolutions, Glorot uniform
    /// (±√(6/(fan_in+fan_out))) for dense layers; biases zero.
    pub fn build(specs: &[LayerSpec], seed: u64) -> Result<Network<S>> {
        if specs.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        let mut layers = Vec::with_capacity(specs.len());
        for (idx, spec) in specs.iter().enumerate() {
            let mut layer: Layer<S> = Layer::build(spec);
            if let Some((fan_in, fan_out)) = layer.fans() {
                let limit = match spec {
                    LayerSpec::Conv2d { .. } => (6.0 / fan_in as f64).sqrt(),
                    _ => (6.0 / (fan_in + fan_out) as f64).sqrt(),
                };
                let mut r = rng::stream(seed, "layer_init", idx as u64);
                let mut first = true;
                layer.for_each_param(&mut |p, _| {
                    if first {
                        // Weights buffer comes first.
                        for v in p.iter_mut() {
                            *v = S::from_f64(r.gen_range(-limit..limit));
                        }
                        first = false;
                    }
                    // Bias buffer stays zero.
                });
            }
            layers.push(layer);
        }
        Ok(Network { layers })
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec()).collect()
    }

    /// Inference-only pass.
    pub fn forward(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        let mut cur = x.clone();
        for layer in &self.layers {
            layer.validate_input(&cur)?;
            cur = layer.forward(&cur);
        }
        Ok(cur)
    }

    /// Forward pass keeping every activation for backprop.
    pub fn forward_tape(&self, x: &Tensor<S>) -> Result<Tape<S>> {
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.clone());
        for layer in &self.layers {
            let cur = values.last().unwrap();
            layer.validate_input(cur)?;
            let next = layer.forward(cur);
            values.push(next);
        }
        Ok(Tape { values })
    }

    /// Backpropagate `g_out` (gradient of the loss w.r.t. the network
    /// output) through the tape; parameter gradients accumulate into the
    /// layers. Returns the input gradient.
    pub fn backward(&mut self, tape: &Tape<S>, g_out: &Tensor<S>) -> Result<Tensor<S>> {
        if tape.values.len() != self.layers.len() + 1 {
            return Err(Error::InvalidArgument("tape does not match network depth".into()));
        }
        if g_out.data.len() != tape.output().data.len() {
            return Err(Error::InvalidArgument("output gradient shape mismatch".into()));
        }
        let mut g = g_out.clone();
        for (idx, layer) in self.layers.iter_mut().enumerate().rev() {
            let x = &tape.values[idx];
            let y = &tape.values[idx + 1];
            g = layer.backward(x, y, &g);
        }
        Ok(g)
    }

    pub fn zero_grads(&mut self) {
        self.for_each_param(&mut |_, g| {
            for v in g.iter_mut() {
                *v = S::ZERO;
            }
        });
    }

    /// Visit every `(params, grads)` buffer pair in a stable order.
    pub fn for_each_param(&mut self, f: &mut impl FnMut(&mut [S], &mut [S])) {
        for layer in &mut self.layers {
            layer.for_each_param(f);
        }
    }

    /// Read-only visit of every parameter buffer, same order as
    /// [`for_each_param`](Self::for_each_param).
    pub fn visit_params(&self, f: &mut impl FnMut(&[S])) {
        for layer in &self.layers {
            layer.visit_params(f);
        }
    }

    pub fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit_params(&mut |p| n += p.len());
        n
    }

    /// Flat copy of all parameters (verification and checkpointing).
    pub fn params_flat(&self) -> Vec<S> {
        let mut out = Vec::new();
        self.visit_params(&mut |p| out.extend_from_slice(p));
        out
    }

    /// Flat copy of all accumulated gradients.
    pub fn grads_flat(&mut self) -> Vec<S> {
        let mut out = Vec::new();
        self.for_each_param(&mut |_, g| out.extend_from_slice(g));
        out
    }

    /// Overwrite all parameters from a flat buffer.
    pub fn set_params_flat(&mut self, flat: &[S]) -> Result<()> {
        let n = self.num_params();
        if flat.len() != n {
            return Err(Error::InvalidArgument(format!("expected {n} parameters, got {}", flat.len())));
        }
        let mut off = 0;
        self.for_each_param(&mut |p, _| {
            p.copy_from_slice(&flat[off..off + p.len()]);
            off += p.len();
        });
        Ok(())
    }

    /// Cast the whole network to another element type (parameters copied,
    /// gradients zeroed).
    pub fn cast<T: Scalar>(&self) -> Result<Network<T>> {
        let specs = self.specs();
        let mut out: Network<T> = Network::build(&specs, 0)?;
        let mut flat: Vec<T> = Vec::new();
        self.visit_params(&mut |p| flat.extend(p.iter().map(|v| T::from_f64(v.to_f64()))));
        out.set_params_flat(&flat)?;
        Ok(out)
    }
}

// ─── verification helpers ────────────────────────────────────────────────────

/// Finite-difference gradient verification, used by the test suites.
pub mod verify {
    use super::*;

    /// Compare backprop parameter gradients against central finite
    /// differences of `loss` at step `h`. Returns the maximum relative
    /// error `|analytic − numeric| / max(|analytic|, |numeric|, floor)`.
    ///
    /// Run on `f64` networks: the check needs more headroom than f32
    /// arithmetic offers at tight tolerances.
    pub fn param_grad_max_rel_err(
        net: &mut Network<f64>,
        x: &Tensor<f64>,
        loss: &dyn Fn(&Tensor<f64>) -> (f64, Tensor<f64>),
        h: f64,
        floor: f64,
    ) -> Result<f64> {
        net.zero_grads();
        let tape = net.forward_tape(x)?;
        let (_, g_out) = loss(tape.output());
        net.backward(&tape, &g_out)?;
        let analytic = net.grads_flat();
        let base = net.params_flat();

        let mut worst = 0.0f64;
        for i in 0..base.len() {
            let mut plus = base.clone();
            plus[i] += h;
            net.set_params_flat(&plus)?;
            let lp = loss(&net.forward(x)?).0;
            let mut minus = base.clone();
            minus[i] -= h;
            net.set_params_flat(&minus)?;
            let lm = loss(&net.forward(x)?).0;
            let numeric = (lp - lm) / (2.0 * h);
            let denom = analytic[i].abs().max(numeric.abs()).max(floor);
            worst = worst.max((analytic[i] - numeric).abs() / denom);
        }
        net.set_params_flat(&base)?;
        Ok(worst)
    }

    /// Same check for the gradient w.r.t. the input.
    pub fn input_grad_max_rel_err(
        net: &mut Network<f64>,
        x: &Tensor<f64>,
        loss: &dyn Fn(&Tensor<f64>) -> (f64, Tensor<f64>),
        h: f64,
        floor: f64,
    ) -> Result<f64> {
        net.zero_grads();
        let tape = net.forward_tape(x)?;
        let (_, g_out) = loss(tape.output());
        let gx = net.backward(&tape, &g_out)?;

        let mut worst = 0.0f64;
        for i in 0..x.data.len() {
            let mut plus = x.clone();
            plus.data[i] += h;
            let lp = loss(&net.forward(&plus)?).0;
            let mut minus = x.clone();
            minus.data[i] -= h;
            let lm = loss(&net.forward(&minus)?).0;
            let numeric = (lp - lm) / (2.0 * h);
            let denom = gx.data[i].abs().max(numeric.abs()).max(floor);
            worst = worst.max((gx.data[i] - numeric).abs() / denom);
        }
        Ok(worst)
    }
}
