//! Feed-forward layers with explicit forward/backward passes.
//!
//! Each parameterized layer owns its weights and a same-shaped gradient
//! accumulator; `backward` adds into the accumulators (callers zero them
//! between optimizer steps) and returns the input gradient for chaining.

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::tensor::{Chw, Tensor};
use crate::error::{Error, Result};

/// Serializable layer description; [`Layer::build`] turns one into a live
/// layer with initialized parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d { input: Chw, out_channels: usize, kernel: usize, stride_rows: usize, stride_cols: usize, padding: usize },
    Dense { inputs: usize, outputs: usize },
    Relu,
    Sigmoid,
    Softmax,
    GlobalAvgPool { input: Chw },
    Flatten,
    Reshape { shape: Vec<usize> },
}

/// 2-D convolution over CHW maps.
#[derive(Debug, Clone)]
pub struct Conv2d<S> {
    pub input: Chw,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride_rows: usize,
    pub stride_cols: usize,
    pub padding: usize,
    /// `[out_ch][in_ch][kh][kw]` row-major.
    pub w: Vec<S>,
    pub b: Vec<S>,
    pub gw: Vec<S>,
    pub gb: Vec<S>,
}

impl<S: Scalar> Conv2d<S> {
    pub fn out_dims(&self) -> Chw {
        let oh = (self.input.h + 2 * self.padding - self.kernel) / self.stride_rows + 1;
        let ow = (self.input.w + 2 * self.padding - self.kernel) / self.stride_cols + 1;
        Chw { c: self.out_channels, h: oh, w: ow }
    }

    fn forward(&self, x: &Tensor<S>) -> Tensor<S> {
        let (ic, h, w) = (self.input.c, self.input.h, self.input.w);
        let out = self.out_dims();
        let (oh_n, ow_n) = (out.h, out.w);
        let k = self.kernel;
        let (sr, sc) = (self.stride_rows, self.stride_cols);
        let p = self.padding as i64;
        let mut y = vec![S::ZERO; out.count()];

        for oc in 0..self.out_channels {
            let bias = self.b[oc];
            let y_ch = &mut y[oc * oh_n * ow_n..(oc + 1) * oh_n * ow_n];
            for v in y_ch.iter_mut() {
                *v = bias;
            }
            for icx in 0..ic {
                let x_ch = &x.data[icx * h * w..(icx + 1) * h * w];
                for kh in 0..k {
                    for kw in 0..k {
                        let wv = self.w[((oc * ic + icx) * k + kh) * k + kw];
                        let dw = kw as i64 - p;
                        // Valid output rows: 0 ≤ oh·sr − p + kh < h.
                        for oh in 0..oh_n {
                            let ih = oh as i64 * sr as i64 - p + kh as i64;
                            if ih < 0 || ih >= h as i64 {
                                continue;
                            }
                            let x_row = &x_ch[ih as usize * w..(ih as usize + 1) * w];
                            let y_row = &mut y_ch[oh * ow_n..(oh + 1) * ow_n];
                            // Valid output cols: 0 ≤ ow·sc + dw < w.
                            let ow_lo = if dw < 0 { ((-dw) as usize).div_ceil(sc) } else { 0 };
                            let ow_hi = (((w as i64 - 1 - dw) / sc as i64 + 1).clamp(0, ow_n as i64)) as usize;
                            if sc == 1 {
                                let base = (ow_lo as i64 + dw) as usize;
                                for (yy, xx) in y_row[ow_lo..ow_hi].iter_mut().zip(&x_row[base..base + ow_hi - ow_lo]) {
                                    *yy += wv * *xx;
                                }
                            } else {
                                for ow in ow_lo..ow_hi {
                                    let iw = (ow as i64 * sc as i64 + dw) as usize;
                                    y_row[ow] += wv * x_row[iw];
                                }
                            }
                        }
                    }
                }
            }
        }
        Tensor { shape: out.as_shape(), data: y }
    }

    fn backward(&mut self, x: &Tensor<S>, gy: &Tensor<S>) -> Tensor<S> {
        let (ic, h, w) = (self.input.c, self.input.h, self.input.w);
        let out = self.out_dims();
        let (oh_n, ow_n) = (out.h, out.w);
        let k = self.kernel;
        let (sr, sc) = (self.stride_rows, self.stride_cols);
        let p = self.padding as i64;
        let mut gx = vec![S::ZERO; x.data.len()];

        for oc in 0..self.out_channels {
            let gy_ch = &gy.data[oc * oh_n * ow_n..(oc + 1) * oh_n * ow_n];
            let mut gb_acc = S::ZERO;
            for &g in gy_ch {
                gb_acc += g;
            }
            self.gb[oc] += gb_acc;
            for icx in 0..ic {
                let x_ch = &x.data[icx * h * w..(icx + 1) * h * w];
                let gx_ch = &mut gx[icx * h * w..(icx + 1) * h * w];
                for kh in 0..k {
                    for kw in 0..k {
                        let widx = ((oc * ic + icx) * k + kh) * k + kw;
                        let wv = self.w[widx];
                        let dw = kw as i64 - p;
                        let mut gw_acc = S::ZERO;
                        for oh in 0..oh_n {
                            let ih = oh as i64 * sr as i64 - p + kh as i64;
                            if ih < 0 || ih >= h as i64 {
                                continue;
                            }
                            let x_row = &x_ch[ih as usize * w..(ih as usize + 1) * w];
                            let gx_row = &mut gx_ch[ih as usize * w..(ih as usize + 1) * w];
                            let gy_row = &gy_ch[oh * ow_n..(oh + 1) * ow_n];
                            let ow_lo = if dw < 0 { ((-dw) as usize).div_ceil(sc) } else { 0 };
                            let ow_hi = (((w as i64 - 1 - dw) / sc as i64 + 1).clamp(0, ow_n as i64)) as usize;
                            for ow in ow_lo..ow_hi {
                                let iw = (ow as i64 * sc as i64 + dw) as usize;
                                let g = gy_row[ow];
                                gw_acc += g * x_row[iw];
                                gx_row[iw] += wv * g;
                            }
                        }
                        self.gw[widx] += gw_acc;
                    }
                }
            }
        }
        Tensor { shape: x.shape.clone(), data: gx }
    }
}

/// Fully connected layer: `y = W·x + b`, `W` row-major `[outputs][inputs]`.
#[derive(Debug, Clone)]
pub struct Dense<S> {
    pub inputs: usize,
    pub outputs: usize,
    pub w: Vec<S>,
    pub b: Vec<S>,
    pub gw: Vec<S>,
    pub gb: Vec<S>,
}

impl<S: Scalar> Dense<S> {
    fn forward(&self, x: &Tensor<S>) -> Tensor<S> {
        let mut y = Vec::with_capacity(self.outputs);
        for o in 0..self.outputs {
            let row = &self.w[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.b[o];
            for (wv, xv) in row.iter().zip(&x.data) {
                acc += *wv * *xv;
            }
            y.push(acc);
        }
        Tensor { shape: vec![self.outputs], data: y }
    }

    fn backward(&mut self, x: &Tensor<S>, gy: &Tensor<S>) -> Tensor<S> {
        let mut gx = vec![S::ZERO; self.inputs];
        for o in 0..self.outputs {
            let g = gy.data[o];
            self.gb[o] += g;
            let row = &self.w[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut self.gw[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += g * x.data[i];
                gx[i] += row[i] * g;
            }
        }
        Tensor { shape: vec![self.inputs], data: gx }
    }
}

/// A live layer.
#[derive(Debug, Clone)]
pub enum Layer<S> {
    Conv2d(Conv2d<S>),
    Dense(Dense<S>),
    Relu,
    Sigmoid,
    Softmax,
    GlobalAvgPool { input: Chw },
    Flatten,
    Reshape { shape: Vec<usize> },
}

impl<S: Scalar> Layer<S> {
    /// Instantiate a spec with zeroed parameters (initialization is the
    /// network builder's job).
    pub fn build(spec: &LayerSpec) -> Layer<S> {
        match spec {
            LayerSpec::Conv2d { input, out_channels, kernel, stride_rows, stride_cols, padding } => {
                let nw = out_channels * input.c * kernel * kernel;
                Layer::Conv2d(Conv2d {
                    input: *input,
                    out_channels: *out_channels,
                    kernel: *kernel,
                    stride_rows: *stride_rows,
                    stride_cols: *stride_cols,
                    padding: *padding,
                    w: vec![S::ZERO; nw],
                    b: vec![S::ZERO; *out_channels],
                    gw: vec![S::ZERO; nw],
                    gb: vec![S::ZERO; *out_channels],
                })
            }
            LayerSpec::Dense { inputs, outputs } => Layer::Dense(Dense {
                inputs: *inputs,
                outputs: *outputs,
                w: vec![S::ZERO; inputs * outputs],
                b: vec![S::ZERO; *outputs],
                gw: vec![S::ZERO; inputs * outputs],
                gb: vec![S::ZERO; *outputs],
            }),
            LayerSpec::Relu => Layer::Relu,
            LayerSpec::Sigmoid => Layer::Sigmoid,
            LayerSpec::Softmax => Layer::Softmax,
            LayerSpec::GlobalAvgPool { input } => Layer::GlobalAvgPool { input: *input },
            LayerSpec::Flatten => Layer::Flatten,
            LayerSpec::Reshape { shape } => Layer::Reshape { shape: shape.clone() },
        }
    }

    /// The spec this layer was built from.
    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Conv2d(c) => LayerSpec::Conv2d {
                input: c.input,
                out_channels: c.out_channels,
                kernel: c.kernel,
                stride_rows: c.stride_rows,
                stride_cols: c.stride_cols,
                padding: c.padding,
            },
            Layer::Dense(d) => LayerSpec::Dense { inputs: d.inputs, outputs: d.outputs },
            Layer::Relu => LayerSpec::Relu,
            Layer::Sigmoid => LayerSpec::Sigmoid,
            Layer::Softmax => LayerSpec::Softmax,
            Layer::GlobalAvgPool { input } => LayerSpec::GlobalAvgPool { input: *input },
            Layer::Flatten => LayerSpec::Flatten,
            Layer::Reshape { shape } => LayerSpec::Reshape { shape: shape.clone() },
        }
    }

    pub fn validate_input(&self, x: &Tensor<S>) -> Result<()> {
        let expect: Option<Vec<usize>> = match self {
            Layer::Conv2d(c) => Some(c.input.as_shape()),
            Layer::Dense(d) => Some(vec![d.inputs]),
            Layer::GlobalAvgPool { input } => Some(input.as_shape()),
            _ => None,
        };
        if let Some(shape) = expect {
            let n: usize = shape.iter().product();
            if x.shape != shape && x.data.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "layer expects shape {:?}, got {:?}",
                    shape, x.shape
                )));
            }
        }
        if let Layer::Reshape { shape } = self {
            let n: usize = shape.iter().product();
            if x.data.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "cannot reshape {} elements to {:?}",
                    x.data.len(),
                    shape
                )));
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor<S>) -> Tensor<S> {
        match self {
            Layer::Conv2d(c) => c.forward(x),
            Layer::Dense(d) => d.forward(x),
            Layer::Relu => Tensor {
                shape: x.shape.clone(),
                data: x.data.iter().map(|&v| v.max_s(S::ZERO)).collect(),
            },
            Layer::Sigmoid => Tensor {
                shape: x.shape.clone(),
                data: x.data.iter().map(|&v| S::ONE / (S::ONE + (-v).exp_s())).collect(),
            },
            Layer::Softmax => {
                let mut m = x.data[0];
                for &v in &x.data {
                    m = m.max_s(v);
                }
                let e: Vec<S> = x.data.iter().map(|&v| (v - m).exp_s()).collect();
                let mut sum = S::ZERO;
                for &v in &e {
                    sum += v;
                }
                Tensor { shape: x.shape.clone(), data: e.iter().map(|&v| v / sum).collect() }
            }
            Layer::GlobalAvgPool { input } => {
                let hw = input.h * input.w;
                let inv = S::from_f64(1.0 / hw as f64);
                let mut y = Vec::with_capacity(input.c);
                for c in 0..input.c {
                    let mut acc = S::ZERO;
                    for &v in &x.data[c * hw..(c + 1) * hw] {
                        acc += v;
                    }
                    y.push(acc * inv);
                }
                Tensor { shape: vec![input.c], data: y }
            }
            Layer::Flatten => Tensor { shape: vec![x.data.len()], data: x.data.clone() },
            Layer::Reshape { shape } => Tensor { shape: shape.clone(), data: x.data.clone() },
        }
    }

    /// Input gradient given the forward pass's input `x`, output `y`, and
    /// output gradient `gy`. Accumulates parameter gradients.
    pub fn backward(&mut self, x: &Tensor<S>, y: &Tensor<S>, gy: &Tensor<S>) -> Tensor<S> {
        match self {
            Layer::Conv2d(c) => c.backward(x, gy),
            Layer::Dense(d) => d.backward(x, gy),
            Layer::Relu => Tensor {
                shape: x.shape.clone(),
                data: x
                    .data
                    .iter()
                    .zip(&gy.data)
                    .map(|(&xv, &g)| if xv > S::ZERO { g } else { S::ZERO })
                    .collect(),
            },
            Layer::Sigmoid => Tensor {
                shape: x.shape.clone(),
                data: y.data.iter().zip(&gy.data).map(|(&yv, &g)| g * yv * (S::ONE - yv)).collect(),
            },
            Layer::Softmax => {
                let mut dot = S::ZERO;
                for (&yv, &g) in y.data.iter().zip(&gy.data) {
                    dot += yv * g;
                }
                Tensor {
                    shape: x.shape.clone(),
                    data: y.data.iter().zip(&gy.data).map(|(&yv, &g)| yv * (g - dot)).collect(),
                }
            }
            Layer::GlobalAvgPool { input } => {
                let hw = input.h * input.w;
                let inv = S::from_f64(1.0 / hw as f64);
                let mut gx = vec![S::ZERO; x.data.len()];
                for c in 0..input.c {
                    let g = gy.data[c] * inv;
                    for v in &mut gx[c * hw..(c + 1) * hw] {
                        *v = g;
                    }
                }
                Tensor { shape: x.shape.clone(), data: gx }
            }
            Layer::Flatten | Layer::Reshape { .. } => {
                Tensor { shape: x.shape.clone(), data: gy.data.clone() }
            }
        }
    }

    /// Visit `(params, grads)` buffer pairs (weights then bias).
    pub fn for_each_param(&mut self, f: &mut impl FnMut(&mut [S], &mut [S])) {
        match self {
            Layer::Conv2d(c) => {
                f(&mut c.w, &mut c.gw);
                f(&mut c.b, &mut c.gb);
            }
            Layer::Dense(d) => {
                f(&mut d.w, &mut d.gw);
                f(&mut d.b, &mut d.gb);
            }
            _ => {}
        }
    }

    /// Read-only visit of the parameter buffers, same order as
    /// [`for_each_param`](Self::for_each_param).
    pub fn visit_params(&self, f: &mut impl FnMut(&[S])) {
        match self {
            Layer::Conv2d(c) => {
                f(&c.w);
                f(&c.b);
            }
            Layer::Dense(d) => {
                f(&d.w);
                f(&d.b);
            }
            _ => {}
        }
    }

    /// Fan-in / fan-out for initialization, when parameterized.
    pub fn fans(&self) -> Option<(usize, usize)> {
        match self {
            Layer::Conv2d(c) => {
                let k2 = c.kernel * c.kernel;
                Some((c.input.c * k2, c.out_channels * k2))
            }
            Layer::Dense(d) => Some((d.inputs, d.outputs)),
            _ => None,
        }
    }
}
