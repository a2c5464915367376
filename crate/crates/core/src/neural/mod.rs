//! Small dense / 1-D convolutional networks with hand-written
//! backpropagation, in double precision.
//!
//! Inputs are flat vectors. A `Conv1d` layer reads its input as a single
//! channel signal and performs a "valid" (unpadded) convolution; its output
//! is stored filter-major (`filter * out_len + position`), which is also the
//! order a following `Flatten` exposes.

mod build;
mod checkpoint;
mod params;

pub use build::{build_actor, build_conventional_actor, build_conventional_critic, build_critic, ConventionalHyper, ProposedHyper};
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use params::{adam_step, soft_update, AdamConfig, ParameterSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    /// Softmax across the layer's outputs.
    Softmax,
    Linear,
    /// `scale * tanh(z)`.
    TanhScaled(f64),
}

impl Activation {
    fn apply(&self, pre: &[f64], out: &mut [f64]) {
        match *self {
            Activation::Relu => {
                for (o, &z) in out.iter_mut().zip(pre) {
                    *o = z.max(0.0);
                }
            }
            Activation::Linear => out.copy_from_slice(pre),
            Activation::TanhScaled(scale) => {
                for (o, &z) in out.iter_mut().zip(pre) {
                    *o = scale * z.tanh();
                }
            }
            Activation::Softmax => {
                let max = pre.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for (o, &z) in out.iter_mut().zip(pre) {
                    *o = (z - max).exp();
                    sum += *o;
                }
                for o in out.iter_mut() {
                    *o /= sum;
                }
            }
        }
    }

    /// Turns a gradient w.r.t. the outputs into one w.r.t. the pre-activations,
    /// in place.
    fn backprop(&self, pre: &[f64], post: &[f64], grad: &mut [f64]) {
        match *self {
            Activation::Relu => {
                for (g, &z) in grad.iter_mut().zip(pre) {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                }
            }
            Activation::Linear => {}
            Activation::TanhScaled(scale) => {
                for (g, &z) in grad.iter_mut().zip(pre) {
                    let t = z.tanh();
                    *g *= scale * (1.0 - t * t);
                }
            }
            Activation::Softmax => {
                let dot: f64 = grad.iter().zip(post).map(|(g, y)| g * y).sum();
                for (g, &y) in grad.iter_mut().zip(post) {
                    *g = y * (*g - dot);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv1d { filters: usize, width: usize, stride: usize, activation: Activation },
    Flatten,
    Dense { units: usize, activation: Activation },
}

impl LayerSpec {
    pub fn conv1d(filters: usize, width: usize, stride: usize, activation: Activation) -> Self {
        LayerSpec::Conv1d { filters, width, stride, activation }
    }

    pub fn dense(units: usize, activation: Activation) -> Self {
        LayerSpec::Dense { units, activation }
    }
}

/// `floor((input_len - width) / stride + 1)`, or `None` when no window fits.
pub fn conv_output_len(input_len: usize, width: usize, stride: usize) -> Option<usize> {
    if width == 0 || stride == 0 || width > input_len {
        return None;
    }
    Some((input_len - width) / stride + 1)
}

/// Validated layer topology with precomputed sizes and parameter offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    input_size: usize,
    layers: Vec<LayerSpec>,
    /// `sizes[k]` is the input length of layer `k`; the last entry is the output length.
    sizes: Vec<usize>,
    /// Start of layer `k`'s parameters; the last entry is the total count.
    offsets: Vec<usize>,
}

impl NetworkSpec {
    pub fn new(input_size: usize, layers: Vec<LayerSpec>) -> Result<Self> {
        if input_size == 0 {
            return Err(Error::Config("network input size must be >= 1".into()));
        }
        let mut sizes = vec![input_size];
        let mut offsets = vec![0];
        for (k, layer) in layers.iter().enumerate() {
            let inp = *sizes.last().unwrap();
            let (out, count) = match *layer {
                LayerSpec::Conv1d { filters, width, stride, .. } => {
                    if filters == 0 {
                        return Err(Error::Config(format!("layer {k}: conv1d needs >= 1 filter")));
                    }
                    let len = conv_output_len(inp, width, stride).ok_or_else(|| {
                        Error::Config(format!(
                            "layer {k}: conv1d width {width} stride {stride} does not fit input length {inp}"
                        ))
                    })?;
                    (filters * len, filters * (width + 1))
                }
                LayerSpec::Flatten => (inp, 0),
                LayerSpec::Dense { units, .. } => {
                    if units == 0 {
                        return Err(Error::Config(format!("layer {k}: dense needs >= 1 unit")));
                    }
                    (units, (inp + 1) * units)
                }
            };
            sizes.push(out);
            offsets.push(offsets.last().unwrap() + count);
        }
        Ok(Self { input_size, layers, sizes, offsets })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Input length of each layer followed by the output length.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Parameter range of layer `k` in the flat vector.
    pub fn layer_params(&self, k: usize) -> std::ops::Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterSet {
        let mut values = vec![0.0; self.param_count()];
        for (k, layer) in self.layers.iter().enumerate() {
            let range = self.layer_params(k);
            let (n_weights, fan_in, fan_out) = match *layer {
                LayerSpec::Conv1d { filters, width, .. } => (filters * width, width, filters * width),
                LayerSpec::Dense { units, .. } => (units * self.sizes[k], self.sizes[k], units),
                LayerSpec::Flatten => continue,
            };
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in &mut values[range.start..range.start + n_weights] {
                *v = rng.random_range(-limit..limit);
            }
        }
        ParameterSet::from_values(values)
    }
}

/// Per-layer activations recorded by [`forward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// `inputs[k]` is the input of layer `k`.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn pre_activations(&self, k: usize) -> &[f64] {
        &self.pre[k]
    }

    pub fn post_activations(&self, k: usize) -> &[f64] {
        &self.post[k]
    }
}

fn check_params(spec: &NetworkSpec, params: &[f64]) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::Shape(format!(
            "network expects {} parameters, got {}",
            spec.param_count(),
            params.len()
        )));
    }
    Ok(())
}

/// Evaluates the network, keeping what [`backward`] needs.
pub fn forward(spec: &NetworkSpec, params: &[f64], input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    check_params(spec, params)?;
    if input.len() != spec.input_size {
        return Err(Error::Shape(format!("network input length {} != {}", input.len(), spec.input_size)));
    }
    let n = spec.layers.len();
    let mut cache = ForwardCache { inputs: Vec::with_capacity(n), pre: Vec::with_capacity(n), post: Vec::with_capacity(n) };
    let mut x = input.to_vec();
    for (k, layer) in spec.layers.iter().enumerate() {
        let p = &params[spec.layer_params(k)];
        let out_len = spec.sizes[k + 1];
        let mut pre = vec![0.0; out_len];
        let activation = match *layer {
            LayerSpec::Conv1d { filters, width, stride, activation } => {
                let positions = out_len / filters;
                let (w, b) = p.split_at(filters * width);
                for f in 0..filters {
                    let kernel = &w[f * width..(f + 1) * width];
                    for pos in 0..positions {
                        let window = &x[pos * stride..pos * stride + width];
                        pre[f * positions + pos] = b[f] + kernel.iter().zip(window).map(|(a, c)| a * c).sum::<f64>();
                    }
                }
                activation
            }
            LayerSpec::Dense { units, activation } => {
                let inp = x.len();
                let (w, b) = p.split_at(units * inp);
                for u in 0..units {
                    let row = &w[u * inp..(u + 1) * inp];
                    pre[u] = b[u] + row.iter().zip(&x).map(|(a, c)| a * c).sum::<f64>();
                }
                activation
            }
            LayerSpec::Flatten => {
                pre.copy_from_slice(&x);
                Activation::Linear
            }
        };
        let mut post = vec![0.0; out_len];
        activation.apply(&pre, &mut post);
        cache.inputs.push(std::mem::replace(&mut x, post.clone()));
        cache.pre.push(pre);
        cache.post.push(post);
    }
    Ok((x, cache))
}

/// Output only.
pub fn predict(spec: &NetworkSpec, params: &[f64], input: &[f64]) -> Result<Vec<f64>> {
    forward(spec, params, input).map(|(out, _)| out)
}

/// Reverse-mode pass: adds the parameter gradient into `param_grads` and
/// returns the gradient w.r.t. the network input.
pub fn backward_accumulate(
    spec: &NetworkSpec,
    params: &[f64],
    cache: &ForwardCache,
    output_grad: &[f64],
    param_grads: &mut [f64],
) -> Result<Vec<f64>> {
    check_params(spec, params)?;
    if param_grads.len() != params.len() {
        return Err(Error::Shape("gradient buffer length differs from parameter count".into()));
    }
    let n = spec.layers.len();
    let cache_matches = cache.inputs.len() == n
        && cache.pre.len() == n
        && cache.inputs.iter().zip(&spec.sizes).all(|(x, &s)| x.len() == s)
        && cache.pre.iter().zip(&spec.sizes[1..]).all(|(z, &s)| z.len() == s);
    if !cache_matches {
        return Err(Error::Shape("forward cache does not match this network".into()));
    }
    if output_grad.len() != spec.output_size() {
        return Err(Error::Shape(format!(
            "output gradient length {} != {}",
            output_grad.len(),
            spec.output_size()
        )));
    }

    let mut grad = output_grad.to_vec();
    for (k, layer) in spec.layers.iter().enumerate().rev() {
        let range = spec.layer_params(k);
        let p = &params[range.clone()];
        let g = &mut param_grads[range];
        let x = &cache.inputs[k];
        let mut dx = vec![0.0; x.len()];
        match *layer {
            LayerSpec::Conv1d { filters, width, stride, activation } => {
                activation.backprop(&cache.pre[k], &cache.post[k], &mut grad);
                let positions = grad.len() / filters;
                let (w, _) = p.split_at(filters * width);
                let (gw, gb) = g.split_at_mut(filters * width);
                for f in 0..filters {
                    for pos in 0..positions {
                        let dz = grad[f * positions + pos];
                        if dz == 0.0 {
                            continue;
                        }
                        gb[f] += dz;
                        let start = pos * stride;
                        for j in 0..width {
                            gw[f * width + j] += dz * x[start + j];
                            dx[start + j] += dz * w[f * width + j];
                        }
                    }
                }
            }
            LayerSpec::Dense { units, activation } => {
                activation.backprop(&cache.pre[k], &cache.post[k], &mut grad);
                let inp = x.len();
                let (w, _) = p.split_at(units * inp);
                let (gw, gb) = g.split_at_mut(units * inp);
                for u in 0..units {
                    let dz = grad[u];
                    if dz == 0.0 {
                        continue;
                    }
                    gb[u] += dz;
                    let row = &w[u * inp..(u + 1) * inp];
                    let grow = &mut gw[u * inp..(u + 1) * inp];
                    for i in 0..inp {
                        grow[i] += dz * x[i];
                        dx[i] += dz * row[i];
                    }
                }
            }
            LayerSpec::Flatten => dx.copy_from_slice(&grad),
        }
        grad = dx;
    }
    Ok(grad)
}

/// Parameter gradient and input gradient for one sample.
pub fn backward(
    spec: &NetworkSpec,
    params: &[f64],
    cache: &ForwardCache,
    output_grad: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grads = vec![0.0; params.len()];
    let input_grad = backward_accumulate(spec, params, cache, output_grad, &mut grads)?;
    Ok((grads, input_grad))
}

/// A topology together with its parameters and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: NetworkSpec,
    pub params: ParameterSet,
}

impl Network {
    pub fn new(spec: NetworkSpec, params: ParameterSet) -> Result<Self> {
        check_params(&spec, params.values())?;
        Ok(Self { spec, params })
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        forward(&self.spec, self.params.values(), input)
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        predict(&self.spec, self.params.values(), input)
    }

    pub fn backward_accumulate(&self, cache: &ForwardCache, output_grad: &[f64], param_grads: &mut [f64]) -> Result<Vec<f64>> {
        backward_accumulate(&self.spec, self.params.values(), cache, output_grad, param_grads)
    }
}
