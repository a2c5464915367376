use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{conv_output_len, Activation, LayerSpec, Network, NetworkSpec};
use crate::error::{Error, Result};

/// Hidden stack of the proposed design: one conv layer, a flatten, and one
/// dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposedHyper {
    pub filters: usize,
    pub width: usize,
    pub stride: usize,
    /// Units of the dense hidden layer.
    pub hidden: usize,
    /// Softmax by default; ReLU is available for ablations.
    pub hidden_activation: Activation,
}

impl Default for ProposedHyper {
    fn default() -> Self {
        Self { filters: 8, width: 4, stride: 2, hidden: 128, hidden_activation: Activation::Softmax }
    }
}

impl ProposedHyper {
    fn hidden_stack(&self, input: usize) -> Result<Vec<LayerSpec>> {
        if conv_output_len(input, self.width, self.stride).is_none() {
            return Err(Error::Config(format!(
                "conv width {} stride {} leaves no output for input length {input}",
                self.width, self.stride
            )));
        }
        Ok(vec![
            LayerSpec::conv1d(self.filters, self.width, self.stride, Activation::Relu),
            LayerSpec::Flatten,
            LayerSpec::dense(self.hidden, self.hidden_activation),
        ])
    }
}

/// Two dense hidden layers of the conventional baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionalHyper {
    pub hidden: [usize; 2],
}

impl Default for ConventionalHyper {
    fn default() -> Self {
        Self { hidden: [256, 256] }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Config("need at least one RIS element".into()))
    } else {
        Ok(())
    }
}

fn finish<R: Rng + ?Sized>(input: usize, layers: Vec<LayerSpec>, rng: &mut R) -> Result<Network> {
    let spec = NetworkSpec::new(input, layers)?;
    let params = spec.init_params(rng);
    Network::new(spec, params)
}

/// Actor: state (`n + 1`) to `n` phases in `(-pi, pi)`.
pub fn build_actor<R: Rng + ?Sized>(n: usize, hyper: &ProposedHyper, rng: &mut R) -> Result<Network> {
    check_n(n)?;
    let mut layers = hyper.hidden_stack(n + 1)?;
    layers.push(LayerSpec::dense(n, Activation::TanhScaled(PI)));
    finish(n + 1, layers, rng)
}

/// Critic: state and action concatenated (`2n + 1`) to a scalar Q-value.
pub fn build_critic<R: Rng + ?Sized>(n: usize, hyper: &ProposedHyper, rng: &mut R) -> Result<Network> {
    check_n(n)?;
    let mut layers = hyper.hidden_stack(2 * n + 1)?;
    layers.push(LayerSpec::dense(1, Activation::Linear));
    finish(2 * n + 1, layers, rng)
}

pub fn build_conventional_actor<R: Rng + ?Sized>(n: usize, hyper: &ConventionalHyper, rng: &mut R) -> Result<Network> {
    check_n(n)?;
    let layers = vec![
        LayerSpec::dense(hyper.hidden[0], Activation::Relu),
        LayerSpec::dense(hyper.hidden[1], Activation::Relu),
        LayerSpec::dense(n, Activation::TanhScaled(PI)),
    ];
    finish(n + 1, layers, rng)
}

pub fn build_conventional_critic<R: Rng + ?Sized>(n: usize, hyper: &ConventionalHyper, rng: &mut R) -> Result<Network> {
    check_n(n)?;
    let layers = vec![
        LayerSpec::dense(hyper.hidden[0], Activation::Relu),
        LayerSpec::dense(hyper.hidden[1], Activation::Relu),
        LayerSpec::dense(1, Activation::Linear),
    ];
    finish(2 * n + 1, layers, rng)
}
