use crate::beamforming::RateEvaluator;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::sigmodel::{OperatingMode, PhaseShiftVector};

/// Anything that scores a phase configuration. The reward is the objective
/// itself, observed without noise.
pub trait Environment {
    fn n_elements(&self) -> usize;

    fn reward(&mut self, phi: &PhaseShiftVector) -> Result<f64>;
}

/// The RIS link with one fixed channel realization; beamformers are
/// re-optimized for every phase vector it is asked about.
#[derive(Debug, Clone)]
pub struct RisEnvironment {
    pub channels: ChannelSet,
    pub mode: OperatingMode,
    pub evaluator: RateEvaluator,
}

impl RisEnvironment {
    pub fn new(channels: ChannelSet, mode: OperatingMode, evaluator: RateEvaluator) -> Result<Self> {
        channels.validate()?;
        Ok(Self { channels, mode, evaluator })
    }
}

impl Environment for RisEnvironment {
    fn n_elements(&self) -> usize {
        self.channels.n_elements()
    }

    fn reward(&mut self, phi: &PhaseShiftVector) -> Result<f64> {
        if phi.len() != self.n_elements() {
            return Err(Error::Shape(format!("{} phases for {} RIS elements", phi.len(), self.n_elements())));
        }
        self.evaluator.rate(&self.channels, phi, self.mode)
    }
}
