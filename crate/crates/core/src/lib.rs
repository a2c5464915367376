//! RIS-assisted half/full-duplex MISO link simulation, a DDPG phase-shift
//! optimizer with convolutional actor/critic networks, and closed-form network
//! complexity accounting.

pub mod beamforming;
pub mod channel;
pub mod complexity;
pub mod ddpg;
pub mod error;
pub mod harness;
pub mod neural;
pub mod seed;
pub mod sigmodel;

pub use error::{Error, Result};
