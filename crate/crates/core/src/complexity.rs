//! Closed-form storage and arithmetic cost of the actor / critic networks.
//!
//! Costs count stored parameters (`C_P`), real multiplications (`C_M`) and
//! real additions (`C_A`). Each multiply-accumulate costs one multiplication
//! and one addition (the bias add closes the accumulation), each activation
//! output costs one addition, and flatten is free.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::neural::{conv_output_len, ConventionalHyper, LayerSpec, NetworkSpec, ProposedHyper};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub c_p: u64,
    pub c_m: u64,
    pub c_a: u64,
}

impl ComplexityReport {
    pub fn get(&self, chi: Chi) -> u64 {
        match chi {
            Chi::P => self.c_p,
            Chi::M => self.c_m,
            Chi::A => self.c_a,
        }
    }
}

impl std::ops::Add for ComplexityReport {
    type Output = ComplexityReport;

    fn add(self, o: ComplexityReport) -> ComplexityReport {
        ComplexityReport { c_p: self.c_p + o.c_p, c_m: self.c_m + o.c_m, c_a: self.c_a + o.c_a }
    }
}

/// Which cost a reduction is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chi {
    P,
    M,
    A,
}

impl Chi {
    pub const ALL: [Chi; 3] = [Chi::P, Chi::M, Chi::A];
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chi::P => "P",
            Chi::M => "M",
            Chi::A => "A",
        })
    }
}

impl FromStr for Chi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(Chi::P),
            "M" | "m" => Ok(Chi::M),
            "A" | "a" => Ok(Chi::A),
            other => Err(Error::Config(format!("unknown cost '{other}', expected P, M or A"))),
        }
    }
}

/// Three dense weight layers with widths `eta = [in, hidden1, hidden2, out]`.
pub fn conventional_complexity(eta: [usize; 4]) -> Result<ComplexityReport> {
    if eta.contains(&0) {
        return Err(Error::Config(format!("all layer widths must be >= 1, got {eta:?}")));
    }
    let e: Vec<u64> = eta.iter().map(|&x| x as u64).collect();
    let c_p = (0..3).map(|i| (e[i] + 1) * e[i + 1]).sum();
    let c_m: u64 = (0..3).map(|i| e[i] * e[i + 1]).sum();
    let c_a = c_m + (0..3).map(|i| e[i + 1]).sum::<u64>();
    Ok(ComplexityReport { c_p, c_m, c_a })
}

/// Conv1d (`fn_` filters of width `fz`, stride `fs`) over an `eta1`-long
/// input, then a dense layer of `eta3` units, then `eta4` outputs.
pub fn proposed_complexity(
    eta1: usize,
    eta3: usize,
    eta4: usize,
    fz: usize,
    fn_: usize,
    fs: usize,
) -> Result<ComplexityReport> {
    let eta_f = conv_output_len(eta1, fz, fs)
        .ok_or_else(|| Error::Config(format!("conv width {fz} stride {fs} leaves no output for input {eta1}")))?
        as u64;
    let (eta3, eta4, fz, fn_) = (eta3 as u64, eta4 as u64, fz as u64, fn_ as u64);
    Ok(ComplexityReport {
        c_p: (eta_f * eta3 + fz + 1) * fn_ + (eta4 + 1) * eta3 + eta4,
        c_m: (fz + eta3) * eta_f * fn_ + eta3 * eta4,
        c_a: (fz + eta3 + 1) * eta_f * fn_ + (eta4 + 1) * eta3 + eta4,
    })
}

/// `1 - (proposed actor + critic) / (conventional actor + critic)` for cost `chi`.
pub fn reduction(
    proposed_actor: &ComplexityReport,
    proposed_critic: &ComplexityReport,
    conventional_actor: &ComplexityReport,
    conventional_critic: &ComplexityReport,
    chi: Chi,
) -> Result<f64> {
    let den = conventional_actor.get(chi) + conventional_critic.get(chi);
    if den == 0 {
        return Err(Error::Domain(format!("conventional {chi} cost is zero")));
    }
    let num = proposed_actor.get(chi) + proposed_critic.get(chi);
    Ok(1.0 - num as f64 / den as f64)
}

/// Weights plus biases, enumerated layer by layer from the topology.
pub fn count_parameters(spec: &NetworkSpec) -> u64 {
    let mut width = spec.input_size() as u64;
    let mut total = 0u64;
    for layer in spec.layers() {
        match *layer {
            LayerSpec::Conv1d { filters, width: fz, stride, .. } => {
                total += filters as u64 * fz as u64 + filters as u64;
                let len = conv_output_len(width as usize, fz, stride).unwrap_or(0) as u64;
                width = len * filters as u64;
            }
            LayerSpec::Flatten => {}
            LayerSpec::Dense { units, .. } => {
                total += width * units as u64 + units as u64;
                width = units as u64;
            }
        }
    }
    total
}

/// Full cost of one forward pass, enumerated layer by layer.
pub fn count_operations(spec: &NetworkSpec) -> ComplexityReport {
    let mut width = spec.input_size() as u64;
    let mut r = ComplexityReport { c_p: count_parameters(spec), ..Default::default() };
    for layer in spec.layers() {
        match *layer {
            LayerSpec::Conv1d { filters, width: fz, stride, .. } => {
                let outputs = conv_output_len(width as usize, fz, stride).unwrap_or(0) as u64 * filters as u64;
                r.c_m += outputs * fz as u64;
                // fz adds per output (fz - 1 accumulations + bias) plus the activation
                r.c_a += outputs * (fz as u64 + 1);
                width = outputs;
            }
            LayerSpec::Flatten => {}
            LayerSpec::Dense { units, .. } => {
                let units = units as u64;
                r.c_m += width * units;
                r.c_a += width * units + units;
                width = units;
            }
        }
    }
    r
}

/// Closed-form costs of the proposed actor and critic for `n` RIS elements.
pub fn proposed_pair(n: usize, hyper: &ProposedHyper) -> Result<(ComplexityReport, ComplexityReport)> {
    let actor = proposed_complexity(n + 1, hyper.hidden, n, hyper.width, hyper.filters, hyper.stride)?;
    let critic = proposed_complexity(2 * n + 1, hyper.hidden, 1, hyper.width, hyper.filters, hyper.stride)?;
    Ok((actor, critic))
}

/// Closed-form costs of the conventional actor and critic for `n` RIS elements.
pub fn conventional_pair(n: usize, hyper: &ConventionalHyper) -> Result<(ComplexityReport, ComplexityReport)> {
    let [h1, h2] = hyper.hidden;
    Ok((conventional_complexity([n + 1, h1, h2, n])?, conventional_complexity([2 * n + 1, h1, h2, 1])?))
}

/// Reduction of the proposed design over the conventional one at `n`.
pub fn reduction_at(n: usize, chi: Chi, proposed: &ProposedHyper, conventional: &ConventionalHyper) -> Result<f64> {
    let (pa, pc) = proposed_pair(n, proposed)?;
    let (ca, cc) = conventional_pair(n, conventional)?;
    reduction(&pa, &pc, &ca, &cc, chi)
}

/// Limit of [`reduction_at`] as `n -> inf` with every other size fixed: the
/// ratio of the coefficients of `n` in the summed actor + critic costs.
///
/// With conv output length `~ n / fs` (actor) and `~ 2n / fs` (critic):
/// - proposed `C_M`: `3 (fz + h) fn / fs + h`, conventional `C_M`: `3 h1 + h2`
/// - proposed `C_P`: `3 h fn / fs + h + 1`, conventional `C_P`: `3 h1 + h2 + 1`
/// - proposed `C_A`: `3 (fz + h + 1) fn / fs + h + 1`, conventional `C_A`: `3 h1 + h2 + 1`
pub fn asymptotic_reduction(chi: Chi, proposed: &ProposedHyper, conventional: &ConventionalHyper) -> f64 {
    let (fz, fn_, fs, h) =
        (proposed.width as f64, proposed.filters as f64, proposed.stride as f64, proposed.hidden as f64);
    let (h1, h2) = (conventional.hidden[0] as f64, conventional.hidden[1] as f64);
    let (prop, conv) = match chi {
        Chi::M => (3.0 * (fz + h) * fn_ / fs + h, 3.0 * h1 + h2),
        Chi::P => (3.0 * h * fn_ / fs + h + 1.0, 3.0 * h1 + h2 + 1.0),
        Chi::A => (3.0 * (fz + h + 1.0) * fn_ / fs + h + 1.0, 3.0 * h1 + h2 + 1.0),
    };
    1.0 - prop / conv
}
