//! Effective channels, the half-duplex rate and the full-duplex sum-rate.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};

/// Wraps an angle into `[-pi, pi)`. Values already in range are returned
/// untouched, so wrapping is exactly idempotent.
pub fn wrap_phase(x: f64) -> f64 {
    if (-PI..PI).contains(&x) {
        return x;
    }
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        -PI
    } else if r < -PI {
        // rounding in the subtraction above
        -PI
    } else {
        r
    }
}

/// RIS phase shifts, one per element, kept in `[-pi, pi)`. The reflection
/// matrix is `diag(exp(j*phi))` and is never materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftVector(Vec<f64>);

impl PhaseShiftVector {
    /// Wraps every entry.
    pub fn new(phi: Vec<f64>) -> Self {
        Self(phi.into_iter().map(wrap_phase).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Transmit beamformer with its power budget (linear, mW).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    w: DVector<Complex64>,
    pmax: f64,
}

/// Slack allowed on `||w||^2 <= pmax`.
pub const POWER_SLACK: f64 = 1e-9;

impl Beamformer {
    pub fn new(w: DVector<Complex64>, pmax: f64) -> Result<Self> {
        if !(pmax > 0.0 && pmax.is_finite()) {
            return Err(Error::Domain(format!("pmax must be positive, got {pmax}")));
        }
        if !w.iter().all(|z| z.is_finite()) {
            return Err(Error::Numeric("beamformer has non-finite entries".into()));
        }
        let p = w.norm_squared();
        if p > pmax * (1.0 + POWER_SLACK) {
            return Err(Error::Domain(format!("beamformer power {p} exceeds budget {pmax}")));
        }
        Ok(Self { w, pmax })
    }

    /// Scales `w` down onto the power sphere if it is over budget.
    pub fn clamped(w: DVector<Complex64>, pmax: f64) -> Result<Self> {
        let p = w.norm_squared();
        let w = if p > pmax { w.map(|z| z * (pmax / p).sqrt()) } else { w };
        Self::new(w, pmax)
    }

    pub fn zeros(m: usize, pmax: f64) -> Self {
        Self { w: DVector::zeros(m), pmax }
    }

    pub fn w(&self) -> &DVector<Complex64> {
        &self.w
    }

    pub fn pmax(&self) -> f64 {
        self.pmax
    }

    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatingMode {
    Hd,
    Fd,
}

impl fmt::Display for OperatingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatingMode::Hd => "hd",
            OperatingMode::Fd => "fd",
        })
    }
}

impl FromStr for OperatingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hd" => Ok(OperatingMode::Hd),
            "fd" => Ok(OperatingMode::Fd),
            other => Err(Error::Config(format!("unknown mode '{other}', expected hd or fd"))),
        }
    }
}

/// A node of the two-node system: S1 is the BS, S2 the UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Bs,
    Ue,
}

impl Node {
    /// The node at the other end of the link.
    pub fn other(self) -> Node {
        match self {
            Node::Bs => Node::Ue,
            Node::Ue => Node::Bs,
        }
    }
}

fn check_phases(ch: &ChannelSet, phi: &PhaseShiftVector) -> Result<()> {
    if phi.len() != ch.n_elements() {
        return Err(Error::Shape(format!(
            "{} phases for {} RIS elements",
            phi.len(),
            ch.n_elements()
        )));
    }
    Ok(())
}

/// Row vector `h_RS^H * Theta * H_SR + h_direct^H` seen by the transmitter
/// serving `receiver`, returned as its `M` entries (multiply by `w` without
/// further conjugation).
pub fn effective_channel(ch: &ChannelSet, phi: &PhaseShiftVector, receiver: Node) -> Result<DVector<Complex64>> {
    check_phases(ch, phi)?;
    let (h_rs, h_sr, h_direct) = match receiver {
        Node::Ue => (&ch.h_r_s2, &ch.h_s1_r, &ch.h_s1_s2),
        Node::Bs => (&ch.h_r_s1, &ch.h_s2_r, &ch.h_s2_s1),
    };
    if h_sr.nrows() != h_rs.len() || h_sr.ncols() != h_direct.len() {
        return Err(Error::Shape("inconsistent channel dimensions".into()));
    }
    // weights c_n = conj(h_RS[n]) * exp(j*phi_n)
    let coeffs: Vec<Complex64> = h_rs
        .iter()
        .zip(phi.as_slice())
        .map(|(h, &p)| h.conj() * Complex64::from_polar(1.0, p))
        .collect();
    let m = h_direct.len();
    Ok(DVector::from_fn(m, |col, _| {
        let reflected: Complex64 = h_sr.column(col).iter().zip(&coeffs).map(|(h, c)| c * h).sum();
        reflected + h_direct[col].conj()
    }))
}

/// Self-interference row `h_SS^H` at `node`, as `M` entries.
pub fn si_channel(ch: &ChannelSet, node: Node) -> DVector<Complex64> {
    match node {
        Node::Bs => ch.h_s1_s1.map(|z| z.conj()),
        Node::Ue => ch.h_s2_s2.map(|z| z.conj()),
    }
}

/// `|row . w|^2` without conjugating `w`.
pub fn gain(row: &DVector<Complex64>, w: &DVector<Complex64>) -> Result<f64> {
    if row.len() != w.len() {
        return Err(Error::Shape(format!("channel length {} vs beamformer length {}", row.len(), w.len())));
    }
    Ok(row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
}

fn check_noise(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("noise power must be positive, got {sigma2}")))
    }
}

/// Downlink HD rate in bps/Hz with the BS transmitting `w_bs`.
pub fn rate_hd(ch: &ChannelSet, phi: &PhaseShiftVector, w_bs: &Beamformer, sigma2: f64) -> Result<f64> {
    check_noise(sigma2)?;
    let g = effective_channel(ch, phi, Node::Ue)?;
    Ok((gain(&g, w_bs.w())? / sigma2).ln_1p() / std::f64::consts::LN_2)
}

/// Per-link FD rates `(rate at BS, rate at UE)` in bps/Hz.
pub fn link_rates_fd(
    ch: &ChannelSet,
    phi: &PhaseShiftVector,
    w_bs: &Beamformer,
    w_ue: &Beamformer,
    sigma2: f64,
) -> Result<(f64, f64)> {
    check_noise(sigma2)?;
    let rate = |rx: Node, w_tx: &Beamformer, w_rx: &Beamformer| -> Result<f64> {
        let signal = gain(&effective_channel(ch, phi, rx)?, w_tx.w())?;
        let si = gain(&si_channel(ch, rx), w_rx.w())?;
        Ok((signal / (si + sigma2)).ln_1p() / std::f64::consts::LN_2)
    };
    Ok((rate(Node::Bs, w_ue, w_bs)?, rate(Node::Ue, w_bs, w_ue)?))
}

/// FD sum-rate: both links carry residual SI from the receiver's own
/// transmitter in the denominator.
pub fn sum_rate_fd(
    ch: &ChannelSet,
    phi: &PhaseShiftVector,
    w_bs: &Beamformer,
    w_ue: &Beamformer,
    sigma2: f64,
) -> Result<f64> {
    let (r1, r2) = link_rates_fd(ch, phi, w_bs, w_ue, sigma2)?;
    Ok(r1 + r2)
}
