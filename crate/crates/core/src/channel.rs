//! Stochastic channel realizations for the BS / RIS / UE link geometry.
//!
//! Unit convention: every absolute power in this crate is in milliwatts and
//! every gain is a dimensionless power ratio. dB quantities are converted with
//! [`db_to_linear`] and dBm quantities with [`dbm_to_mw`]. Only ratios enter the
//! rate formulas, so the choice of mW cancels out, but mixing dBW and dBm does
//! not.
//!
//! Gains (path loss, antenna and RIS gains, penetration loss) are composed in
//! dB, linearized, and folded into the channel *amplitude* as
//! `sqrt(linear power gain)`. Downstream modules only ever see effective
//! channels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// BS / RIS / UE placement. The BS sits at the origin, the UE at horizontal
/// distance `d1`, and the RIS at horizontal offset `d0` from the BS and
/// vertical offset `dv` from the BS-UE line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    d0: f64,
    d1: f64,
    dv: f64,
}

impl Geometry {
    pub fn new(d0: f64, d1: f64, dv: f64) -> Result<Self> {
        if !(d1.is_finite() && d1 > 0.0) {
            return Err(Error::Domain(format!("d1 must be positive, got {d1}")));
        }
        if !(dv.is_finite() && dv > 0.0) {
            return Err(Error::Domain(format!("dv must be positive, got {dv}")));
        }
        if !(d0.is_finite() && (0.0..=d1).contains(&d0)) {
            return Err(Error::Domain(format!("d0 must lie in [0, d1={d1}], got {d0}")));
        }
        Ok(Self { d0, d1, dv })
    }

    /// `d0 = 1 m`, `d1 = 50 m`, `dv = 2 m`.
    pub fn reference() -> Self {
        Self { d0: 1.0, d1: 50.0, dv: 2.0 }
    }

    pub fn with_d0(self, d0: f64) -> Result<Self> {
        Self::new(d0, self.d1, self.dv)
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    /// BS-RIS distance.
    pub fn d2(&self) -> f64 {
        self.d0.hypot(self.dv)
    }

    /// RIS-UE distance.
    pub fn d3(&self) -> f64 {
        (self.d1 - self.d0).hypot(self.dv)
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Self::reference()
    }
}

/// Path-loss, fading, gain and power parameters of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Path loss at the reference distance, dB (negative number).
    pub pl0_db: f64,
    /// Reference distance, meters.
    pub dr: f64,
    pub zeta_bu: f64,
    pub zeta_br: f64,
    pub zeta_ur: f64,
    pub rician_k: f64,
    /// Total gain of each self-interference channel, dB.
    pub si_pl_db: f64,
    pub bs_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    /// Applied once per RIS-adjacent link, not per element.
    pub ris_gain_dbi: f64,
    /// Penetration loss on the BS-UE and RIS-UE links, dB (positive number).
    pub penetration_db: f64,
    pub sigma2_dbm: f64,
    pub pmax_dbm: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            pl0_db: -30.0,
            dr: 1.0,
            zeta_bu: 3.0,
            zeta_br: 2.0,
            zeta_ur: 2.0,
            rician_k: 10.0,
            si_pl_db: -95.0,
            bs_gain_dbi: 0.0,
            ue_gain_dbi: 0.0,
            ris_gain_dbi: 5.0,
            penetration_db: 10.0,
            sigma2_dbm: -80.0,
            pmax_dbm: 5.0,
        }
    }
}

impl LinkBudget {
    /// Gains may be `-inf` (a "no link" proxy) but never NaN or `+inf`; the
    /// noise and transmit powers must be finite so their linear values are
    /// strictly positive.
    pub fn validate(&self) -> Result<()> {
        let gains = [
            ("pl0_db", self.pl0_db),
            ("si_pl_db", self.si_pl_db),
            ("bs_gain_dbi", self.bs_gain_dbi),
            ("ue_gain_dbi", self.ue_gain_dbi),
            ("ris_gain_dbi", self.ris_gain_dbi),
        ];
        for (name, v) in gains {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::Domain(format!("{name} must be finite or -inf, got {v}")));
            }
        }
        for (name, v) in [
            ("zeta_bu", self.zeta_bu),
            ("zeta_br", self.zeta_br),
            ("zeta_ur", self.zeta_ur),
            ("penetration_db", self.penetration_db),
            ("sigma2_dbm", self.sigma2_dbm),
            ("pmax_dbm", self.pmax_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.dr.is_finite() && self.dr > 0.0) {
            return Err(Error::Domain(format!("reference distance must be positive, got {}", self.dr)));
        }
        if !(self.rician_k >= 0.0) {
            return Err(Error::Domain(format!("Rician factor must be >= 0, got {}", self.rician_k)));
        }
        Ok(())
    }

    /// Noise power in mW.
    pub fn sigma2_mw(&self) -> f64 {
        dbm_to_mw(self.sigma2_dbm)
    }

    /// Per-node transmit power budget in mW.
    pub fn pmax_mw(&self) -> f64 {
        dbm_to_mw(self.pmax_dbm)
    }
}

/// `PL = PL_0 - 10 * zeta * log10(d / D_r)` in dB.
pub fn path_loss_db(d: f64, zeta: f64, budget: &LinkBudget) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    Ok(budget.pl0_db - 10.0 * zeta * (d / budget.dr).log10())
}

/// Power ratio from dB.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Milliwatts from dBm.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

fn check_power(pl_linear: f64) -> Result<()> {
    if pl_linear >= 0.0 && pl_linear.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("linear power gain must be finite and >= 0, got {pl_linear}")))
    }
}

fn unit_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. `CN(0, pl_linear)` entries.
pub fn sample_rayleigh<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    pl_linear: f64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    check_power(pl_linear)?;
    let amp = pl_linear.sqrt();
    // column-major fill order is part of the reproducibility contract
    Ok(DMatrix::from_fn(rows, cols, |_, _| unit_cn(rng) * amp))
}

/// Half-wavelength uniform linear array response, `a_n = exp(j*pi*n*cos(theta))`.
pub fn ula_steering(len: usize, theta: f64) -> DVector<Complex64> {
    let k = PI * theta.cos();
    DVector::from_fn(len, |n, _| Complex64::from_polar(1.0, k * n as f64))
}

/// Rician channel `sqrt(pl) * (sqrt(K/(K+1)) * H_los + sqrt(1/(K+1)) * H_nlos)`.
///
/// `H_los = a(theta_r) a(theta_t)^H` with both angles drawn from `U[0, pi)`
/// once per call, so every LOS entry has unit modulus.
pub fn sample_rician<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    pl_linear: f64,
    k_factor: f64,
    rng: &mut R,
) -> Result<DMatrix<Complex64>> {
    check_power(pl_linear)?;
    if !(k_factor >= 0.0) {
        return Err(Error::Domain(format!("Rician factor must be >= 0, got {k_factor}")));
    }
    let theta_r = rng.random_range(0.0..PI);
    let theta_t = rng.random_range(0.0..PI);
    let a_r = ula_steering(rows, theta_r);
    let a_t = ula_steering(cols, theta_t);
    let los_w = (k_factor / (k_factor + 1.0)).sqrt();
    let nlos_w = (1.0 / (k_factor + 1.0)).sqrt();
    let amp = pl_linear.sqrt();
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        let los = a_r[r] * a_t[c].conj();
        (los * los_w + unit_cn(rng) * nlos_w) * amp
    }))
}

/// One realization of every channel in the two-node system.
///
/// Naming follows "from_to": `h_s1_r` is BS (S1) to RIS, `h_r_s2` is RIS to UE
/// (S2), `h_s1_s2` is the direct BS to UE channel, and `h_s1_s1` is the BS
/// self-interference channel. Vectors are stored as column vectors; the rate
/// formulas use their conjugate transposes.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_s1_r: DMatrix<Complex64>,
    pub h_s2_r: DMatrix<Complex64>,
    pub h_r_s1: DVector<Complex64>,
    pub h_r_s2: DVector<Complex64>,
    pub h_s1_s2: DVector<Complex64>,
    pub h_s2_s1: DVector<Complex64>,
    pub h_s1_s1: DVector<Complex64>,
    pub h_s2_s2: DVector<Complex64>,
}

impl ChannelSet {
    /// All-zero channels of the given size.
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            h_s1_r: DMatrix::zeros(n, m),
            h_s2_r: DMatrix::zeros(n, m),
            h_r_s1: DVector::zeros(n),
            h_r_s2: DVector::zeros(n),
            h_s1_s2: DVector::zeros(m),
            h_s2_s1: DVector::zeros(m),
            h_s1_s1: DVector::zeros(m),
            h_s2_s2: DVector::zeros(m),
        }
    }

    pub fn n_elements(&self) -> usize {
        self.h_r_s1.len()
    }

    pub fn m_antennas(&self) -> usize {
        self.h_s1_s2.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n_elements(), self.m_antennas());
        let mats = [("h_s1_r", &self.h_s1_r), ("h_s2_r", &self.h_s2_r)];
        for (name, h) in mats {
            if h.shape() != (n, m) {
                return Err(Error::Shape(format!("{name} is {:?}, expected ({n}, {m})", h.shape())));
            }
        }
        let vecs = [
            ("h_r_s2", &self.h_r_s2, n),
            ("h_s2_s1", &self.h_s2_s1, m),
            ("h_s1_s1", &self.h_s1_s1, m),
            ("h_s2_s2", &self.h_s2_s2, m),
        ];
        for (name, h, len) in vecs {
            if h.len() != len {
                return Err(Error::Shape(format!("{name} has length {}, expected {len}", h.len())));
            }
        }
        let finite = self.h_s1_r.iter().chain(self.h_s2_r.iter()).all(|z| z.is_finite())
            && [&self.h_r_s1, &self.h_r_s2, &self.h_s1_s2, &self.h_s2_s1, &self.h_s1_s1, &self.h_s2_s2]
                .iter()
                .all(|v| v.iter().all(|z| z.is_finite()));
        if !finite {
            return Err(Error::Numeric("channel set contains non-finite entries".into()));
        }
        Ok(())
    }

    /// Copy with every RIS-adjacent channel zeroed (direct and SI paths only).
    pub fn without_ris(&self) -> Self {
        let (n, m) = (self.n_elements(), self.m_antennas());
        Self {
            h_s1_r: DMatrix::zeros(n, m),
            h_s2_r: DMatrix::zeros(n, m),
            h_r_s1: DVector::zeros(n),
            h_r_s2: DVector::zeros(n),
            ..self.clone()
        }
    }
}

/// Per-link linear power gains after composing path loss, antenna gains and
/// penetration loss in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub bs_ue: f64,
    pub bs_ris: f64,
    pub ris_ue: f64,
    pub si: f64,
}

impl LinkGains {
    pub fn compute(geometry: &Geometry, budget: &LinkBudget) -> Result<Self> {
        budget.validate()?;
        let bs_ue_db = path_loss_db(geometry.d1(), budget.zeta_bu, budget)? - budget.penetration_db
            + budget.bs_gain_dbi
            + budget.ue_gain_dbi;
        let bs_ris_db =
            path_loss_db(geometry.d2(), budget.zeta_br, budget)? + budget.bs_gain_dbi + budget.ris_gain_dbi;
        let ris_ue_db = path_loss_db(geometry.d3(), budget.zeta_ur, budget)? + budget.ris_gain_dbi
            + budget.ue_gain_dbi
            - budget.penetration_db;
        Ok(Self {
            bs_ue: db_to_linear(bs_ue_db),
            bs_ris: db_to_linear(bs_ris_db),
            ris_ue: db_to_linear(ris_ue_db),
            si: db_to_linear(budget.si_pl_db),
        })
    }
}

/// Draws one [`ChannelSet`]. BS-UE channels are Rayleigh; BS-RIS, RIS-UE and
/// SI channels are Rician with the budget's K factor. Links are drawn
/// independently in both directions, in a fixed order.
pub fn generate_channel_set<R: Rng + ?Sized>(
    geometry: &Geometry,
    budget: &LinkBudget,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<ChannelSet> {
    if n == 0 || m == 0 {
        return Err(Error::Domain(format!("need n >= 1 and m >= 1, got n={n}, m={m}")));
    }
    let g = LinkGains::compute(geometry, budget)?;
    let k = budget.rician_k;
    let col = |mtx: DMatrix<Complex64>| -> DVector<Complex64> { mtx.column(0).into_owned() };

    let h_s1_s2 = col(sample_rayleigh(m, 1, g.bs_ue, rng)?);
    let h_s2_s1 = col(sample_rayleigh(m, 1, g.bs_ue, rng)?);
    let h_s1_r = sample_rician(n, m, g.bs_ris, k, rng)?;
    let h_r_s1 = col(sample_rician(n, 1, g.bs_ris, k, rng)?);
    let h_s2_r = sample_rician(n, m, g.ris_ue, k, rng)?;
    let h_r_s2 = col(sample_rician(n, 1, g.ris_ue, k, rng)?);
    let h_s1_s1 = col(sample_rician(m, 1, g.si, k, rng)?);
    let h_s2_s2 = col(sample_rician(m, 1, g.si, k, rng)?);

    let set = ChannelSet { h_s1_r, h_s2_r, h_r_s1, h_r_s2, h_s1_s2, h_s2_s1, h_s1_s1, h_s2_s2 };
    set.validate()?;
    Ok(set)
}
