//! Transmit beamformers for fixed RIS phases.
//!
//! HD uses maximum ratio transmission. FD alternates a per-node update
//! `w = (delta * s s^H + v I)^{-1} b` where `s` is the SI channel of the
//! updating node, `b` and `delta` are built from a feasible point, and the
//! dual variable `v >= 0` is found by bisection on the power constraint.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::sigmodel::{
    effective_channel, gain, rate_hd, si_channel, sum_rate_fd, Beamformer, Node, OperatingMode, PhaseShiftVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSolverConfig {
    /// Stop when the sum-rate changes by at most this much (bps/Hz).
    pub tol: f64,
    pub max_iter: usize,
    /// Relative tolerance on `||w(v)||^2 = pmax` for an active constraint.
    pub bisection_tol: f64,
}

impl Default for FdSolverConfig {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 50, bisection_tol: 1e-8 }
    }
}

/// `w = sqrt(pmax) * h^H / ||h||` for the effective row `h`.
pub fn mrt_beamformer(h_eff: &DVector<Complex64>, pmax: f64) -> Result<Beamformer> {
    let norm = h_eff.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    if !norm.is_finite() {
        return Err(Error::Numeric("effective channel norm is not finite".into()));
    }
    let scale = pmax.sqrt() / norm;
    Beamformer::clamped(h_eff.map(|z| z.conj() * scale), pmax)
}

/// MRT, or the zero beamformer when the channel is identically zero.
pub fn mrt_or_zero(h_eff: &DVector<Complex64>, pmax: f64) -> Result<Beamformer> {
    match mrt_beamformer(h_eff, pmax) {
        Err(Error::DegenerateChannel) => Ok(Beamformer::zeros(h_eff.len(), pmax)),
        other => other,
    }
}

fn dot_h(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    // a^H b
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `(delta * s s^H + v I)^{-1} b` through Sherman-Morrison.
///
/// At `v = 0` the system is singular: with `delta * ||s||^2 > 0` the
/// least-norm least-squares solution is returned, and with a zero matrix the
/// identity convention `w = b` applies.
pub fn dual_solution(b: &DVector<Complex64>, s: &DVector<Complex64>, delta: f64, v: f64) -> Result<DVector<Complex64>> {
    if b.len() != s.len() {
        return Err(Error::Shape(format!("b has length {}, s has length {}", b.len(), s.len())));
    }
    if !(delta >= 0.0 && v >= 0.0) {
        return Err(Error::Domain(format!("need delta >= 0 and v >= 0, got delta={delta}, v={v}")));
    }
    let s2 = s.norm_squared();
    let shb = dot_h(s, b);
    let w = if v > 0.0 {
        let k = delta * shb / (v + delta * s2);
        (b - s * k) / Complex64::from(v)
    } else if delta * s2 > 0.0 {
        s * (shb / (delta * s2 * s2))
    } else {
        b.clone()
    };
    if w.iter().all(|z| z.is_finite()) {
        Ok(w)
    } else {
        Err(Error::Numeric(format!("non-finite dual solution at v={v}, delta={delta}")))
    }
}

/// Same system solved by Cholesky on the assembled Hermitian matrix. Needs
/// `v > 0` (positive definite).
pub fn dual_solution_direct(
    b: &DVector<Complex64>,
    s: &DVector<Complex64>,
    delta: f64,
    v: f64,
) -> Result<DVector<Complex64>> {
    let m = b.len();
    let a = DMatrix::from_fn(m, m, |r, c| {
        let diag = if r == c { v } else { 0.0 };
        s[r] * s[c].conj() * delta + Complex64::from(diag)
    });
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numeric(format!("system not positive definite (v={v}, delta={delta})")))?;
    Ok(chol.solve(b))
}

/// Limit of `||w(v)||^2` as `v -> 0+`; infinite when `b` has a component
/// outside the range of `delta * s s^H`.
fn power_at_zero(b: &DVector<Complex64>, s: &DVector<Complex64>, delta: f64) -> f64 {
    let bn = b.norm_squared();
    if bn == 0.0 {
        return 0.0;
    }
    let s2 = s.norm_squared();
    if delta * s2 == 0.0 {
        return f64::INFINITY;
    }
    let shb = dot_h(s, b);
    let perp = (b - s * (shb / s2)).norm_squared();
    if perp > 1e-24 * bn {
        return f64::INFINITY;
    }
    shb.norm_sqr() / (delta * delta * s2 * s2 * s2)
}

/// Smallest `v >= 0` with `||w(v)||^2 <= pmax`.
///
/// Returns 0 when the constraint is inactive. Otherwise bisects the
/// non-increasing map `v -> ||w(v)||^2` over `[0, ||b|| / sqrt(pmax)]` and
/// returns a `v` on the feasible side with
/// `| ||w(v)||^2 - pmax | <= tol * pmax`.
pub fn bisection_dual(b: &DVector<Complex64>, s: &DVector<Complex64>, delta: f64, pmax: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("bisection tolerance must be positive, got {tol}")));
    }
    if !(pmax > 0.0) {
        return Err(Error::Domain(format!("pmax must be positive, got {pmax}")));
    }
    if b.len() != s.len() {
        return Err(Error::Shape(format!("b has length {}, s has length {}", b.len(), s.len())));
    }
    if power_at_zero(b, s, delta) <= pmax {
        return Ok(0.0);
    }
    let power = |v: f64| -> Result<f64> { Ok(dual_solution(b, s, delta, v)?.norm_squared()) };

    let mut lo = 0.0;
    let mut hi = b.norm() / pmax.sqrt();
    // ||w(hi)|| <= ||b|| / hi = sqrt(pmax) analytically; widen if rounding disagrees
    let mut widen = 0;
    while power(hi)? > pmax {
        lo = hi;
        hi *= 2.0;
        widen += 1;
        if widen > 64 || !hi.is_finite() {
            return Err(Error::Numeric(format!(
                "bisection bracket failed: ||b||={}, delta={delta}, pmax={pmax}",
                b.norm()
            )));
        }
    }
    for _ in 0..500 {
        let p_hi = power(hi)?;
        if (p_hi - pmax).abs() <= tol * pmax {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power(mid)? > pmax {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_hi = power(hi)?;
    if (p_hi - pmax).abs() <= tol * pmax {
        Ok(hi)
    } else {
        Err(Error::Numeric(format!(
            "bisection did not reach tolerance: v in [{lo}, {hi}], ||w||^2={p_hi}, pmax={pmax}"
        )))
    }
}

/// Intermediate quantities of one FD beamformer update.
#[derive(Debug, Clone, PartialEq)]
pub struct FdUpdate {
    /// `b_i`: signal power delivered by the fixed beamformer on the opposite link.
    pub b: f64,
    /// `b~_i`: SI from the fixed beamformer at its own node plus noise.
    pub b_tilde: f64,
    /// SI of the feasible point at the updating node plus noise.
    pub q: f64,
    pub b_vec: DVector<Complex64>,
    pub delta: f64,
    pub v: f64,
    pub w: Beamformer,
}

/// Updates the beamformer of `target` with the other node's beamformer
/// `fixed` held constant, linearizing around the feasible point `feasible`.
///
/// With `i` the node receiving from `target` (so `target` is `i-bar`):
/// `b_i = |h_i^H w_i|^2`, `b~_i = |h_{SiSi}^H w_i|^2 + sigma2`,
/// `b = (1/b~_i)(1 + b_i/q) h h^H w~`, `delta = b_i(|h^H w~|^2 + b~_i) / (b~_i q^2)`
/// with `q = |h_{SiSi-bar}^H w~|^2 + sigma2` and `h` the effective channel into `i`.
#[allow(clippy::too_many_arguments)]
pub fn fd_beamformer_update(
    ch: &ChannelSet,
    phi: &PhaseShiftVector,
    target: Node,
    fixed: &Beamformer,
    feasible: &Beamformer,
    pmax: f64,
    sigma2: f64,
    bisection_tol: f64,
) -> Result<FdUpdate> {
    if feasible.power() > pmax * (1.0 + 1e-9) {
        return Err(Error::Domain("feasible point violates the power budget".into()));
    }
    let rx = target.other();
    let h_into_rx = effective_channel(ch, phi, rx)?;
    let h_into_target = effective_channel(ch, phi, target)?;
    let si_rx = si_channel(ch, rx);
    let si_target = si_channel(ch, target);

    let b = gain(&h_into_target, fixed.w())?;
    let b_tilde = gain(&si_rx, fixed.w())? + sigma2;
    let q = gain(&si_target, feasible.w())? + sigma2;
    let proj: Complex64 = h_into_rx.iter().zip(feasible.w().iter()).map(|(a, w)| a * w).sum();
    let coeff = (1.0 + b / q) / b_tilde;
    let b_vec = h_into_rx.map(|z| z.conj() * proj * coeff);
    let delta = b * (proj.norm_sqr() + b_tilde) / (b_tilde * q * q);
    if !delta.is_finite() || !b_vec.iter().all(|z| z.is_finite()) {
        return Err(Error::Numeric(format!("non-finite FD update terms (b={b}, b~={b_tilde}, q={q})")));
    }
    // column s with s s^H = h_{SS} h_{SS}^H
    let s = si_target.map(|z| z.conj());
    let v = bisection_dual(&b_vec, &s, delta, pmax, bisection_tol)?;
    let w = dual_solution(&b_vec, &s, delta, v)?;
    let w = Beamformer::clamped(w, pmax)?;
    Ok(FdUpdate { b, b_tilde, q, b_vec, delta, v, w })
}

/// State of the alternating FD loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolverState {
    pub w_bs: Beamformer,
    pub w_ue: Beamformer,
    pub iteration: usize,
    pub last_sum_rate: f64,
    pub last_update: Option<FdUpdate>,
}

/// Result of [`fd_alternating_solve`]: the best iterate seen.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub w_bs: Beamformer,
    pub w_ue: Beamformer,
    pub sum_rate: f64,
    pub initial_sum_rate: f64,
    pub iterations: usize,
}

/// MRT initialization of both FD beamformers toward their receivers.
pub fn fd_initial_state(ch: &ChannelSet, phi: &PhaseShiftVector, pmax: f64, sigma2: f64) -> Result<FdSolverState> {
    let w_bs = mrt_or_zero(&effective_channel(ch, phi, Node::Ue)?, pmax)?;
    let w_ue = mrt_or_zero(&effective_channel(ch, phi, Node::Bs)?, pmax)?;
    let last_sum_rate = sum_rate_fd(ch, phi, &w_bs, &w_ue, sigma2)?;
    Ok(FdSolverState { w_bs, w_ue, iteration: 0, last_sum_rate, last_update: None })
}

/// Alternates BS and UE updates from the MRT initialization until the
/// sum-rate moves by at most `cfg.tol` or `cfg.max_iter` rounds pass, and
/// returns the best iterate.
pub fn fd_alternating_solve(
    ch: &ChannelSet,
    phi: &PhaseShiftVector,
    pmax: f64,
    sigma2: f64,
    cfg: &FdSolverConfig,
) -> Result<FdSolution> {
    if cfg.max_iter == 0 {
        return Err(Error::Config("FD solver needs max_iter >= 1".into()));
    }
    let mut state = fd_initial_state(ch, phi, pmax, sigma2)?;
    let initial_sum_rate = state.last_sum_rate;
    let mut best = (state.w_bs.clone(), state.w_ue.clone(), initial_sum_rate);
    while state.iteration < cfg.max_iter {
        let up_bs = fd_beamformer_update(ch, phi, Node::Bs, &state.w_ue, &state.w_bs, pmax, sigma2, cfg.bisection_tol)?;
        state.w_bs = up_bs.w;
        let up_ue = fd_beamformer_update(ch, phi, Node::Ue, &state.w_bs, &state.w_ue, pmax, sigma2, cfg.bisection_tol)?;
        state.w_ue = up_ue.w.clone();
        state.last_update = Some(up_ue);
        state.iteration += 1;
        let rate = sum_rate_fd(ch, phi, &state.w_bs, &state.w_ue, sigma2)?;
        if rate > best.2 {
            best = (state.w_bs.clone(), state.w_ue.clone(), rate);
        }
        let change = (rate - state.last_sum_rate).abs();
        state.last_sum_rate = rate;
        if change <= cfg.tol {
            break;
        }
    }
    Ok(FdSolution { w_bs: best.0, w_ue: best.1, sum_rate: best.2, initial_sum_rate, iterations: state.iteration })
}

/// Evaluates the mode's objective at the optimal beamformers for given phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEvaluator {
    pub pmax: f64,
    pub sigma2: f64,
    pub fd: FdSolverConfig,
}

impl RateEvaluator {
    pub fn new(pmax: f64, sigma2: f64) -> Self {
        Self { pmax, sigma2, fd: FdSolverConfig::default() }
    }

    /// HD: MRT at the BS (zero rate on a zero channel). FD: alternating solve.
    pub fn rate(&self, ch: &ChannelSet, phi: &PhaseShiftVector, mode: OperatingMode) -> Result<f64> {
        match mode {
            OperatingMode::Hd => {
                let w = mrt_or_zero(&effective_channel(ch, phi, Node::Ue)?, self.pmax)?;
                rate_hd(ch, phi, &w, self.sigma2)
            }
            OperatingMode::Fd => Ok(fd_alternating_solve(ch, phi, self.pmax, self.sigma2, &self.fd)?.sum_rate),
        }
    }
}
