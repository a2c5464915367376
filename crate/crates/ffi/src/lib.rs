//! C ABI for risdrl.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_parse`/
//! `*_generate`/`risdrl_train` and released by the matching `*_free`. Every
//! fallible call returns a [`RisdrlStatus`]; on failure the message is kept
//! per thread and can be copied out with [`risdrl_last_error_message`].
//! Panics never unwind into C, they are reported as `RISDRL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use risdrl::channel::ChannelSet;
use risdrl::complexity::{conventional_pair, proposed_pair, reduction_at, Chi};
use risdrl::harness::{self, Design, ExperimentConfig, RunOutput, RunSpec};
use risdrl::seed::stream;
use risdrl::sigmodel::{OperatingMode, PhaseShiftVector};
use risdrl::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisdrlStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad configuration, key, grid or argument value.
    InvalidArgument = 2,
    /// Lengths that do not agree, including undersized output buffers.
    Shape = 3,
    DegenerateChannel = 4,
    Numeric = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisdrlMode {
    Hd = 0,
    Fd = 1,
}

/// Cost measure used by [`risdrl_reduction`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisdrlChi {
    Parameters = 0,
    Multiplications = 1,
    Additions = 2,
}

/// Actor plus critic cost of one design.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RisdrlComplexity {
    pub parameters: u64,
    pub multiplications: u64,
    pub additions: u64,
}

/// Experiment configuration handle.
pub struct RisdrlConfig {
    inner: ExperimentConfig,
}

/// One channel realization.
pub struct RisdrlChannel {
    inner: ChannelSet,
}

/// Outcome of a training run.
pub struct RisdrlTraining {
    inner: RunOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RisdrlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) | Error::Config(_) => RisdrlStatus::InvalidArgument,
            Error::Shape(_) => RisdrlStatus::Shape,
            Error::DegenerateChannel => RisdrlStatus::DegenerateChannel,
            Error::Numeric(_) => RisdrlStatus::Numeric,
            Error::Parse { .. } | Error::Json(_) => RisdrlStatus::Parse,
            Error::Io(_) | Error::Csv(_) => RisdrlStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RisdrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RisdrlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            RisdrlStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RisdrlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RisdrlStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err(Failure(RisdrlStatus::Shape, format!("buffer holds {len} values, {} needed", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

fn mode_of(m: RisdrlMode) -> OperatingMode {
    match m {
        RisdrlMode::Hd => OperatingMode::Hd,
        RisdrlMode::Fd => OperatingMode::Fd,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn risdrl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `len > 0`). Returns the full message length plus
/// one, or 0 when the last call succeeded. `buf` may be null to query the size.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn risdrl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Creates a configuration holding the defaults.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn risdrl_config_new(out: *mut *mut RisdrlConfig) -> RisdrlStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(RisdrlConfig { inner: ExperimentConfig::default() }))))
}

/// Parses `key = value` configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn risdrl_config_parse(text: *const c_char, out: *mut *mut RisdrlConfig) -> RisdrlStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let inner = ExperimentConfig::parse(text, Path::new("<ffi>"))?;
        inner.validate()?;
        write_out(out, Box::into_raw(Box::new(RisdrlConfig { inner })))
    })
}

/// Sets one configuration key using the text grammar. The configuration is
/// left unchanged if the result would be invalid.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn risdrl_config_set(
    cfg: *mut RisdrlConfig,
    key: *const c_char,
    value: *const c_char,
) -> RisdrlStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let (key, value) = (str_arg(key, "key")?, str_arg(value, "value")?);
        let mut next = cfg.inner.clone();
        next.set(key, value)?;
        next.validate()?;
        cfg.inner = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risdrl_config_free(cfg: *mut RisdrlConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Draws the channels of episode `episode` of the run seeded by `seed`, with
/// `n` RIS elements and the configuration's geometry and antennas.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn risdrl_channel_generate(
    cfg: *const RisdrlConfig,
    n: usize,
    seed: u64,
    episode: usize,
    out: *mut *mut RisdrlChannel,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        let inner = harness::episode_channels(cfg, &cfg.geometry, n, seed, episode)?;
        write_out(out, Box::into_raw(Box::new(RisdrlChannel { inner })))
    })
}

/// Number of RIS elements, 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn risdrl_channel_n_elements(ch: *const RisdrlChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.inner.n_elements())
}

/// # Safety
/// `ch` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risdrl_channel_free(ch: *mut RisdrlChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Achievable rate (HD) or sum rate (FD) in bps/Hz for phases `phi[0..len]`
/// with optimized beamformers.
///
/// # Safety
/// Handles must be live, `phi` must point to `len` values, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn risdrl_rate(
    cfg: *const RisdrlConfig,
    ch: *const RisdrlChannel,
    phi: *const f64,
    len: usize,
    mode: RisdrlMode,
    out: *mut f64,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        let ch = &deref(ch, "channel")?.inner;
        if phi.is_null() {
            return Err(null("phi"));
        }
        let phi = PhaseShiftVector::new(std::slice::from_raw_parts(phi, len).to_vec());
        write_out(out, harness::evaluator(cfg).rate(ch, &phi, mode_of(mode))?)
    })
}

/// Mean rate over `trials` uniformly random phase vectors.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn risdrl_random_phase_baseline(
    cfg: *const RisdrlConfig,
    ch: *const RisdrlChannel,
    mode: RisdrlMode,
    trials: usize,
    seed: u64,
    out: *mut f64,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        let ch = &deref(ch, "channel")?.inner;
        let mut rng = stream(seed, "random", 0);
        let r = harness::random_phase_baseline(ch, mode_of(mode), &harness::evaluator(cfg), trials, &mut rng)?;
        write_out(out, r)
    })
}

/// Rate with the RIS links removed.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn risdrl_without_ris_rate(
    cfg: *const RisdrlConfig,
    ch: *const RisdrlChannel,
    mode: RisdrlMode,
    out: *mut f64,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        let ch = &deref(ch, "channel")?.inner;
        write_out(out, harness::without_ris_rate(ch, mode_of(mode), &harness::evaluator(cfg))?)
    })
}

/// Actor plus critic costs of the proposed and conventional designs at `n`.
///
/// # Safety
/// `cfg` must be a live handle; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn risdrl_complexity(
    cfg: *const RisdrlConfig,
    n: usize,
    proposed: *mut RisdrlComplexity,
    conventional: *mut RisdrlComplexity,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        let (pa, pc) = proposed_pair(n, &cfg.proposed)?;
        let (ca, cc) = conventional_pair(n, &cfg.conventional)?;
        let to_c = |r: risdrl::complexity::ComplexityReport| RisdrlComplexity {
            parameters: r.c_p,
            multiplications: r.c_m,
            additions: r.c_a,
        };
        write_out(proposed, to_c(pa + pc))?;
        write_out(conventional, to_c(ca + cc))
    })
}

/// Fractional cost reduction of the proposed design at `n`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn risdrl_reduction(
    cfg: *const RisdrlConfig,
    n: usize,
    chi: RisdrlChi,
    out: *mut f64,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        let chi = match chi {
            RisdrlChi::Parameters => Chi::P,
            RisdrlChi::Multiplications => Chi::M,
            RisdrlChi::Additions => Chi::A,
        };
        write_out(out, reduction_at(n, chi, &cfg.proposed, &cfg.conventional)?)
    })
}

/// Trains one agent with the configuration's settings. `n = 0` uses the
/// configured element count. A run that aborts mid-way still yields a handle;
/// see [`risdrl_training_failed`].
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn risdrl_train(
    cfg: *const RisdrlConfig,
    mode: RisdrlMode,
    n: usize,
    seed: u64,
    conventional: bool,
    out: *mut *mut RisdrlTraining,
) -> RisdrlStatus {
    guard(|| {
        let cfg = &deref(cfg, "config")?.inner;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let spec = RunSpec {
            mode: mode_of(mode),
            n: if n == 0 { cfg.n } else { n },
            d0: cfg.geometry.d0(),
            seed,
            design: if conventional { Design::Conventional } else { Design::Proposed },
        };
        let inner = harness::run_training(cfg, spec)?;
        write_out(out, Box::into_raw(Box::new(RisdrlTraining { inner })))
    })
}

/// Best rate observed during training, NaN for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_best_rate(t: *const RisdrlTraining) -> f64 {
    t.as_ref().map_or(f64::NAN, |t| t.inner.train.best_rate)
}

/// Whether the run stopped early; the curve then ends at the failure point.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_failed(t: *const RisdrlTraining) -> bool {
    t.as_ref().is_some_and(|t| t.inner.train.failure.is_some())
}

/// Number of phases in the best phase vector.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_n_elements(t: *const RisdrlTraining) -> usize {
    t.as_ref().map_or(0, |t| t.inner.train.best_phi.len())
}

/// Copies the best phase vector into `buf[0..len]`.
///
/// # Safety
/// `t` must be a live handle; `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_best_phi(t: *const RisdrlTraining, buf: *mut f64, len: usize) -> RisdrlStatus {
    guard(|| copy_out(deref(t, "training")?.inner.train.best_phi.as_slice(), buf, len))
}

/// Number of recorded steps.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_curve_len(t: *const RisdrlTraining) -> usize {
    t.as_ref().map_or(0, |t| t.inner.train.curve.len())
}

/// Copies the per-step rewards into `buf[0..len]`.
///
/// # Safety
/// `t` must be a live handle; `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_rewards(t: *const RisdrlTraining, buf: *mut f64, len: usize) -> RisdrlStatus {
    guard(|| {
        let rewards: Vec<f64> = deref(t, "training")?.inner.train.curve.iter().map(|p| p.reward).collect();
        copy_out(&rewards, buf, len)
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn risdrl_training_free(t: *mut RisdrlTraining) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
