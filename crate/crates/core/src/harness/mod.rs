//! Experiment orchestration: training runs, baselines, sweeps over RIS
//! placement and size, the complexity table, and CSV / JSON persistence.
//!
//! Every run is a pure function of `(config, run seed)`. Episode `k` of a run
//! with seed `s` sees the channel drawn from stream `("channel", k)` of `s`,
//! so baselines, both operating modes and every RIS placement are evaluated
//! on the same underlying fading draws.

pub mod cli;
pub mod config;
pub mod stats;

pub use config::ExperimentConfig;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::beamforming::RateEvaluator;
use crate::channel::{generate_channel_set, ChannelSet, Geometry};
use crate::complexity::{asymptotic_reduction, conventional_pair, proposed_pair, reduction, Chi};
use crate::ddpg::{train, Agent, AgentConfig, CurvePoint, RisEnvironment, TrainResult};
use crate::error::{Error, Result};
use crate::neural::Network;
use crate::seed::stream;
use crate::sigmodel::{OperatingMode, PhaseShiftVector};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RISDRL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    Proposed,
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Drl,
    DrlConventional,
    Random,
    WithoutRis,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Drl => "drl",
            Method::DrlConventional => "drl_conventional",
            Method::Random => "random",
            Method::WithoutRis => "without_ris",
        })
    }
}

pub fn evaluator(cfg: &ExperimentConfig) -> RateEvaluator {
    RateEvaluator { pmax: cfg.budget.pmax_mw(), sigma2: cfg.budget.sigma2_mw(), fd: cfg.solver }
}

/// Channel realization of episode `k` for a run seeded with `seed`.
pub fn episode_channels(cfg: &ExperimentConfig, geometry: &Geometry, n: usize, seed: u64, k: usize) -> Result<ChannelSet> {
    generate_channel_set(geometry, &cfg.budget, n, cfg.m, &mut stream(seed, "channel", k as u64))
}

/// Mean rate over `trials` phase vectors drawn uniformly from `[-pi, pi)^N`,
/// with beamformers re-optimized for each draw.
pub fn random_phase_baseline<R: Rng + ?Sized>(
    ch: &ChannelSet,
    mode: OperatingMode,
    ev: &RateEvaluator,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Domain("need at least one random trial".into()));
    }
    let n = ch.n_elements();
    let mut total = 0.0;
    for _ in 0..trials {
        let phi = PhaseShiftVector::new((0..n).map(|_| rng.random_range(-PI..PI)).collect());
        total += ev.rate(ch, &phi, mode)?;
    }
    Ok(total / trials as f64)
}

/// Rate with every RIS-adjacent channel removed.
pub fn without_ris_rate(ch: &ChannelSet, mode: OperatingMode, ev: &RateEvaluator) -> Result<f64> {
    ev.rate(&ch.without_ris(), &PhaseShiftVector::zeros(ch.n_elements()), mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub mode: OperatingMode,
    pub n: usize,
    pub d0: f64,
    pub seed: u64,
    pub design: Design,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub spec: RunSpec,
    /// The agent configuration the run actually used.
    pub agent: AgentConfig,
    pub train: TrainResult,
    pub actor: Network,
    pub critic: Network,
    pub wall_clock_s: f64,
}

impl RunOutput {
    /// Mean over episodes of the best rate found in each episode.
    pub fn mean_episode_best(&self) -> f64 {
        stats::mean(&self.train.episodes.iter().map(|e| e.best_rate).collect::<Vec<_>>())
    }
}

pub fn agent_config_for(cfg: &ExperimentConfig, design: Design) -> AgentConfig {
    match design {
        Design::Proposed => cfg.agent,
        Design::Conventional => AgentConfig { steps: cfg.conventional_steps, ..cfg.agent },
    }
}

/// One complete training run.
pub fn run_training(cfg: &ExperimentConfig, spec: RunSpec) -> Result<RunOutput> {
    let start = Instant::now();
    let geometry = cfg.geometry.with_d0(spec.d0)?;
    let agent_cfg = agent_config_for(cfg, spec.design);
    let mut rng = stream(spec.seed, "agent", 0);
    let mut agent = match spec.design {
        Design::Proposed => Agent::proposed(spec.n, &cfg.proposed, agent_cfg, &mut rng)?,
        Design::Conventional => Agent::conventional(spec.n, &cfg.conventional, agent_cfg, &mut rng)?,
    };
    let ev = evaluator(cfg);
    let result = train(
        &mut agent,
        |k| RisEnvironment::new(episode_channels(cfg, &geometry, spec.n, spec.seed, k)?, spec.mode, ev),
        &mut rng,
    )?;
    Ok(RunOutput {
        spec,
        agent: agent_cfg,
        train: result,
        actor: agent.actor,
        critic: agent.critic,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineRates {
    pub random: f64,
    pub without_ris: f64,
}

/// Baselines on the channels of episodes `0..episodes` of a run, averaged.
pub fn run_baselines(
    cfg: &ExperimentConfig,
    geometry: &Geometry,
    n: usize,
    mode: OperatingMode,
    seed: u64,
    episodes: usize,
) -> Result<(BaselineRates, Vec<BaselineRates>)> {
    let ev = evaluator(cfg);
    let mut per_episode = Vec::with_capacity(episodes);
    for k in 0..episodes {
        let ch = episode_channels(cfg, geometry, n, seed, k)?;
        let mut rng = stream(seed, "random", k as u64);
        per_episode.push(BaselineRates {
            random: random_phase_baseline(&ch, mode, &ev, cfg.random_trials, &mut rng)?,
            without_ris: without_ris_rate(&ch, mode, &ev)?,
        });
    }
    let mean = BaselineRates {
        random: stats::mean(&per_episode.iter().map(|b| b.random).collect::<Vec<_>>()),
        without_ris: stats::mean(&per_episode.iter().map(|b| b.without_ris).collect::<Vec<_>>()),
    };
    Ok((mean, per_episode))
}

/// Runs independent jobs on a bounded pool; output order follows input order.
pub fn run_parallel<T, U, F>(threads: usize, jobs: Vec<T>, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| jobs.into_par_iter().map(f).collect()))
}

/// One (x, mode, method, seed) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x: f64,
    pub mode: OperatingMode,
    pub method: Method,
    pub seed: u64,
    pub rate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub x: f64,
    pub mode: OperatingMode,
    pub method: Method,
    pub mean: f64,
    pub ci95: f64,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// Name of the swept variable, used as the first CSV column.
    pub variable: &'static str,
    pub cells: Vec<Cell>,
}

impl SweepTable {
    /// Per-seed values of one series, in seed order.
    pub fn values(&self, x: f64, mode: OperatingMode, method: Method) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.x == x && c.mode == mode && c.method == method)
            .filter_map(|c| c.rate)
            .collect()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(f64, OperatingMode, Method)> = Vec::new();
        for c in &self.cells {
            if !keys.iter().any(|k| k.0 == c.x && k.1 == c.mode && k.2 == c.method) {
                keys.push((c.x, c.mode, c.method));
            }
        }
        keys.into_iter()
            .map(|(x, mode, method)| {
                let v = self.values(x, mode, method);
                SummaryRow { x, mode, method, mean: stats::mean(&v), ci95: stats::ci95_half_width(&v), seeds: v.len() }
            })
            .collect()
    }

    pub fn write_cells_csv(&self, path: &Path) -> Result<()> {
        let rows = self.cells.iter().map(|c| {
            vec![
                c.x.to_string(),
                c.mode.to_string(),
                c.method.to_string(),
                c.seed.to_string(),
                c.rate.map(|r| r.to_string()).unwrap_or_default(),
                c.error.clone().unwrap_or_default(),
            ]
        });
        write_csv(path, &[self.variable, "mode", "method", "seed", "rate_bps_hz", "error"], rows)
    }

    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let rows = self.summary().into_iter().map(|r| {
            vec![
                r.x.to_string(),
                r.mode.to_string(),
                r.method.to_string(),
                r.mean.to_string(),
                r.ci95.to_string(),
                r.seeds.to_string(),
            ]
        });
        write_csv(path, &[self.variable, "mode", "method", "mean_bps_hz", "ci95_bps_hz", "seeds"], rows)
    }
}

fn push_cells(cells: &mut Vec<Cell>, x: f64, mode: OperatingMode, seed: u64, outcome: Result<Vec<(Method, f64)>>, methods: &[Method]) {
    match outcome {
        Ok(values) => {
            for (method, rate) in values {
                cells.push(Cell { x, mode, method, seed, rate: Some(rate), error: None });
            }
        }
        Err(e) => {
            for &method in methods {
                cells.push(Cell { x, mode, method, seed, rate: None, error: Some(e.to_string()) });
            }
        }
    }
}

/// DRL, random-phase and without-RIS rates over the configured RIS placements.
pub fn sweep_d0(cfg: &ExperimentConfig, modes: &[OperatingMode]) -> Result<SweepTable> {
    cfg.validate()?;
    let grid = &cfg.sweep_d0;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("d0 grid must be strictly ascending, got {grid:?}")));
    }
    if let Some(bad) = grid.iter().find(|&&d| !(0.0..=cfg.geometry.d1()).contains(&d)) {
        return Err(Error::Config(format!("d0 = {bad} lies outside [0, {}]", cfg.geometry.d1())));
    }
    let mut jobs = Vec::new();
    for &d0 in grid {
        for &mode in modes {
            for seed in cfg.run_seeds() {
                jobs.push(RunSpec { mode, n: cfg.n, d0, seed, design: Design::Proposed });
            }
        }
    }
    let methods = [Method::Drl, Method::Random, Method::WithoutRis];
    let outcomes = run_parallel(cfg.threads, jobs.clone(), |spec| -> Result<Vec<(Method, f64)>> {
        let run = run_training(cfg, spec)?;
        if let Some(f) = &run.train.failure {
            return Err(Error::Numeric(f.clone()));
        }
        let geometry = cfg.geometry.with_d0(spec.d0)?;
        let (b, _) = run_baselines(cfg, &geometry, spec.n, spec.mode, spec.seed, run.train.episodes.len())?;
        Ok(vec![(Method::Drl, run.mean_episode_best()), (Method::Random, b.random), (Method::WithoutRis, b.without_ris)])
    })?;
    let mut cells = Vec::new();
    for (spec, outcome) in jobs.iter().zip(outcomes) {
        push_cells(&mut cells, spec.d0, spec.mode, spec.seed, outcome, &methods);
    }
    Ok(SweepTable { variable: "d0", cells })
}

/// Rates over the configured RIS sizes. The conventional agent is trained in
/// HD only.
pub fn sweep_n(cfg: &ExperimentConfig, modes: &[OperatingMode]) -> Result<SweepTable> {
    cfg.validate()?;
    let grid = &cfg.sweep_n;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("N grid must be strictly ascending, got {grid:?}")));
    }
    if grid.contains(&0) {
        return Err(Error::Config("N grid entries must be >= 1".into()));
    }
    let d0 = cfg.geometry.d0();
    let mut jobs = Vec::new();
    for &n in grid {
        for &mode in modes {
            for seed in cfg.run_seeds() {
                jobs.push(RunSpec { mode, n, d0, seed, design: Design::Proposed });
                if mode == OperatingMode::Hd {
                    jobs.push(RunSpec { mode, n, d0, seed, design: Design::Conventional });
                }
            }
        }
    }
    let outcomes = run_parallel(cfg.threads, jobs.clone(), |spec| -> Result<Vec<(Method, f64)>> {
        let run = run_training(cfg, spec)?;
        if let Some(f) = &run.train.failure {
            return Err(Error::Numeric(f.clone()));
        }
        if spec.design == Design::Conventional {
            return Ok(vec![(Method::DrlConventional, run.mean_episode_best())]);
        }
        let (b, _) = run_baselines(cfg, &cfg.geometry, spec.n, spec.mode, spec.seed, run.train.episodes.len())?;
        Ok(vec![(Method::Drl, run.mean_episode_best()), (Method::Random, b.random), (Method::WithoutRis, b.without_ris)])
    })?;
    let mut cells = Vec::new();
    for (spec, outcome) in jobs.iter().zip(outcomes) {
        let methods: &[Method] = match spec.design {
            Design::Proposed => &[Method::Drl, Method::Random, Method::WithoutRis],
            Design::Conventional => &[Method::DrlConventional],
        };
        push_cells(&mut cells, spec.n as f64, spec.mode, spec.seed, outcome, methods);
    }
    Ok(SweepTable { variable: "n", cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub n: usize,
    pub cp_conv: u64,
    pub cp_prop: u64,
    pub red_p: f64,
    pub red_m: f64,
    pub red_a: f64,
}

/// Actor + critic costs of both designs at each configured N.
pub fn complexity_report(cfg: &ExperimentConfig) -> Result<Vec<ComplexityRow>> {
    cfg.complexity_n
        .iter()
        .map(|&n| {
            let (pa, pc) = proposed_pair(n, &cfg.proposed)?;
            let (ca, cc) = conventional_pair(n, &cfg.conventional)?;
            Ok(ComplexityRow {
                n,
                cp_conv: ca.c_p + cc.c_p,
                cp_prop: pa.c_p + pc.c_p,
                red_p: reduction(&pa, &pc, &ca, &cc, Chi::P)?,
                red_m: reduction(&pa, &pc, &ca, &cc, Chi::M)?,
                red_a: reduction(&pa, &pc, &ca, &cc, Chi::A)?,
            })
        })
        .collect()
}

pub fn write_complexity_csv(path: &Path, rows: &[ComplexityRow]) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.cp_conv.to_string(),
            r.cp_prop.to_string(),
            r.red_p.to_string(),
            r.red_m.to_string(),
            r.red_a.to_string(),
        ]
    });
    write_csv(path, &["n", "cp_conv", "cp_prop", "red_p", "red_m", "red_a"], rows)
}

/// Context for the complexity table: the two designs train for different
/// episode lengths, which per-inference costs do not reflect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityMeta {
    pub proposed_steps: usize,
    pub conventional_steps: usize,
    pub asymptote_p: f64,
    pub asymptote_m: f64,
    pub asymptote_a: f64,
}

pub fn complexity_meta(cfg: &ExperimentConfig) -> ComplexityMeta {
    ComplexityMeta {
        proposed_steps: cfg.agent.steps,
        conventional_steps: cfg.conventional_steps,
        asymptote_p: asymptotic_reduction(Chi::P, &cfg.proposed, &cfg.conventional),
        asymptote_m: asymptotic_reduction(Chi::M, &cfg.proposed, &cfg.conventional),
        asymptote_a: asymptotic_reduction(Chi::A, &cfg.proposed, &cfg.conventional),
    }
}

/// Writes to a sibling temp file and renames, so readers never see a
/// truncated row.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let tmp = temp_sibling(path);
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let rows = curve.iter().map(|p| {
        vec![p.episode.to_string(), p.step.to_string(), p.reward.to_string(), p.best_so_far.to_string()]
    });
    write_csv(path, &["episode", "step", "reward_bps_hz", "best_so_far"], rows)
}

/// Everything needed to audit one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub master_seed: u64,
    pub run_seed: u64,
    pub spec: RunSpec,
    pub agent: AgentConfig,
    pub curve: Vec<CurvePoint>,
    pub episode_best: Vec<f64>,
    pub best_phi: Vec<f64>,
    pub best_rate: f64,
    pub failure: Option<String>,
    pub versions: BTreeMap<String, String>,
    /// Excluded from `record_hash`.
    pub wall_clock_s: f64,
    /// SHA-256 of this record serialized with `wall_clock_s = 0` and an
    /// empty `record_hash`.
    pub record_hash: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex(&Sha256::digest(cfg.to_text().as_bytes()))
}

impl RunRecord {
    pub fn new(cfg: &ExperimentConfig, run: &RunOutput) -> Result<Self> {
        let mut versions = BTreeMap::new();
        versions.insert(env!("CARGO_PKG_NAME").to_string(), env!("CARGO_PKG_VERSION").to_string());
        let mut rec = RunRecord {
            config_hash: config_hash(cfg),
            master_seed: cfg.seed,
            run_seed: run.spec.seed,
            spec: run.spec,
            agent: run.agent,
            curve: run.train.curve.clone(),
            episode_best: run.train.episodes.iter().map(|e| e.best_rate).collect(),
            best_phi: run.train.best_phi.as_slice().to_vec(),
            best_rate: run.train.best_rate,
            failure: run.train.failure.clone(),
            versions,
            wall_clock_s: run.wall_clock_s,
            record_hash: String::new(),
        };
        rec.record_hash = rec.compute_hash()?;
        Ok(rec)
    }

    pub fn compute_hash(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.wall_clock_s = 0.0;
        canonical.record_hash.clear();
        Ok(hex(&Sha256::digest(serde_json::to_vec(&canonical)?)))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = temp_sibling(path);
        std::fs::write(&tmp, serde_json::to_vec_pretty(self)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Loads a record and checks its hash.
    pub fn read(path: &Path) -> Result<Self> {
        let rec: RunRecord = serde_json::from_slice(&std::fs::read(path)?)?;
        if rec.compute_hash()? != rec.record_hash {
            return Err(Error::Parse { path: path.to_path_buf(), msg: "record hash mismatch".into() });
        }
        Ok(rec)
    }
}

/// `--out`, then the config's `output_dir`, then `$RISDRL_OUT_DIR`, then
/// `./risdrl-out`.
pub fn resolve_output_dir(cli: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("risdrl-out"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkBudget;
    use crate::sigmodel::{rate_hd, Beamformer};
    use nalgebra::DVector;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.n = 4;
        cfg.m = 2;
        cfg.seed_count = 2;
        cfg.threads = 1;
        cfg.random_trials = 5;
        cfg.proposed.width = 2;
        cfg.proposed.stride = 1;
        cfg.proposed.hidden = 8;
        cfg.agent.episodes = 2;
        cfg.agent.steps = 20;
        cfg.agent.batch = 4;
        cfg.conventional = crate::neural::ConventionalHyper { hidden: [8, 8] };
        cfg.conventional_steps = 25;
        cfg
    }

    #[test]
    fn baselines_on_zero_channels() {
        let ev = RateEvaluator::new(1.0, 0.1);
        let ch = ChannelSet::zeros(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for mode in [OperatingMode::Hd, OperatingMode::Fd] {
            assert_eq!(random_phase_baseline(&ch, mode, &ev, 3, &mut rng).unwrap(), 0.0);
            assert_eq!(without_ris_rate(&ch, mode, &ev).unwrap(), 0.0);
        }
        assert!(random_phase_baseline(&ch, OperatingMode::Hd, &ev, 0, &mut rng).is_err());
    }

    #[test]
    fn without_ris_scalar_closed_form() {
        let mut ch = ChannelSet::zeros(2, 1);
        ch.h_s1_s2 = DVector::from_element(1, Complex64::new(0.6, -0.8));
        ch.h_r_s2[0] = Complex64::new(0.5, 0.0);
        ch.h_s1_r[(0, 0)] = Complex64::new(0.7, 0.1);
        let ev = RateEvaluator::new(2.0, 0.1);
        let expect = (1.0 + 2.0 * 1.0 / 0.1f64).log2();
        assert!((without_ris_rate(&ch, OperatingMode::Hd, &ev).unwrap() - expect).abs() < 1e-12);
        // already RIS-free: same as the plain rate
        let bare = ch.without_ris();
        let phi = PhaseShiftVector::zeros(2);
        let w = Beamformer::new(DVector::from_element(1, Complex64::new(0.6, 0.8) * 2f64.sqrt()), 2.0).unwrap();
        assert!((without_ris_rate(&bare, OperatingMode::Hd, &ev).unwrap() - rate_hd(&bare, &phi, &w, 0.1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn random_baseline_matches_quadrature_at_one_element() {
        let cfg = ExperimentConfig::default();
        let budget = LinkBudget::default();
        let ch = generate_channel_set(&Geometry::reference(), &budget, 1, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let ev = evaluator(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mc = random_phase_baseline(&ch, OperatingMode::Hd, &ev, 10_000, &mut rng).unwrap();
        // midpoint rule over one period
        let k = 4096;
        let quad = (0..k)
            .map(|i| {
                let phi = PhaseShiftVector::new(vec![-PI + (i as f64 + 0.5) * 2.0 * PI / k as f64]);
                ev.rate(&ch, &phi, OperatingMode::Hd).unwrap()
            })
            .sum::<f64>()
            / k as f64;
        assert!((mc - quad).abs() <= 0.02 * quad, "{mc} vs {quad}");
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = small_cfg();
        let spec = RunSpec { mode: OperatingMode::Fd, n: 4, d0: 1.0, seed: 9, design: Design::Proposed };
        let a = run_training(&cfg, spec).unwrap();
        let b = run_training(&cfg, spec).unwrap();
        assert_eq!(a.train, b.train);
        let ra = RunRecord::new(&cfg, &a).unwrap();
        let rb = RunRecord::new(&cfg, &b).unwrap();
        assert_eq!(ra.record_hash, rb.record_hash);
        assert_eq!(ra.agent.steps, 20);
        let conv = run_training(&cfg, RunSpec { design: Design::Conventional, ..spec }).unwrap();
        assert_eq!(conv.train.curve.len(), 2 * 25);
    }

    #[test]
    fn record_round_trip_and_tamper_check() {
        let cfg = small_cfg();
        let run = run_training(&cfg, RunSpec { mode: OperatingMode::Hd, n: 4, d0: 1.0, seed: 1, design: Design::Proposed })
            .unwrap();
        let rec = RunRecord::new(&cfg, &run).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        rec.write(&path).unwrap();
        assert_eq!(RunRecord::read(&path).unwrap(), rec);
        let text = std::fs::read_to_string(&path).unwrap().replacen("\"best_rate\": ", "\"best_rate\": 1", 1);
        std::fs::write(&path, text).unwrap();
        assert!(RunRecord::read(&path).is_err());
    }

    #[test]
    fn sweep_shapes_and_modes_share_agent_config() {
        let mut cfg = small_cfg();
        cfg.sweep_d0 = vec![1.0, 25.0, 49.0];
        let table = sweep_d0(&cfg, &[OperatingMode::Hd, OperatingMode::Fd]).unwrap();
        for mode in [OperatingMode::Hd, OperatingMode::Fd] {
            for d0 in [1.0, 25.0, 49.0] {
                for method in [Method::Drl, Method::Random, Method::WithoutRis] {
                    let v = table.values(d0, mode, method);
                    assert_eq!(v.len(), 2);
                    assert!(v.iter().all(|x| x.is_finite()));
                }
            }
        }
        assert_eq!(table.summary().len(), 18);
        assert_eq!(agent_config_for(&cfg, Design::Proposed), cfg.agent);

        cfg.sweep_d0 = vec![25.0, 1.0];
        assert!(matches!(sweep_d0(&cfg, &[OperatingMode::Hd]), Err(Error::Config(_))));
        cfg.sweep_d0 = vec![1.0, 60.0];
        assert!(matches!(sweep_d0(&cfg, &[OperatingMode::Hd]), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_n_includes_conventional_in_hd_only() {
        let mut cfg = small_cfg();
        cfg.seed_count = 1;
        cfg.sweep_n = vec![3, 4];
        let table = sweep_n(&cfg, &[OperatingMode::Hd, OperatingMode::Fd]).unwrap();
        assert_eq!(table.values(3.0, OperatingMode::Hd, Method::DrlConventional).len(), 1);
        assert!(table.values(3.0, OperatingMode::Fd, Method::DrlConventional).is_empty());
        assert_eq!(table.values(4.0, OperatingMode::Fd, Method::Drl).len(), 1);
    }

    #[test]
    fn complexity_rows() {
        let cfg = ExperimentConfig::default();
        let rows = complexity_report(&cfg).unwrap();
        assert_eq!(rows.len(), 41);
        assert_eq!(rows[0].n, 20);
        for w in rows.windows(2) {
            assert!(w[1].red_m <= w[0].red_m);
        }
        assert!(rows.iter().all(|r| r.red_p > 0.0 && r.red_p < 1.0));
        let meta = complexity_meta(&cfg);
        assert_eq!((meta.proposed_steps, meta.conventional_steps), (800, 1000));
    }

    #[test]
    fn csv_writes_are_whole() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_complexity_csv(&path, &complexity_report(&ExperimentConfig::default()).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("n,cp_conv,cp_prop,red_p,red_m,red_a\n"));
        assert_eq!(text.lines().count(), 42);
        assert!(!dir.path().join("c.csv.partial").exists());
    }
}
