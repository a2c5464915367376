//! Experiment configuration and its text format.
//!
//! One `key = value` pair per line. `#` starts a comment, blank lines are
//! ignored, keys are dotted (`agent.gamma = 0.99`). Lists are comma
//! separated; integer grids also accept an inclusive range `20..60` or a
//! stepped range `20..60:5`. Unknown keys are errors. Every key:
//!
//! ```text
//! mode                       hd | fd
//! n, m                       RIS elements, BS/UE antennas
//! seed                       master seed
//! seed_count                 runs per cell; run seeds are derived from `seed`
//! threads                    worker threads for independent runs (0 = all cores)
//! output_dir                 directory for CSV / JSON output
//! geometry.{d0,d1,dv}        meters
//! budget.{pl0_db,dr,zeta_bu,zeta_br,zeta_ur,rician_k,si_pl_db,
//!         bs_gain_dbi,ue_gain_dbi,ris_gain_dbi,penetration_db,sigma2_dbm,pmax_dbm}
//! agent.{gamma,tau,actor_alpha,critic_alpha,noise_var,episodes,steps,capacity,batch}
//! agent.alpha                sets both learning rates
//! agent.gating               min_batch | full
//! agent.{reset_buffer_each_episode,normalize_rate}   true | false
//! proposed.{filters,width,stride,hidden}
//! proposed.hidden_activation softmax | relu
//! conventional.hidden        two widths, e.g. 256,256
//! conventional.steps         steps per episode for the conventional agent
//! solver.{tol,max_iter,bisection_tol}
//! baseline.random_trials     random phase draws per channel realization
//! sweep.d0                   float list
//! sweep.n                    integer grid
//! complexity.n               integer grid
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::beamforming::FdSolverConfig;
use crate::channel::{Geometry, LinkBudget};
use crate::ddpg::{AgentConfig, Gating};
use crate::error::{Error, Result};
use crate::neural::{Activation, ConventionalHyper, ProposedHyper};
use crate::seed::derive_seed;
use crate::sigmodel::OperatingMode;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: OperatingMode,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub seed_count: usize,
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
    pub geometry: Geometry,
    pub budget: LinkBudget,
    pub agent: AgentConfig,
    pub proposed: ProposedHyper,
    pub conventional: ConventionalHyper,
    pub conventional_steps: usize,
    pub solver: FdSolverConfig,
    pub random_trials: usize,
    pub sweep_d0: Vec<f64>,
    pub sweep_n: Vec<usize>,
    pub complexity_n: Vec<usize>,
}

impl Default for ExperimentConfig {
    /// Desk-scale defaults: 40 episodes per run, 5 seeds per cell.
    fn default() -> Self {
        Self {
            mode: OperatingMode::Hd,
            n: 16,
            m: 4,
            seed: 0,
            seed_count: 5,
            threads: 0,
            output_dir: None,
            geometry: Geometry::reference(),
            budget: LinkBudget::default(),
            agent: AgentConfig { episodes: 40, ..AgentConfig::default() },
            proposed: ProposedHyper::default(),
            conventional: ConventionalHyper::default(),
            conventional_steps: AgentConfig::conventional().steps,
            solver: FdSolverConfig::default(),
            random_trials: 100,
            sweep_d0: vec![1.0, 25.0, 49.0],
            sweep_n: vec![8, 16, 24],
            complexity_n: (20..=60).collect(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_num(key, x.trim())).collect()
}

/// `8,16,24`, `20..60` or `20..60:5` (inclusive).
pub fn parse_usize_grid(key: &str, v: &str) -> Result<Vec<usize>> {
    if let Some((lo, rest)) = v.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, parse_num::<usize>(key, step.trim())?),
            None => (rest, 1),
        };
        let lo: usize = parse_num(key, lo.trim())?;
        let hi: usize = parse_num(key, hi.trim())?;
        if step == 0 {
            return Err(Error::Config(format!("{key}: range step must be >= 1")));
        }
        if lo > hi {
            return Err(Error::Config(format!("{key}: range {lo}..{hi} is inverted")));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    v.split(',').map(|x| parse_num(key, x.trim())).collect()
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Relu => "relu",
        Activation::Softmax => "softmax",
        Activation::Linear => "linear",
        Activation::TanhScaled(_) => "tanh",
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        // geometry is validated as a whole, so its keys may come in any order
        let mut geo = [cfg.geometry.d0(), cfg.geometry.d1(), cfg.geometry.dv()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |e: Error| Error::Parse { path: path.to_path_buf(), msg: format!("line {}: {e}", lineno + 1) };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| wrap(Error::Config(format!("expected key = value, got '{line}'"))))?;
            let (key, value) = (key.trim(), value.trim());
            let slot = match key {
                "geometry.d0" => Some(0),
                "geometry.d1" => Some(1),
                "geometry.dv" => Some(2),
                _ => None,
            };
            match slot {
                Some(i) => geo[i] = parse_num(key, value).map_err(wrap)?,
                None => cfg.set(key, value).map_err(wrap)?,
            }
        }
        cfg.geometry = Geometry::new(geo[0], geo[1], geo[2])
            .map_err(|e| Error::Parse { path: path.to_path_buf(), msg: format!("geometry: {e}") })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let b = &mut self.budget;
        let a = &mut self.agent;
        match key {
            "mode" => self.mode = v.parse()?,
            "n" => self.n = parse_num(key, v)?,
            "m" => self.m = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "seed_count" => self.seed_count = parse_num(key, v)?,
            "threads" => self.threads = parse_num(key, v)?,
            "output_dir" => self.output_dir = Some(PathBuf::from(v)),
            "geometry.d0" => self.geometry = Geometry::new(parse_num(key, v)?, self.geometry.d1(), self.geometry.dv())?,
            "geometry.d1" => self.geometry = Geometry::new(self.geometry.d0(), parse_num(key, v)?, self.geometry.dv())?,
            "geometry.dv" => self.geometry = Geometry::new(self.geometry.d0(), self.geometry.d1(), parse_num(key, v)?)?,
            "budget.pl0_db" => b.pl0_db = parse_num(key, v)?,
            "budget.dr" => b.dr = parse_num(key, v)?,
            "budget.zeta_bu" => b.zeta_bu = parse_num(key, v)?,
            "budget.zeta_br" => b.zeta_br = parse_num(key, v)?,
            "budget.zeta_ur" => b.zeta_ur = parse_num(key, v)?,
            "budget.rician_k" => b.rician_k = parse_num(key, v)?,
            "budget.si_pl_db" => b.si_pl_db = parse_num(key, v)?,
            "budget.bs_gain_dbi" => b.bs_gain_dbi = parse_num(key, v)?,
            "budget.ue_gain_dbi" => b.ue_gain_dbi = parse_num(key, v)?,
            "budget.ris_gain_dbi" => b.ris_gain_dbi = parse_num(key, v)?,
            "budget.penetration_db" => b.penetration_db = parse_num(key, v)?,
            "budget.sigma2_dbm" => b.sigma2_dbm = parse_num(key, v)?,
            "budget.pmax_dbm" => b.pmax_dbm = parse_num(key, v)?,
            "agent.gamma" => a.gamma = parse_num(key, v)?,
            "agent.tau" => a.tau = parse_num(key, v)?,
            "agent.alpha" => {
                a.actor_alpha = parse_num(key, v)?;
                a.critic_alpha = a.actor_alpha;
            }
            "agent.actor_alpha" => a.actor_alpha = parse_num(key, v)?,
            "agent.critic_alpha" => a.critic_alpha = parse_num(key, v)?,
            "agent.noise_var" => a.noise_var = parse_num(key, v)?,
            "agent.episodes" => a.episodes = parse_num(key, v)?,
            "agent.steps" => a.steps = parse_num(key, v)?,
            "agent.capacity" => a.capacity = parse_num(key, v)?,
            "agent.batch" => a.batch = parse_num(key, v)?,
            "agent.gating" => {
                a.gating = match v {
                    "min_batch" => Gating::MinBatch,
                    "full" => Gating::Full,
                    _ => return Err(Error::Config(format!("{key}: expected min_batch or full, got '{v}'"))),
                }
            }
            "agent.reset_buffer_each_episode" => a.reset_buffer_each_episode = parse_bool(key, v)?,
            "agent.normalize_rate" => a.normalize_rate = parse_bool(key, v)?,
            "proposed.filters" => self.proposed.filters = parse_num(key, v)?,
            "proposed.width" => self.proposed.width = parse_num(key, v)?,
            "proposed.stride" => self.proposed.stride = parse_num(key, v)?,
            "proposed.hidden" => self.proposed.hidden = parse_num(key, v)?,
            "proposed.hidden_activation" => {
                self.proposed.hidden_activation = match v {
                    "softmax" => Activation::Softmax,
                    "relu" => Activation::Relu,
                    _ => return Err(Error::Config(format!("{key}: expected softmax or relu, got '{v}'"))),
                }
            }
            "conventional.hidden" => {
                let h = parse_usize_grid(key, v)?;
                self.conventional.hidden =
                    h.try_into().map_err(|_| Error::Config(format!("{key}: expected exactly two widths")))?;
            }
            "conventional.steps" => self.conventional_steps = parse_num(key, v)?,
            "solver.tol" => self.solver.tol = parse_num(key, v)?,
            "solver.max_iter" => self.solver.max_iter = parse_num(key, v)?,
            "solver.bisection_tol" => self.solver.bisection_tol = parse_num(key, v)?,
            "baseline.random_trials" => self.random_trials = parse_num(key, v)?,
            "sweep.d0" => self.sweep_d0 = parse_f64_list(key, v)?,
            "sweep.n" => self.sweep_n = parse_usize_grid(key, v)?,
            "complexity.n" => self.complexity_n = parse_usize_grid(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text())` reproduces the config and the
    /// record hashes are taken over it.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let b = &self.budget;
        let a = &self.agent;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("mode", self.mode.to_string());
        kv("n", self.n.to_string());
        kv("m", self.m.to_string());
        kv("seed", self.seed.to_string());
        kv("seed_count", self.seed_count.to_string());
        kv("threads", self.threads.to_string());
        if let Some(dir) = &self.output_dir {
            kv("output_dir", dir.display().to_string());
        }
        kv("geometry.d0", self.geometry.d0().to_string());
        kv("geometry.d1", self.geometry.d1().to_string());
        kv("geometry.dv", self.geometry.dv().to_string());
        for (k, v) in [
            ("pl0_db", b.pl0_db),
            ("dr", b.dr),
            ("zeta_bu", b.zeta_bu),
            ("zeta_br", b.zeta_br),
            ("zeta_ur", b.zeta_ur),
            ("rician_k", b.rician_k),
            ("si_pl_db", b.si_pl_db),
            ("bs_gain_dbi", b.bs_gain_dbi),
            ("ue_gain_dbi", b.ue_gain_dbi),
            ("ris_gain_dbi", b.ris_gain_dbi),
            ("penetration_db", b.penetration_db),
            ("sigma2_dbm", b.sigma2_dbm),
            ("pmax_dbm", b.pmax_dbm),
        ] {
            kv(&format!("budget.{k}"), v.to_string());
        }
        for (k, v) in [
            ("gamma", a.gamma),
            ("tau", a.tau),
            ("actor_alpha", a.actor_alpha),
            ("critic_alpha", a.critic_alpha),
            ("noise_var", a.noise_var),
        ] {
            kv(&format!("agent.{k}"), v.to_string());
        }
        for (k, v) in [("episodes", a.episodes), ("steps", a.steps), ("capacity", a.capacity), ("batch", a.batch)] {
            kv(&format!("agent.{k}"), v.to_string());
        }
        kv("agent.gating", if a.gating == Gating::Full { "full" } else { "min_batch" }.into());
        kv("agent.reset_buffer_each_episode", a.reset_buffer_each_episode.to_string());
        kv("agent.normalize_rate", a.normalize_rate.to_string());
        kv("proposed.filters", self.proposed.filters.to_string());
        kv("proposed.width", self.proposed.width.to_string());
        kv("proposed.stride", self.proposed.stride.to_string());
        kv("proposed.hidden", self.proposed.hidden.to_string());
        kv("proposed.hidden_activation", activation_name(self.proposed.hidden_activation).into());
        kv("conventional.hidden", join(&self.conventional.hidden));
        kv("conventional.steps", self.conventional_steps.to_string());
        kv("solver.tol", self.solver.tol.to_string());
        kv("solver.max_iter", self.solver.max_iter.to_string());
        kv("solver.bisection_tol", self.solver.bisection_tol.to_string());
        kv("baseline.random_trials", self.random_trials.to_string());
        kv("sweep.d0", join(&self.sweep_d0));
        kv("sweep.n", join(&self.sweep_n));
        kv("complexity.n", join(&self.complexity_n));
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config(format!("n and m must be >= 1, got n={}, m={}", self.n, self.m)));
        }
        if self.seed_count == 0 {
            return Err(Error::Config("seed_count must be >= 1".into()));
        }
        if self.random_trials == 0 {
            return Err(Error::Config("baseline.random_trials must be >= 1".into()));
        }
        if self.conventional_steps == 0 {
            return Err(Error::Config("conventional.steps must be >= 1".into()));
        }
        if self.sweep_d0.is_empty() || self.sweep_n.is_empty() || self.complexity_n.is_empty() {
            return Err(Error::Config("grids must be non-empty".into()));
        }
        self.budget.validate()?;
        self.agent.validate()?;
        let mut seeds = self.run_seeds();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seed_count {
            return Err(Error::Config("derived run seeds collide".into()));
        }
        Ok(())
    }

    /// Per-run seeds expanded from the master seed.
    pub fn run_seeds(&self) -> Vec<u64> {
        (0..self.seed_count as u64).map(|i| derive_seed(self.seed, "run", i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.mode = OperatingMode::Fd;
        cfg.agent.gating = Gating::Full;
        cfg.agent.tau = 0.005;
        cfg.budget.pmax_dbm = 10.0;
        cfg.sweep_d0 = vec![0.5, 12.25];
        cfg.output_dir = Some(PathBuf::from("/tmp/x"));
        cfg.proposed.hidden_activation = Activation::Relu;
        let back = ExperimentConfig::parse(&cfg.to_text(), Path::new("mem")).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_text(), cfg.to_text());
    }

    #[test]
    fn grammar() {
        let text = "
            # comment
            mode = fd   # trailing comment
            agent.alpha = 0.0005
            sweep.n = 8..24:8
            complexity.n = 20..22
            conventional.hidden = 64, 32
        ";
        let cfg = ExperimentConfig::parse(text, Path::new("c.conf")).unwrap();
        assert_eq!(cfg.mode, OperatingMode::Fd);
        assert_eq!(cfg.agent.actor_alpha, 5e-4);
        assert_eq!(cfg.agent.critic_alpha, 5e-4);
        assert_eq!(cfg.sweep_n, vec![8, 16, 24]);
        assert_eq!(cfg.complexity_n, vec![20, 21, 22]);
        assert_eq!(cfg.conventional.hidden, [64, 32]);
        let cfg = ExperimentConfig::parse("geometry.d0 = 80\ngeometry.d1 = 100", Path::new("c")).unwrap();
        assert_eq!((cfg.geometry.d0(), cfg.geometry.d1()), (80.0, 100.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ExperimentConfig::parse("n = 4\nagent.gama = 0.9\n", Path::new("c.conf")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("agent.gama"), "{msg}");
        assert!(ExperimentConfig::parse("n 4", Path::new("c")).is_err());
        assert!(ExperimentConfig::parse("sweep.n = 60..20", Path::new("c")).is_err());
        assert!(ExperimentConfig::parse("agent.gating = sometimes", Path::new("c")).is_err());
    }

    #[test]
    fn run_seeds_are_distinct_and_stable() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.run_seeds(), cfg.run_seeds());
        assert_eq!(cfg.run_seeds().len(), 5);
    }
}
