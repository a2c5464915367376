use clap::{Args, Parser, Subcommand};
use rand::Rng;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use super::{
    complexity_meta, complexity_report, episode_channels, evaluator, random_phase_baseline, resolve_output_dir,
    run_parallel, run_training, stats, sweep_d0, sweep_n, without_ris_rate, write_complexity_csv, write_csv,
    write_curve_csv, Design, ExperimentConfig, RunRecord, RunSpec, SweepTable,
};
use crate::ddpg::{select_action, Gating};
use crate::error::{Error, Result};
use crate::harness::config::parse_usize_grid;
use crate::neural::{read_checkpoint, write_checkpoint};
use crate::seed::{derive_seed, stream};
use crate::sigmodel::{OperatingMode, PhaseShiftVector};

#[derive(Debug, Parser)]
#[command(name = "risdrl", version, about = "RIS phase-shift optimization with DDPG")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to one operating mode
    #[arg(long, global = true)]
    mode: Option<OperatingMode>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Start minibatch updates only once the replay memory is full
    #[arg(long, global = true)]
    strict_paper: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one agent and write its learning curve, record and checkpoints
    Train(TrainArgs),
    /// Roll out a trained actor greedily on fresh channels
    Eval(EvalArgs),
    /// Sweep the RIS position along the BS-UE line
    SweepD0(SweepArgs),
    /// Sweep the number of RIS elements
    SweepN(SweepArgs),
    /// Network complexity table
    Complexity(ComplexityArgs),
    /// Random-phase and without-RIS rates on the training channels
    Baseline(BaselineArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Train the two-dense-layer baseline instead
    #[arg(long)]
    conventional: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Actor checkpoint written by `train`
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated grid, ascending (sweep-n also takes `lo..hi[:step]`)
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    /// N grid, e.g. `20..60` or `20,40,60`
    #[arg(long)]
    n: Option<String>,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
}

/// Entry point of the `risdrl` binary. Returns the process exit code:
/// 0 on success, 2 on usage or configuration errors, 1 otherwise.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e @ (Error::Config(_) | Error::Parse { .. } | Error::Domain(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn modes(cli: &Cli) -> Vec<OperatingMode> {
    match cli.mode {
        Some(m) => vec![m],
        None => vec![OperatingMode::Hd, OperatingMode::Fd],
    }
}

fn run(cli: Cli) -> Result<String> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = mode;
    }
    if cli.strict_paper {
        cfg.agent.gating = Gating::Full;
    }
    let out = resolve_output_dir(cli.out.as_deref(), &cfg);
    match &cli.command {
        Command::Train(a) => {
            if let Some(n) = a.n {
                cfg.n = n;
            }
            override_len(&mut cfg, a.episodes, a.steps);
            train_cmd(&cfg, a.conventional, &out)
        }
        Command::Eval(a) => {
            override_len(&mut cfg, a.episodes, a.steps);
            eval_cmd(&cfg, &a.checkpoint, &out)
        }
        Command::SweepD0(a) => {
            override_len(&mut cfg, a.episodes, a.steps);
            if let Some(s) = a.seeds {
                cfg.seed_count = s;
            }
            if let Some(g) = &a.grid {
                cfg.set("sweep.d0", g)?;
            }
            let table = sweep_d0(&cfg, &modes(&cli))?;
            write_sweep(&table, &out, "sweep_d0")
        }
        Command::SweepN(a) => {
            override_len(&mut cfg, a.episodes, a.steps);
            if let Some(s) = a.seeds {
                cfg.seed_count = s;
            }
            if let Some(g) = &a.grid {
                cfg.set("sweep.n", g)?;
            }
            let table = sweep_n(&cfg, &modes(&cli))?;
            write_sweep(&table, &out, "sweep_n")
        }
        Command::Complexity(a) => {
            if let Some(g) = &a.n {
                cfg.complexity_n = parse_usize_grid("--n", g)?;
            }
            complexity_cmd(&cfg, &out)
        }
        Command::Baseline(a) => {
            if let Some(t) = a.trials {
                cfg.random_trials = t;
            }
            override_len(&mut cfg, a.episodes, None);
            baseline_cmd(&cfg, &modes(&cli), &out)
        }
    }
}

fn override_len(cfg: &mut ExperimentConfig, episodes: Option<usize>, steps: Option<usize>) {
    if let Some(k) = episodes {
        cfg.agent.episodes = k;
    }
    if let Some(t) = steps {
        cfg.agent.steps = t;
    }
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn train_cmd(cfg: &ExperimentConfig, conventional: bool, out: &Path) -> Result<String> {
    cfg.validate()?;
    prepare(out)?;
    let design = if conventional { Design::Conventional } else { Design::Proposed };
    let seed = cfg.run_seeds()[0];
    let spec = RunSpec { mode: cfg.mode, n: cfg.n, d0: cfg.geometry.d0(), seed, design };
    let run = run_training(cfg, spec)?;
    let stem = format!("train_{}{}", cfg.mode, if conventional { "_conventional" } else { "" });
    write_curve_csv(&out.join(format!("{stem}_curve.csv")), &run.train.curve)?;
    let record = RunRecord::new(cfg, &run)?;
    record.write(&out.join(format!("{stem}_record.json")))?;
    write_checkpoint(&out.join(format!("{stem}_actor.ckpt")), &run.actor, true)?;
    write_checkpoint(&out.join(format!("{stem}_critic.ckpt")), &run.critic, true)?;
    if let Some(f) = &run.train.failure {
        return Err(Error::Numeric(format!("training aborted, partial results in {}: {f}", out.display())));
    }
    Ok(format!(
        "train mode={} n={} best_rate={:.4} bps/Hz mean_episode_best={:.4} record={}",
        cfg.mode,
        cfg.n,
        run.train.best_rate,
        run.mean_episode_best(),
        record.record_hash
    ))
}

/// Greedy rollouts of a stored actor on channels from the `eval` stream,
/// next to the random-phase baseline on the same channels.
fn eval_cmd(cfg: &ExperimentConfig, checkpoint: &Path, out: &Path) -> Result<String> {
    cfg.validate()?;
    prepare(out)?;
    let actor = read_checkpoint(checkpoint)?;
    let n = actor.spec.output_size();
    if actor.spec.input_size() != n + 1 {
        return Err(Error::Config(format!("{} is not an actor checkpoint", checkpoint.display())));
    }
    let ev = evaluator(cfg);
    let seed = cfg.run_seeds()[0];
    let mut rows = Vec::new();
    let (mut greedy, mut random) = (Vec::new(), Vec::new());
    for k in 0..cfg.agent.episodes {
        // fresh channels, never seen in training
        let ch = episode_channels(cfg, &cfg.geometry, n, derive_seed(seed, "eval", 0), k)?;
        let mut rng = stream(seed, "eval-rollout", k as u64);
        let phi0: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
        let mut r = ev.rate(&ch, &PhaseShiftVector::new(phi0.clone()), cfg.mode)?;
        let mut best = r;
        let mut phi = phi0;
        for _ in 0..cfg.agent.steps {
            let mut s = vec![r];
            s.extend_from_slice(&phi);
            phi = select_action(&actor, &s, 0.0, &mut rng)?;
            r = ev.rate(&ch, &PhaseShiftVector::new(phi.clone()), cfg.mode)?;
            best = best.max(r);
        }
        let base = random_phase_baseline(&ch, cfg.mode, &ev, cfg.random_trials, &mut rng)?;
        let wo = without_ris_rate(&ch, cfg.mode, &ev)?;
        rows.push(vec![k.to_string(), best.to_string(), base.to_string(), wo.to_string()]);
        greedy.push(best);
        random.push(base);
    }
    let path = out.join(format!("eval_{}.csv", cfg.mode));
    write_csv(&path, &["episode", "greedy_best_bps_hz", "random_bps_hz", "without_ris_bps_hz"], rows)?;
    Ok(format!(
        "eval mode={} n={n} greedy_mean={:.4} random_mean={:.4} -> {}",
        cfg.mode,
        stats::mean(&greedy),
        stats::mean(&random),
        path.display()
    ))
}

fn write_sweep(table: &SweepTable, out: &Path, stem: &str) -> Result<String> {
    prepare(out)?;
    let cells = out.join(format!("{stem}_cells.csv"));
    let summary = out.join(format!("{stem}.csv"));
    table.write_cells_csv(&cells)?;
    table.write_summary_csv(&summary)?;
    let failed = table.cells.iter().filter(|c| c.error.is_some()).count();
    Ok(format!(
        "{stem}: {} cells ({failed} failed) -> {}, {}",
        table.cells.len(),
        summary.display(),
        cells.display()
    ))
}

fn complexity_cmd(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    if cfg.complexity_n.is_empty() {
        return Err(Error::Config("empty N grid".into()));
    }
    prepare(out)?;
    let rows = complexity_report(cfg)?;
    let path = out.join("complexity.csv");
    write_complexity_csv(&path, &rows)?;
    std::fs::write(out.join("complexity.json"), serde_json::to_vec_pretty(&complexity_meta(cfg))?)?;
    let (first, last) = (rows.first().unwrap(), rows.last().unwrap());
    Ok(format!(
        "complexity: N={}..{} red_p {:.4} -> {:.4}, red_m {:.4} -> {:.4} -> {}",
        first.n,
        last.n,
        first.red_p,
        last.red_p,
        first.red_m,
        last.red_m,
        path.display()
    ))
}

fn baseline_cmd(cfg: &ExperimentConfig, modes: &[OperatingMode], out: &Path) -> Result<String> {
    cfg.validate()?;
    prepare(out)?;
    let mut jobs = Vec::new();
    for &mode in modes {
        for seed in cfg.run_seeds() {
            jobs.push((mode, seed));
        }
    }
    let results = run_parallel(cfg.threads, jobs.clone(), |(mode, seed)| {
        super::run_baselines(cfg, &cfg.geometry, cfg.n, mode, seed, cfg.agent.episodes)
    })?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for ((mode, seed), res) in jobs.into_iter().zip(results) {
        let (mean, per_episode) = res?;
        for (k, b) in per_episode.iter().enumerate() {
            rows.push(vec![mode.to_string(), seed.to_string(), k.to_string(), b.random.to_string(), b.without_ris.to_string()]);
        }
        summary.push(format!("{mode}/{seed}: random={:.4} without_ris={:.4}", mean.random, mean.without_ris));
    }
    let path = out.join("baseline.csv");
    write_csv(&path, &["mode", "seed", "episode", "random_bps_hz", "without_ris_bps_hz"], rows)?;
    Ok(format!("baseline: {} -> {}", summary.join("; "), path.display()))
}
