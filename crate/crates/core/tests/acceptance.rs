//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.
//!
//! Set `RISDRL_ACCEPTANCE_ONLY=1,4,8` to run a subset.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use risdrl::beamforming::{
    bisection_dual, dual_solution, fd_alternating_solve, mrt_beamformer, FdSolverConfig,
};
use risdrl::channel::{generate_channel_set, Geometry, LinkBudget};
use risdrl::complexity::{
    asymptotic_reduction, conventional_complexity, count_parameters, proposed_complexity, reduction_at, Chi,
};
use risdrl::ddpg::{
    actor_objective_and_grad, critic_loss_and_grad, Agent, AgentConfig, Environment, Gating, TraceEvent, Transition,
};
use risdrl::harness::stats::{intervals_overlap, mean, one_sided_t};
use risdrl::harness::{
    episode_channels, run_baselines, run_training, sweep_d0, Design, ExperimentConfig, Method, RunSpec,
};
use risdrl::neural::{
    backward, build_actor, build_conventional_actor, build_conventional_critic, build_critic, forward, Activation,
    ConventionalHyper, LayerSpec, Network, NetworkSpec, ParameterSet, ProposedHyper,
};
use risdrl::sigmodel::{effective_channel, rate_hd, Beamformer, Node, OperatingMode, PhaseShiftVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------- gradients

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        norm(&d)
    } else {
        norm(&d) / scale
    }
}

fn central_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let up = f(&x);
            x[i] = orig - h;
            let down = f(&x);
            x[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// True when some ReLU pre-activation sits so close to the kink that a
/// finite difference would straddle it.
fn near_kink(spec: &NetworkSpec, params: &[f64], input: &[f64]) -> bool {
    let (_, cache) = forward(spec, params, input).unwrap();
    spec.layers().iter().enumerate().any(|(k, l)| {
        let relu = matches!(
            l,
            LayerSpec::Conv1d { activation: Activation::Relu, .. } | LayerSpec::Dense { activation: Activation::Relu, .. }
        );
        relu && cache.pre_activations(k).iter().any(|z| z.abs() < 1e-4)
    })
}

fn perturbed(net: &Network, rng: &mut ChaCha8Rng) -> Vec<f64> {
    net.params.values().iter().map(|v| v + rng.random_range(-0.3..0.3)).collect()
}

/// Checks parameter and input gradients of `c . f(x)` for one network.
fn check_network(spec: &NetworkSpec, params: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let mut input: Vec<f64> = (0..spec.input_size()).map(|_| rng.random_range(-1.5..1.5)).collect();
    for _ in 0..100 {
        if !near_kink(spec, params, &input) {
            break;
        }
        input = (0..spec.input_size()).map(|_| rng.random_range(-1.5..1.5)).collect();
    }
    let c: Vec<f64> = (0..spec.output_size()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, cache) = forward(spec, params, &input).unwrap();
    let (gp, gx) = backward(spec, params, &cache, &c).unwrap();
    let obj = |p: &[f64], x: &[f64]| -> f64 {
        let (y, _) = forward(spec, p, x).unwrap();
        y.iter().zip(&c).map(|(a, b)| a * b).sum()
    };
    let np = central_diff(&mut |p| obj(p, &input), params, 1e-5);
    let nx = central_diff(&mut |x| obj(params, x), &input, 1e-5);
    rel_err(&gp, &np).max(rel_err(&gx, &nx))
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let acts = [Activation::Relu, Activation::Softmax, Activation::Linear, Activation::TanhScaled(PI)];
    let mut worst = 0.0f64;
    let mut cases = 0usize;
    let mut record = |e: f64| {
        worst = worst.max(e);
        cases += 1;
    };

    // single layers of every kind and activation
    for i in 0..60 {
        let act = acts[i % 4];
        let input = rng.random_range(4..12);
        let layers = match i % 3 {
            0 => vec![LayerSpec::dense(rng.random_range(1..6), act)],
            1 => vec![LayerSpec::conv1d(rng.random_range(1..4), rng.random_range(1..4), rng.random_range(1..3), act)],
            _ => vec![
                LayerSpec::conv1d(rng.random_range(1..4), 2, 1, Activation::Relu),
                LayerSpec::Flatten,
                LayerSpec::dense(rng.random_range(1..5), act),
            ],
        };
        let spec = NetworkSpec::new(input, layers).unwrap();
        let mut params = spec.init_params(&mut rng).values().to_vec();
        for p in params.iter_mut() {
            *p += rng.random_range(-0.3..0.3);
        }
        record(check_network(&spec, &params, &mut rng));
    }

    // both roles, both designs
    for i in 0..80 {
        let n = rng.random_range(3..8);
        let hyper = ProposedHyper {
            filters: rng.random_range(1..5),
            width: rng.random_range(1..4),
            stride: rng.random_range(1..3),
            hidden: rng.random_range(2..12),
            hidden_activation: if i % 2 == 0 { Activation::Softmax } else { Activation::Relu },
        };
        let conv = ConventionalHyper { hidden: [rng.random_range(2..10), rng.random_range(2..10)] };
        let net = match i % 4 {
            0 => build_actor(n, &hyper, &mut rng).unwrap(),
            1 => build_critic(n, &hyper, &mut rng).unwrap(),
            2 => build_conventional_actor(n, &conv, &mut rng).unwrap(),
            _ => build_conventional_critic(n, &conv, &mut rng).unwrap(),
        };
        let params = perturbed(&net, &mut rng);
        record(check_network(&net.spec, &params, &mut rng));
    }

    // critic loss and the actor's chain through the critic
    for i in 0..60 {
        let n = rng.random_range(3..6);
        let hyper = ProposedHyper { width: 2, stride: 1, hidden: 6, ..ProposedHyper::default() };
        let mut actor = build_actor(n, &hyper, &mut rng).unwrap();
        let mut critic = build_critic(n, &hyper, &mut rng).unwrap();
        let ap = perturbed(&actor, &mut rng);
        actor.params = ParameterSet::from_values(ap);
        let cp = perturbed(&critic, &mut rng);
        critic.params = ParameterSet::from_values(cp);
        let batch: Vec<Transition> = (0..4)
            .map(|_| {
                let s: Vec<f64> = (0..=n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let a: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                Transition { s: s.clone(), a, r: rng.random_range(0.0..3.0), s_next: s }
            })
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        if i % 2 == 0 {
            let y: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..4.0)).collect();
            let (_, g) = critic_loss_and_grad(&critic, &refs, &y).unwrap();
            let base = critic.clone();
            let num = central_diff(
                &mut |p| {
                    let mut c = base.clone();
                    c.params = ParameterSet::from_values(p.to_vec());
                    critic_loss_and_grad(&c, &refs, &y).unwrap().0
                },
                critic.params.values(),
                1e-5,
            );
            record(rel_err(&g, &num));
        } else {
            let states: Vec<&[f64]> = batch.iter().map(|t| t.s.as_slice()).collect();
            let (_, g) = actor_objective_and_grad(&actor, &critic, &states).unwrap();
            let base = actor.clone();
            let num = central_diff(
                &mut |p| {
                    let mut a = base.clone();
                    a.params = ParameterSet::from_values(p.to_vec());
                    actor_objective_and_grad(&a, &critic, &states).unwrap().0
                },
                actor.params.values(),
                1e-5,
            );
            record(rel_err(&g, &num));
        }
    }
    outcome(worst <= 1e-5 && cases >= 200, format!("{cases} cases, worst relative error {worst:.2e} (limit 1e-5)"))
}

// -------------------------------------------------------------- beamforming

fn random_cvec(m: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    DVector::from_fn(m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let budget = LinkBudget::default();
    let (pmax, sigma2) = (budget.pmax_mw(), budget.sigma2_mw());
    let mut mrt_losses = 0;
    for _ in 0..50 {
        let ch = generate_channel_set(&Geometry::reference(), &budget, 8, 4, &mut rng).unwrap();
        let phi = PhaseShiftVector::new((0..8).map(|_| rng.random_range(-PI..PI)).collect());
        let h = effective_channel(&ch, &phi, Node::Ue).unwrap();
        let best = rate_hd(&ch, &phi, &mrt_beamformer(&h, pmax).unwrap(), sigma2).unwrap();
        for _ in 0..1000 {
            let w = random_cvec(4, &mut rng);
            let scale = (rng.random_range(0.0..=1.0) * pmax / w.norm_squared()).sqrt();
            let w = Beamformer::new(w.map(|z| z * scale), pmax).unwrap();
            if rate_hd(&ch, &phi, &w, sigma2).unwrap() > best {
                mrt_losses += 1;
            }
        }
    }

    let cfg = FdSolverConfig::default();
    let (mut fd_power_bad, mut fd_regress) = (0, 0);
    for _ in 0..50 {
        let ch = generate_channel_set(&Geometry::reference(), &budget, 8, 4, &mut rng).unwrap();
        let phi = PhaseShiftVector::new((0..8).map(|_| rng.random_range(-PI..PI)).collect());
        let sol = fd_alternating_solve(&ch, &phi, pmax, sigma2, &cfg).unwrap();
        if sol.w_bs.power() > pmax * (1.0 + 1e-6) || sol.w_ue.power() > pmax * (1.0 + 1e-6) {
            fd_power_bad += 1;
        }
        if sol.sum_rate < sol.initial_sum_rate - cfg.tol {
            fd_regress += 1;
        }
    }

    let (mut active, mut worst) = (0, 0.0f64);
    for i in 0..500 {
        let b = random_cvec(4, &mut rng);
        let s = random_cvec(4, &mut rng);
        let delta = 10f64.powf(rng.random_range(-3.0..3.0)) * if i % 10 == 0 { 0.0 } else { 1.0 };
        let p = b.norm_squared() * 10f64.powf(rng.random_range(-4.0..1.0));
        let v = bisection_dual(&b, &s, delta, p, 1e-8).unwrap();
        if v > 0.0 {
            active += 1;
            let w = dual_solution(&b, &s, delta, v).unwrap();
            worst = worst.max((w.norm_squared() - p).abs() / p);
        }
    }
    outcome(
        mrt_losses == 0 && fd_power_bad == 0 && fd_regress == 0 && active > 0 && worst <= 1e-8,
        format!(
            "MRT beaten {mrt_losses}/50000; FD power violations {fd_power_bad}/50, regressions {fd_regress}/50; \
             bisection {active} active cases, worst |P(v)-P|/P {worst:.2e}"
        ),
    )
}

// --------------------------------------------------------------- complexity

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut mismatches = 0;
    for _ in 0..20 {
        let eta = [rng.random_range(1..100), rng.random_range(1..300), rng.random_range(1..300), rng.random_range(1..100)];
        let spec = NetworkSpec::new(
            eta[0],
            vec![
                LayerSpec::dense(eta[1], Activation::Relu),
                LayerSpec::dense(eta[2], Activation::Relu),
                LayerSpec::dense(eta[3], Activation::Linear),
            ],
        )
        .unwrap();
        if conventional_complexity(eta).unwrap().c_p != count_parameters(&spec) {
            mismatches += 1;
        }
    }
    for _ in 0..20 {
        let (fz, fs) = (rng.random_range(1..6), rng.random_range(1..4));
        let eta1 = rng.random_range(fz..120);
        let (fn_, eta3, eta4) = (rng.random_range(1..12), rng.random_range(1..200), rng.random_range(1..60));
        let spec = NetworkSpec::new(
            eta1,
            vec![
                LayerSpec::conv1d(fn_, fz, fs, Activation::Relu),
                LayerSpec::Flatten,
                LayerSpec::dense(eta3, Activation::Softmax),
                LayerSpec::dense(eta4, Activation::Linear),
            ],
        )
        .unwrap();
        if proposed_complexity(eta1, eta3, eta4, fz, fn_, fs).unwrap().c_p != count_parameters(&spec) {
            mismatches += 1;
        }
    }

    let (p, c) = (ProposedHyper::default(), ConventionalHyper::default());
    let in_range = (20..=60).all(|n| {
        let r = reduction_at(n, Chi::M, &p, &c).unwrap();
        r > 0.0 && r < 1.0
    });
    let (r20, r60) = (reduction_at(20, Chi::M, &p, &c).unwrap(), reduction_at(60, Chi::M, &p, &c).unwrap());
    let limit = asymptotic_reduction(Chi::M, &p, &c);
    let at_1e5 = reduction_at(100_000, Chi::M, &p, &c).unwrap();
    let gap = (at_1e5 - limit).abs();
    outcome(
        mismatches == 0 && in_range && gap <= 1e-3,
        format!(
            "enumeration mismatches {mismatches}/40; reduction_M in (0,1) over N=20..60: {in_range} \
             ({r20:.4} -> {r60:.4}); N=1e5 value {at_1e5:.6} vs asymptote {limit:.6}, gap {gap:.2e} (limit 1e-3)"
        ),
    )
}

// ------------------------------------------------------------- N=1 oracle

fn criterion_4() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.n = 1;
    cfg.m = 2;
    cfg.agent = AgentConfig { episodes: 10, steps: 200, ..cfg.agent };
    // a width-4 kernel does not fit the 2-long N=1 state
    cfg.proposed.width = 2;
    cfg.proposed.stride = 1;
    let ev = risdrl::harness::evaluator(&cfg);
    let grid_best = |seed: u64, k: usize| -> f64 {
        let ch = episode_channels(&cfg, &cfg.geometry, 1, seed, k).unwrap();
        (0..4096)
            .map(|j| {
                let phi = PhaseShiftVector::new(vec![-PI + j as f64 * 2.0 * PI / 4096.0]);
                ev.rate(&ch, &phi, OperatingMode::Hd).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut hits = 0;
    let mut ratios = Vec::new();
    for (i, seed) in (0..5u64).map(|i| risdrl::seed::derive_seed(404, "n1", i)).enumerate() {
        let spec = RunSpec { mode: OperatingMode::Hd, n: 1, d0: cfg.geometry.d0(), seed, design: Design::Proposed };
        let run = run_training(&cfg, spec).unwrap();
        // channels change per episode, so the returned pair is judged on the
        // channel it was observed on
        let eps = &run.train.episodes;
        let k = (0..eps.len()).find(|&k| eps[k].best_rate == run.train.best_rate).unwrap();
        let ratio = run.train.best_rate / grid_best(seed, k);
        let last = eps.len() - 1;
        let last_ratio = eps[last].best_rate / grid_best(seed, last);
        if run.train.failure.is_none() && ratio >= 0.95 {
            hits += 1;
        }
        ratios.push(format!("s{i}={ratio:.4} (last episode {last_ratio:.4})"));
    }
    outcome(
        hits >= 4,
        format!("{hits}/5 seeds return a pair >= 0.95 of its channel's 4096-point grid optimum: {}", ratios.join(", ")),
    )
}

// ------------------------------------------------------ learning & placement

struct SweepData {
    d0: risdrl::harness::SweepTable,
    seconds: f64,
}

fn desk_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 505;
    cfg.n = 16;
    cfg.agent.episodes = 40;
    cfg.agent.steps = 800;
    cfg.threads = 0;
    cfg
}

fn placement_sweep() -> SweepData {
    let start = Instant::now();
    let mut cfg = desk_config();
    cfg.sweep_d0 = vec![1.0, 25.0, 49.0];
    let d0 = sweep_d0(&cfg, &[OperatingMode::Hd, OperatingMode::Fd]).unwrap();
    SweepData { d0, seconds: start.elapsed().as_secs_f64() }
}

fn criterion_5(sweep: &SweepData) -> Outcome {
    let start = Instant::now();
    let cfg = desk_config();
    let agent = risdrl::harness::agent_config_for(&cfg, Design::Proposed);
    let mut lines = Vec::new();
    let mut pass = true;
    for mode in [OperatingMode::Hd, OperatingMode::Fd] {
        // N=16 at d0=1 is exactly the placement sweep's first column
        let drl16 = sweep.d0.values(1.0, mode, Method::Drl);
        let rnd16 = sweep.d0.values(1.0, mode, Method::Random);
        let gain16: Vec<f64> = drl16.iter().zip(&rnd16).map(|(a, b)| a - b).collect();

        let mut gain24 = Vec::new();
        for seed in cfg.run_seeds() {
            let spec = RunSpec { mode, n: 24, d0: cfg.geometry.d0(), seed, design: Design::Proposed };
            let run = run_training(&cfg, spec).unwrap();
            assert_eq!(run.agent, agent, "HD and FD must share one agent configuration");
            let (b, _) = run_baselines(&cfg, &cfg.geometry, 24, mode, seed, run.train.episodes.len()).unwrap();
            gain24.push(run.mean_episode_best() - b.random);
        }
        let (t16, crit, sig16) = one_sided_t(&gain16, 0.05);
        let trend = mean(&gain24) > mean(&gain16);
        pass &= gain16.len() == 5 && sig16 && trend;
        lines.push(format!(
            "{mode}: gain@16 {:.3} (t={t16:.2} vs {crit:.3}) gain@24 {:.3}",
            mean(&gain16),
            mean(&gain24)
        ));
    }
    let secs = start.elapsed().as_secs_f64() + sweep.seconds;
    outcome(pass && secs < 7200.0, format!("{}; {secs:.0}s", lines.join("; ")))
}

fn criterion_6(sweep: &SweepData) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for mode in [OperatingMode::Hd, OperatingMode::Fd] {
        let drl = |d0: f64| mean(&sweep.d0.values(d0, mode, Method::Drl));
        let (near_bs, mid, near_ue) = (drl(1.0), drl(25.0), drl(49.0));
        let rnd = sweep.d0.values(25.0, mode, Method::Random);
        let wo = sweep.d0.values(25.0, mode, Method::WithoutRis);
        let overlap = intervals_overlap(&rnd, &wo);
        let ok = near_bs > mid && near_ue > mid && overlap && rnd.len() == 5 && wo.len() == 5;
        pass &= ok;
        lines.push(format!(
            "{mode}: drl d0=1 {near_bs:.3}, d0=25 {mid:.3}, d0=49 {near_ue:.3}; midpoint random {:.3} vs without-RIS {:.3} overlap={overlap}",
            mean(&rnd),
            mean(&wo)
        ));
    }
    let failed = sweep.d0.cells.iter().filter(|c| c.error.is_some()).count();
    pass &= failed == 0;
    outcome(pass && sweep.seconds < 7200.0, format!("{}; {failed} failed cells; {:.0}s", lines.join("; "), sweep.seconds))
}

// -------------------------------------------------------------- determinism

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("small.conf");
    std::fs::write(
        &conf,
        "n = 6\nm = 2\nseed_count = 2\nthreads = 2\nagent.episodes = 2\nagent.steps = 60\n\
         baseline.random_trials = 5\nproposed.hidden = 16\nsweep.d0 = 1,25\n",
    )
    .unwrap();
    let run = |tag: &str, args: &[&str]| -> std::path::PathBuf {
        let out = dir.path().join(tag);
        let mut argv = vec!["risdrl", "--config", conf.to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()];
        argv.extend_from_slice(args);
        assert_eq!(risdrl::harness::cli::cli_main(argv), 0, "{args:?}");
        out
    };
    let mut compared = 0;
    let mut differing = Vec::new();
    for (name, args, files) in [
        ("train_hd", vec!["train", "--mode", "hd"], vec!["train_hd_curve.csv"]),
        ("train_fd", vec!["train", "--mode", "fd"], vec!["train_fd_curve.csv"]),
        ("sweep", vec!["sweep-d0"], vec!["sweep_d0.csv", "sweep_d0_cells.csv"]),
        ("complexity", vec!["complexity", "--n", "20..60"], vec!["complexity.csv"]),
    ] {
        let a = run(&format!("{name}_a"), &args);
        let b = run(&format!("{name}_b"), &args);
        for f in files {
            compared += 1;
            if std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap() {
                differing.push(f.to_string());
            }
        }
        if name.starts_with("train") {
            let rec = |d: &std::path::Path| {
                risdrl::harness::RunRecord::read(&d.join(format!("{name}_record.json"))).unwrap().record_hash
            };
            compared += 1;
            if rec(&a) != rec(&b) {
                differing.push(format!("{name} record hash"));
            }
        }
    }
    outcome(differing.is_empty(), format!("{compared} artifacts compared across repeated runs, differing: {differing:?}"))
}

// ------------------------------------------------------ agent step order

struct CosEnv;

impl Environment for CosEnv {
    fn n_elements(&self) -> usize {
        1
    }

    fn reward(&mut self, phi: &PhaseShiftVector) -> risdrl::Result<f64> {
        Ok(1.0 + 0.5 * phi.as_slice()[0].cos())
    }
}

fn scalar_net(input: usize, values: &[f64]) -> Network {
    let spec = NetworkSpec::new(input, vec![LayerSpec::dense(1, Activation::Linear)]).unwrap();
    Network::new(spec, ParameterSet::from_values(values.to_vec())).unwrap()
}

fn adam_first(x: f64, g: f64, alpha: f64) -> f64 {
    // first bias-corrected step: m_hat = g, v_hat = g^2
    x - alpha * g / (g.abs() + 1e-8)
}

fn criterion_8() -> Outcome {
    let th = [0.2, -0.1, 0.05];
    let c = [0.3, 0.1, 0.4, -0.2];
    let (gamma, tau, alpha) = (0.9, 0.1, 0.01);
    let cfg = AgentConfig {
        gamma,
        tau,
        actor_alpha: alpha,
        critic_alpha: alpha,
        noise_var: 0.0,
        episodes: 1,
        steps: 1,
        capacity: 1,
        batch: 1,
        gating: Gating::MinBatch,
        reset_buffer_each_episode: false,
        normalize_rate: false,
    };
    let mut agent = Agent::new(scalar_net(2, &th), scalar_net(3, &c), cfg).unwrap();
    let s0 = agent.observe(1.2, &[0.3]);
    let mut events = Vec::new();
    let out = agent
        .step(&mut CosEnv, &s0, &mut ChaCha8Rng::seed_from_u64(0), &mut |e: &TraceEvent| events.push(e.clone()))
        .unwrap();

    // by hand
    let a = th[0] * 1.2 + th[1] * 0.3 + th[2];
    let r = 1.0 + 0.5 * a.cos();
    let mu_next = th[0] * r + th[1] * a + th[2];
    let y = r + gamma * (c[0] * r + c[1] * a + c[2] * mu_next + c[3]);
    let q = c[0] * 1.2 + c[1] * 0.3 + c[2] * a + c[3];
    let loss = (q - y) * (q - y);
    let x_c = [1.2, 0.3, a, 1.0];
    let c_new: Vec<f64> = (0..4).map(|i| adam_first(c[i], 2.0 * (q - y) * x_c[i], alpha)).collect();
    // actor gradient uses the critic after its step
    let x_a = [1.2, 0.3, 1.0];
    let g_a: Vec<f64> = (0..3).map(|i| c_new[2] * x_a[i]).collect();
    let th_new: Vec<f64> = (0..3).map(|i| adam_first(th[i], -g_a[i], alpha)).collect();
    let tc: Vec<f64> = (0..4).map(|i| tau * c_new[i] + (1.0 - tau) * c[i]).collect();
    let ta: Vec<f64> = (0..3).map(|i| tau * th_new[i] + (1.0 - tau) * th[i]).collect();

    let kinds: Vec<&str> = events
        .iter()
        .map(|e| match e {
            TraceEvent::Action(_) => "action",
            TraceEvent::EnvStep { .. } => "env",
            TraceEvent::Store { .. } => "store",
            TraceEvent::Sample { .. } => "sample",
            TraceEvent::Target(_) => "target",
            TraceEvent::CriticStep { .. } => "critic",
            TraceEvent::ActorStep { .. } => "actor",
            TraceEvent::SoftUpdate => "soft",
        })
        .collect();
    let order_ok = kinds == ["action", "env", "store", "sample", "target", "critic", "actor", "soft"];
    let close = |u: &[f64], v: &[f64]| u.len() == v.len() && u.iter().zip(v).all(|(p, q)| (p - q).abs() < 1e-12);
    let upd = out.update.clone().unwrap();
    let values_ok = close(&out.action, &[a])
        && (out.reward - r).abs() < 1e-12
        && close(&out.next_state, &[r, a])
        && close(&upd.targets, &[y])
        && (upd.critic_loss - loss).abs() < 1e-12
        && close(agent.critic.params.values(), &c_new)
        && close(agent.actor.params.values(), &th_new)
        && close(agent.target_critic.params.values(), &tc)
        && close(agent.target_actor.params.values(), &ta);
    outcome(order_ok && values_ok, format!("event order {kinds:?}; hand-computed values match: {values_ok}"))
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("RISDRL_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |i: u32| only.as_ref().is_none_or(|o| o.contains(&i));
    let names = [
        "gradient suite",
        "beamforming optimality",
        "complexity oracle",
        "N=1 exhaustive oracle",
        "learning gain over random phases",
        "placement trend",
        "determinism",
        "agent step update order",
    ];
    let limits = [60.0, 60.0, f64::INFINITY, 300.0, 7200.0, 7200.0, f64::INFINITY, f64::INFINITY];
    let mut results: Vec<(u32, Outcome, f64)> = Vec::new();
    let mut run = |i: u32, f: &mut dyn FnMut() -> Outcome| {
        if wanted(i) {
            let start = Instant::now();
            let o = f();
            let secs = start.elapsed().as_secs_f64();
            let o = if secs > limits[i as usize - 1] {
                Outcome { pass: false, detail: format!("{} (over the {}s budget)", o.detail, limits[i as usize - 1]) }
            } else {
                o
            };
            println!("criterion {i} [{}] {}: {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, names[i as usize - 1], o.detail);
            results.push((i, o, secs));
        }
    };
    run(1, &mut criterion_1);
    run(2, &mut criterion_2);
    run(3, &mut criterion_3);
    run(4, &mut criterion_4);
    run(8, &mut criterion_8);
    run(7, &mut criterion_7);
    if wanted(5) || wanted(6) {
        let sweep = placement_sweep();
        run(6, &mut || criterion_6(&sweep));
        run(5, &mut || criterion_5(&sweep));
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
