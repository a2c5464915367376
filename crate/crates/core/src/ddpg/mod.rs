//! DDPG agent for RIS phase-shift control.
//!
//! The state is `[previous rate, previous phases]` (length `N + 1`) and the
//! action is the next phase vector (length `N`). Every step runs, in order:
//! act, step the environment, store, sample a minibatch, form critic targets
//! from the target networks, take a critic step, take an actor step, and
//! soft-update both target networks.

mod env;
mod replay;

pub use env::{Environment, RisEnvironment};
pub use replay::ReplayBuffer;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::neural::{
    adam_step, build_actor, build_conventional_actor, build_conventional_critic, build_critic, soft_update,
    AdamConfig, ConventionalHyper, Network, ProposedHyper,
};
use crate::sigmodel::{wrap_phase, PhaseShiftVector};

/// `[rate, phi_1 .. phi_N]`.
pub type State = Vec<f64>;
/// `[phi_1 .. phi_N]`, wrapped.
pub type Action = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: State,
    pub a: Action,
    pub r: f64,
    pub s_next: State,
}

/// When minibatch updates start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gating {
    /// As soon as the buffer holds one minibatch.
    MinBatch,
    /// Only once the buffer is at capacity.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub gamma: f64,
    pub tau: f64,
    pub actor_alpha: f64,
    pub critic_alpha: f64,
    /// Variance of the real Gaussian exploration noise.
    pub noise_var: f64,
    pub episodes: usize,
    pub steps: usize,
    pub capacity: usize,
    pub batch: usize,
    pub gating: Gating,
    pub reset_buffer_each_episode: bool,
    /// Feed `rate / running max rate` into the state instead of the raw rate.
    pub normalize_rate: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.001,
            actor_alpha: 1e-3,
            critic_alpha: 1e-3,
            noise_var: 0.1,
            episodes: 100,
            steps: 800,
            capacity: 10_000,
            batch: 16,
            gating: Gating::MinBatch,
            reset_buffer_each_episode: false,
            normalize_rate: false,
        }
    }
}

impl AgentConfig {
    /// Defaults for the two-dense-layer baseline, which runs longer episodes.
    pub fn conventional() -> Self {
        Self { steps: 1000, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau must lie in [0, 1], got {}", self.tau));
        }
        for (name, a) in [("actor_alpha", self.actor_alpha), ("critic_alpha", self.critic_alpha)] {
            if !(a.is_finite() && a >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {a}"));
            }
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return bad(format!("noise_var must be finite and >= 0, got {}", self.noise_var));
        }
        for (name, v) in
            [("episodes", self.episodes), ("steps", self.steps), ("capacity", self.capacity), ("batch", self.batch)]
        {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if self.batch > self.capacity {
            return bad(format!("batch {} exceeds replay capacity {}", self.batch, self.capacity));
        }
        Ok(())
    }

    fn actor_adam(&self) -> AdamConfig {
        AdamConfig::with_alpha(self.actor_alpha)
    }

    fn critic_adam(&self) -> AdamConfig {
        AdamConfig::with_alpha(self.critic_alpha)
    }
}

fn concat(s: &[f64], a: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(s.len() + a.len());
    x.extend_from_slice(s);
    x.extend_from_slice(a);
    x
}

/// `wrap(mu + xi)` elementwise.
pub fn apply_noise(mu: &[f64], xi: &[f64]) -> Result<Action> {
    if mu.len() != xi.len() {
        return Err(Error::Shape(format!("{} noise samples for {} actions", xi.len(), mu.len())));
    }
    Ok(mu.iter().zip(xi).map(|(m, x)| wrap_phase(m + x)).collect())
}

/// Actor output plus i.i.d. `N(0, noise_var)` noise, wrapped to `[-pi, pi)`.
/// No randomness is consumed when `noise_var` is zero.
pub fn select_action<R: Rng + ?Sized>(actor: &Network, s: &[f64], noise_var: f64, rng: &mut R) -> Result<Action> {
    if s.len() != actor.spec.input_size() {
        return Err(Error::Shape(format!("state length {} != actor input {}", s.len(), actor.spec.input_size())));
    }
    let mu = actor.predict(s)?;
    if noise_var == 0.0 {
        return apply_noise(&mu, &vec![0.0; mu.len()]);
    }
    let normal = Normal::new(0.0, noise_var.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    let xi: Vec<f64> = (0..mu.len()).map(|_| normal.sample(rng)).collect();
    apply_noise(&mu, &xi)
}

/// `y_j = r_j + gamma * Q'(s'_j, mu'(s'_j))`.
pub fn critic_target(batch: &[&Transition], target_actor: &Network, target_critic: &Network, gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            let a = target_actor.predict(&t.s_next)?;
            let q = target_critic.predict(&concat(&t.s_next, &a))?[0];
            Ok(t.r + gamma * q)
        })
        .collect()
}

/// Mean squared TD error and its parameter gradient.
pub fn critic_loss_and_grad(critic: &Network, batch: &[&Transition], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    if batch.len() != y.len() || batch.is_empty() {
        return Err(Error::Shape(format!("{} targets for {} transitions", y.len(), batch.len())));
    }
    let nb = batch.len() as f64;
    let mut grads = vec![0.0; critic.params.len()];
    let mut loss = 0.0;
    for (t, &yj) in batch.iter().zip(y) {
        let (q, cache) = critic.forward(&concat(&t.s, &t.a))?;
        let diff = q[0] - yj;
        loss += diff * diff / nb;
        critic.backward_accumulate(&cache, &[2.0 * diff / nb], &mut grads)?;
    }
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("critic loss is {loss}")));
    }
    Ok((loss, grads))
}

/// One Adam step on the critic; returns the loss before the step.
pub fn critic_update(critic: &mut Network, batch: &[&Transition], y: &[f64], adam: &AdamConfig) -> Result<f64> {
    let (loss, grads) = critic_loss_and_grad(critic, batch, y)?;
    adam_step(&mut critic.params, &grads, adam)?;
    Ok(loss)
}

/// `J = mean_j Q(s_j, mu(s_j))` and `dJ/d(actor params)`, with `dQ/da`
/// taken from the critic's input gradient.
pub fn actor_objective_and_grad(actor: &Network, critic: &Network, states: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    if states.is_empty() {
        return Err(Error::Shape("empty minibatch".into()));
    }
    let n_state = actor.spec.input_size();
    let nb = states.len() as f64;
    let mut grads = vec![0.0; actor.params.len()];
    let mut scratch = vec![0.0; critic.params.len()];
    let mut j = 0.0;
    for s in states {
        let (a, actor_cache) = actor.forward(s)?;
        let (q, critic_cache) = critic.forward(&concat(s, &a))?;
        j += q[0] / nb;
        let dx = critic.backward_accumulate(&critic_cache, &[1.0 / nb], &mut scratch)?;
        actor.backward_accumulate(&actor_cache, &dx[n_state..], &mut grads)?;
    }
    ensure_finite(&grads, "actor gradient")?;
    Ok((j, grads))
}

/// One Adam ascent step on the actor along the deterministic policy
/// gradient; returns the gradient's Euclidean norm.
pub fn actor_update(actor: &mut Network, critic: &Network, batch: &[&Transition], adam: &AdamConfig) -> Result<f64> {
    let states: Vec<&[f64]> = batch.iter().map(|t| t.s.as_slice()).collect();
    let (_, grads) = actor_objective_and_grad(actor, critic, &states)?;
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    let descent: Vec<f64> = grads.iter().map(|g| -g).collect();
    adam_step(&mut actor.params, &descent, adam)?;
    Ok(norm)
}

/// `sum_k gamma^k r_k`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |acc, r| r + gamma * acc)
}

/// What one step did, in the order it happened.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Action(Action),
    EnvStep { reward: f64 },
    Store { buffer_len: usize },
    Sample { batch: usize },
    Target(Vec<f64>),
    CriticStep { loss: f64 },
    ActorStep { grad_norm: f64 },
    SoftUpdate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub targets: Vec<f64>,
    pub critic_loss: f64,
    pub actor_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub action: Action,
    pub reward: f64,
    pub next_state: State,
    pub update: Option<UpdateStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub step: usize,
    pub reward: f64,
    /// Best rate visited so far in this episode, initial phases included.
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub initial_rate: f64,
    pub best_rate: f64,
    pub best_phi: PhaseShiftVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub best_phi: PhaseShiftVector,
    pub best_rate: f64,
    pub curve: Vec<CurvePoint>,
    pub episodes: Vec<EpisodeSummary>,
    /// Set when an episode aborted; everything above covers the steps before it.
    pub failure: Option<String>,
}

/// Actor, critic, their target copies, and the replay memory.
#[derive(Debug, Clone)]
pub struct Agent {
    pub actor: Network,
    pub critic: Network,
    pub target_actor: Network,
    pub target_critic: Network,
    pub config: AgentConfig,
    pub buffer: ReplayBuffer,
    rate_max: f64,
}

impl Agent {
    /// Targets start as exact copies of the online networks.
    pub fn new(actor: Network, critic: Network, config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let n = actor.spec.output_size();
        if actor.spec.input_size() != n + 1 {
            return Err(Error::Shape(format!(
                "actor maps {} inputs to {n} actions, expected {} inputs",
                actor.spec.input_size(),
                n + 1
            )));
        }
        if critic.spec.input_size() != 2 * n + 1 || critic.spec.output_size() != 1 {
            return Err(Error::Shape(format!(
                "critic must map {} inputs to 1 output, got {} -> {}",
                2 * n + 1,
                critic.spec.input_size(),
                critic.spec.output_size()
            )));
        }
        Ok(Self {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            buffer: ReplayBuffer::new(config.capacity)?,
            config,
            rate_max: 0.0,
        })
    }

    pub fn proposed<R: Rng + ?Sized>(n: usize, hyper: &ProposedHyper, config: AgentConfig, rng: &mut R) -> Result<Self> {
        let actor = build_actor(n, hyper, rng)?;
        let critic = build_critic(n, hyper, rng)?;
        Self::new(actor, critic, config)
    }

    pub fn conventional<R: Rng + ?Sized>(
        n: usize,
        hyper: &ConventionalHyper,
        config: AgentConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let actor = build_conventional_actor(n, hyper, rng)?;
        let critic = build_conventional_critic(n, hyper, rng)?;
        Self::new(actor, critic, config)
    }

    pub fn n_elements(&self) -> usize {
        self.actor.spec.output_size()
    }

    /// Builds the state for an observed `(rate, phases)` pair.
    pub fn observe(&mut self, rate: f64, phi: &[f64]) -> State {
        let shown = if self.config.normalize_rate {
            self.rate_max = self.rate_max.max(rate);
            if self.rate_max > 0.0 {
                rate / self.rate_max
            } else {
                0.0
            }
        } else {
            rate
        };
        let mut s = Vec::with_capacity(phi.len() + 1);
        s.push(shown);
        s.extend(phi.iter().map(|&p| wrap_phase(p)));
        s
    }

    pub fn updates_ready(&self) -> bool {
        self.buffer.len() >= self.config.batch
            && match self.config.gating {
                Gating::MinBatch => true,
                Gating::Full => self.buffer.is_full(),
            }
    }

    /// One full interaction-and-learning step from state `s`.
    pub fn step<E, R>(
        &mut self,
        env: &mut E,
        s: &[f64],
        rng: &mut R,
        trace: &mut dyn FnMut(&TraceEvent),
    ) -> Result<StepOutcome>
    where
        E: Environment + ?Sized,
        R: Rng + ?Sized,
    {
        let a = select_action(&self.actor, s, self.config.noise_var, rng)?;
        trace(&TraceEvent::Action(a.clone()));

        let phi = PhaseShiftVector::new(a.clone());
        let r = env.reward(&phi)?;
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Numeric(format!("environment returned reward {r}")));
        }
        let s_next = self.observe(r, phi.as_slice());
        trace(&TraceEvent::EnvStep { reward: r });

        self.buffer.push(Transition { s: s.to_vec(), a: a.clone(), r, s_next: s_next.clone() });
        trace(&TraceEvent::Store { buffer_len: self.buffer.len() });

        let update = if self.updates_ready() {
            let batch: Vec<Transition> =
                self.buffer.sample(self.config.batch, rng)?.into_iter().cloned().collect();
            let batch: Vec<&Transition> = batch.iter().collect();
            trace(&TraceEvent::Sample { batch: batch.len() });

            let y = critic_target(&batch, &self.target_actor, &self.target_critic, self.config.gamma)?;
            trace(&TraceEvent::Target(y.clone()));

            let loss = critic_update(&mut self.critic, &batch, &y, &self.config.critic_adam())?;
            trace(&TraceEvent::CriticStep { loss });

            let norm = actor_update(&mut self.actor, &self.critic, &batch, &self.config.actor_adam())?;
            trace(&TraceEvent::ActorStep { grad_norm: norm });

            soft_update(&mut self.target_critic.params, &self.critic.params, self.config.tau)?;
            soft_update(&mut self.target_actor.params, &self.actor.params, self.config.tau)?;
            trace(&TraceEvent::SoftUpdate);
            Some(UpdateStats { targets: y, critic_loss: loss, actor_grad_norm: norm })
        } else {
            None
        };
        Ok(StepOutcome { action: a, reward: r, next_state: s_next, update })
    }
}

/// Runs `config.episodes` episodes of `config.steps` steps. `make_env(k)`
/// supplies episode `k`'s environment; phases start uniform in `[-pi, pi)`.
///
/// The returned best phases are the argmax over every visited state, not the
/// final policy output. Setup errors are returned as `Err`; an error inside an
/// episode ends training and is reported in [`TrainResult::failure`].
pub fn train<E, F, R>(agent: &mut Agent, mut make_env: F, rng: &mut R) -> Result<TrainResult>
where
    E: Environment,
    F: FnMut(usize) -> Result<E>,
    R: Rng + ?Sized,
{
    agent.config.validate()?;
    let n = agent.n_elements();
    let mut result = TrainResult {
        best_phi: PhaseShiftVector::zeros(n),
        best_rate: f64::NEG_INFINITY,
        curve: Vec::with_capacity(agent.config.episodes * agent.config.steps),
        episodes: Vec::with_capacity(agent.config.episodes),
        failure: None,
    };
    for k in 0..agent.config.episodes {
        if let Err(e) = run_episode(agent, &mut make_env, k, n, rng, &mut result) {
            result.failure = Some(format!("episode {k}: {e}"));
            break;
        }
    }
    if result.best_rate == f64::NEG_INFINITY {
        result.best_rate = 0.0;
    }
    Ok(result)
}

fn run_episode<E, F, R>(
    agent: &mut Agent,
    make_env: &mut F,
    k: usize,
    n: usize,
    rng: &mut R,
    result: &mut TrainResult,
) -> Result<()>
where
    E: Environment,
    F: FnMut(usize) -> Result<E>,
    R: Rng + ?Sized,
{
    let mut env = make_env(k)?;
    if env.n_elements() != n {
        return Err(Error::Shape(format!("environment has {} elements, agent controls {n}", env.n_elements())));
    }
    if agent.config.reset_buffer_each_episode {
        agent.buffer.clear();
    }
    let phi0 = PhaseShiftVector::new((0..n).map(|_| rng.random_range(-PI..PI)).collect());
    let r0 = env.reward(&phi0)?;
    let mut summary = EpisodeSummary { initial_rate: r0, best_rate: r0, best_phi: phi0.clone() };
    let mut s = agent.observe(r0, phi0.as_slice());
    let mut no_trace = |_: &TraceEvent| {};
    for t in 0..agent.config.steps {
        let out = match agent.step(&mut env, &s, rng, &mut no_trace) {
            Ok(out) => out,
            Err(e) => {
                absorb(result, summary);
                return Err(e);
            }
        };
        if out.reward > summary.best_rate {
            summary.best_rate = out.reward;
            summary.best_phi = PhaseShiftVector::new(out.action);
        }
        result.curve.push(CurvePoint { episode: k, step: t, reward: out.reward, best_so_far: summary.best_rate });
        s = out.next_state;
    }
    absorb(result, summary);
    Ok(())
}

fn absorb(result: &mut TrainResult, summary: EpisodeSummary) {
    if summary.best_rate > result.best_rate {
        result.best_rate = summary.best_rate;
        result.best_phi = summary.best_phi.clone();
    }
    result.episodes.push(summary);
}
