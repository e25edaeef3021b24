//! The Fractal Monte Carlo planner.
//!
//! A [`Swarm`] of walkers starts on the root state and repeats three phases
//! until the time horizon is met, the sample budget runs out, or every walker
//! is dead:
//!
//! 1. [`Swarm::perturb`]: each live walker applies a uniformly random action
//!    for `dt` environment steps.
//! 2. [`Swarm::evaluate`]: each walker is scored by its virtual reward, the
//!    product of its relativized cumulative reward and its relativized
//!    distance to a random live companion.
//! 3. [`Swarm::recycle`]: each walker may clone onto a random companion with
//!    a probability given by [`clone_probability`].
//!
//! [`Swarm::choose`] then reads the decision off the walkers' root actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, ActionSpace, Environment};
use crate::episode::{self, EpisodeResult, Plan, Planner};
use crate::stats::{self, Distribution};
use crate::{Error, Result};

const CLONE_EPSILON: f64 = 1e-8;

/// Planner parameters. Defaults are the 30-walker, horizon-15,
/// 300-sample, repeat-5 starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FmcParams {
    pub n_walkers: usize,
    /// How far ahead walkers look, in environment steps.
    pub time_horizon: f64,
    /// Environment steps each sampled action is repeated for.
    pub dt: u32,
    /// Budget of environment steps per decision.
    pub max_samples: u64,
    pub seed: u64,
}

impl Default for FmcParams {
    fn default() -> Self {
        Self {
            n_walkers: 30,
            time_horizon: 15.0,
            dt: 5,
            max_samples: 300,
            seed: 0,
        }
    }
}

impl FmcParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_walkers == 0 {
            return Err(Error::InvalidParams("n_walkers must be positive".into()));
        }
        if self.dt == 0 {
            return Err(Error::InvalidParams("dt must be positive".into()));
        }
        if !(self.time_horizon.is_finite() && self.time_horizon > 0.0) {
            return Err(Error::InvalidParams("time_horizon must be positive".into()));
        }
        if self.time_horizon < self.dt as f64 {
            return Err(Error::InvalidParams(format!(
                "time_horizon {} is shorter than one tick of dt = {}",
                self.time_horizon, self.dt
            )));
        }
        if self.max_samples < self.n_walkers as u64 {
            return Err(Error::InvalidParams(format!(
                "max_samples {} cannot afford one sweep of {} walkers",
                self.max_samples, self.n_walkers
            )));
        }
        Ok(())
    }

    /// Depth in environment steps at which a walker stops: `ceil(horizon / dt) * dt`.
    pub fn depth_limit(&self) -> u32 {
        let ticks = (self.time_horizon / self.dt as f64).ceil() as u32;
        ticks.max(1) * self.dt
    }
}

/// One leaf of the search tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Walker<S> {
    pub id: usize,
    pub state: S,
    pub observation: Vec<f64>,
    /// Sum of raw rewards since the root.
    pub cum_reward: f64,
    pub alive: bool,
    /// Reached an episode-ending state; still alive but no longer stepped.
    pub terminal: bool,
    pub root_action: Option<Action>,
    /// Environment steps taken since the root.
    pub depth: u32,
}

impl<S> Walker<S> {
    fn is_active(&self, depth_limit: u32) -> bool {
        self.alive && !self.terminal && self.depth < depth_limit
    }
}

/// The outcome of one planning call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    /// Share of counted walkers per entry of `options`.
    pub utilities: Distribution,
    /// Distinct root actions the utilities refer to. For discrete spaces
    /// this is every action index in order.
    pub options: Vec<Action>,
    pub walker_counts: Vec<usize>,
    pub samples_used: u64,
}

/// Per-iteration view of the swarm, as written to trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSnapshot {
    pub iteration: usize,
    pub samples_used: u64,
    pub alive: usize,
    pub depths: Vec<u32>,
    pub virtual_rewards: Vec<f64>,
}

/// Probability that a walker with virtual reward `vr_self` clones onto one with `vr_target`.
///
/// Zero onto dead targets, one for a dead walker onto a live target, and
/// otherwise `clamp((vr_target - vr_self) / max(vr_self, 1e-8), 0, 1)`.
pub fn clone_probability(vr_self: f64, vr_target: f64, self_alive: bool, target_alive: bool) -> f64 {
    if !target_alive {
        return 0.0;
    }
    if !self_alive {
        return 1.0;
    }
    ((vr_target - vr_self) / vr_self.max(CLONE_EPSILON)).clamp(0.0, 1.0)
}

/// Fixed-size population of walkers plus the sampling state that drives it.
#[derive(Debug, Clone)]
pub struct Swarm<S> {
    walkers: Vec<Walker<S>>,
    samples_used: u64,
    rng: ChaCha8Rng,
    dt: u32,
    depth_limit: u32,
}

impl<S: Clone> Swarm<S> {
    /// Places `n_walkers` identical live walkers on the root.
    pub fn new(root_state: S, root_observation: Vec<f64>, params: &FmcParams) -> Result<Self> {
        params.validate()?;
        let walkers = (0..params.n_walkers)
            .map(|id| Walker {
                id,
                state: root_state.clone(),
                observation: root_observation.clone(),
                cum_reward: 0.0,
                alive: true,
                terminal: false,
                root_action: None,
                depth: 0,
            })
            .collect();
        Ok(Self {
            walkers,
            samples_used: 0,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            dt: params.dt,
            depth_limit: params.depth_limit(),
        })
    }

    pub fn walkers(&self) -> &[Walker<S>] {
        &self.walkers
    }

    pub fn samples_used(&self) -> u64 {
        self.samples_used
    }

    pub fn depth_limit(&self) -> u32 {
        self.depth_limit
    }

    pub fn alive_count(&self) -> usize {
        self.walkers.iter().filter(|w| w.alive).count()
    }

    /// True when no live walker has steps left before the horizon.
    pub fn horizon_reached(&self) -> bool {
        !self.walkers.iter().any(|w| w.is_active(self.depth_limit))
    }

    /// Steps every active walker with one random action repeated `dt` times.
    ///
    /// Actions are drawn in walker order before any stepping, so batched or
    /// remote stepping sees the same draw sequence. Returns the number of
    /// environment steps made.
    pub fn perturb<E>(&mut self, env: &E) -> Result<u64>
    where
        E: Environment<State = S>,
    {
        let space = env.action_space();
        let mut plan: Vec<(usize, Action, u32)> = Vec::with_capacity(self.walkers.len());
        for (i, w) in self.walkers.iter_mut().enumerate() {
            if !w.is_active(self.depth_limit) {
                continue;
            }
            let action = space.sample(&mut self.rng);
            if w.depth == 0 {
                w.root_action = Some(action.clone());
            }
            let repeats = self.dt.min(self.depth_limit - w.depth);
            plan.push((i, action, repeats));
        }

        let mut steps = 0u64;
        for repeat in 0..self.dt {
            plan.retain(|&(i, _, repeats)| repeat < repeats && self.walkers[i].alive && !self.walkers[i].terminal);
            if plan.is_empty() {
                break;
            }
            let batch: Vec<(&S, &Action)> = plan.iter().map(|(i, a, _)| (&self.walkers[*i].state, a)).collect();
            let outcomes = env.step_batch(&batch)?;
            if outcomes.len() != plan.len() {
                return Err(Error::contract("step_batch returned the wrong number of outcomes"));
            }
            for ((i, _, _), out) in plan.iter().zip(outcomes) {
                let w = &mut self.walkers[*i];
                w.state = out.next_state;
                w.observation = out.observation;
                w.cum_reward += out.reward;
                w.depth += 1;
                w.alive = !out.dead;
                w.terminal = out.terminal && !out.dead;
            }
            steps += plan.len() as u64;
        }
        self.samples_used += steps;
        Ok(steps)
    }

    /// Virtual reward of every walker, or `None` when the whole swarm is dead.
    ///
    /// Distances go to a random live companion (never itself unless it is the
    /// only live walker). Dead walkers take part in the relativize statistics
    /// and are zeroed afterwards.
    pub fn evaluate(&mut self) -> Option<Vec<f64>> {
        let alive: Vec<usize> = (0..self.walkers.len()).filter(|&i| self.walkers[i].alive).collect();
        if alive.is_empty() {
            return None;
        }
        let mut rank = vec![usize::MAX; self.walkers.len()];
        for (k, &i) in alive.iter().enumerate() {
            rank[i] = k;
        }

        let distances: Vec<f64> = (0..self.walkers.len())
            .map(|i| {
                let companion = if alive.len() == 1 {
                    alive[0]
                } else if self.walkers[i].alive {
                    let k = self.rng.gen_range(0..alive.len() - 1);
                    alive[if k >= rank[i] { k + 1 } else { k }]
                } else {
                    alive[self.rng.gen_range(0..alive.len())]
                };
                euclidean(&self.walkers[i].observation, &self.walkers[companion].observation)
            })
            .collect();

        let rewards: Vec<f64> = self.walkers.iter().map(|w| w.cum_reward).collect();
        let mut vr = stats::virtual_reward(&stats::relativize(&rewards), &stats::relativize(&distances))
            .expect("equal lengths by construction");
        for (v, w) in vr.iter_mut().zip(&self.walkers) {
            if !w.alive {
                *v = 0.0;
            }
        }
        Some(vr)
    }

    /// Clones walkers onto random companions. Decisions are taken against the
    /// pre-recycle swarm and applied together. Returns how many walkers cloned.
    pub fn recycle(&mut self, virtual_rewards: &[f64]) -> Result<usize> {
        let n = self.walkers.len();
        if virtual_rewards.len() != n {
            return Err(Error::contract(format!(
                "recycle needs {n} virtual rewards, got {}",
                virtual_rewards.len()
            )));
        }
        let mut targets = Vec::new();
        for i in 0..n {
            let c = self.rng.gen_range(0..n);
            let p = clone_probability(
                virtual_rewards[i],
                virtual_rewards[c],
                self.walkers[i].alive,
                self.walkers[c].alive,
            );
            let u: f64 = self.rng.gen();
            if u < p {
                targets.push((i, c));
            }
        }
        if targets.is_empty() {
            return Ok(0);
        }
        let snapshot = self.walkers.clone();
        for &(i, c) in &targets {
            let id = self.walkers[i].id;
            self.walkers[i] = Walker {
                id,
                ..snapshot[c].clone()
            };
        }
        Ok(targets.len())
    }

    /// Reads a decision off the walkers' root actions.
    ///
    /// Counts cover live walkers, or every walker when none is alive. A
    /// continuous decision is the mean root action; a discrete one is the
    /// action whose embedding is nearest the count-weighted mean embedding,
    /// lowest index on ties.
    pub fn choose(&self, space: &ActionSpace) -> Result<Decision> {
        let any_alive = self.walkers.iter().any(|w| w.alive);
        let pool: Vec<&Action> = self
            .walkers
            .iter()
            .filter(|w| w.alive || !any_alive)
            .filter_map(|w| w.root_action.as_ref())
            .collect();
        if pool.is_empty() {
            return Err(Error::contract("no walker has acted yet"));
        }

        match space {
            ActionSpace::Discrete { actions } => {
                let mut counts = vec![0usize; actions.len()];
                for a in &pool {
                    let i = a
                        .index()
                        .filter(|&i| i < actions.len())
                        .ok_or_else(|| Error::contract(format!("root action {a:?} is not in the space")))?;
                    counts[i] += 1;
                }
                let total = pool.len() as f64;
                let dim = actions[0].len();
                let mut mean = vec![0.0; dim];
                for (emb, &c) in actions.iter().zip(&counts) {
                    for (m, e) in mean.iter_mut().zip(emb) {
                        *m += c as f64 * e;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= total);
                let mut best = 0;
                let mut best_dist = f64::INFINITY;
                for (i, emb) in actions.iter().enumerate() {
                    let d = squared_distance(emb, &mean);
                    if d < best_dist {
                        best = i;
                        best_dist = d;
                    }
                }
                Ok(Decision {
                    action: Action::Discrete(best),
                    utilities: Distribution::from_counts(&counts)?,
                    options: (0..actions.len()).map(Action::Discrete).collect(),
                    walker_counts: counts,
                    samples_used: self.samples_used,
                })
            }
            ActionSpace::Continuous { low, high } => {
                let mut options: Vec<Action> = Vec::new();
                let mut counts: Vec<usize> = Vec::new();
                let mut sum = vec![0.0; low.len()];
                for a in &pool {
                    let v = a
                        .vector()
                        .filter(|v| v.len() == low.len())
                        .ok_or_else(|| Error::contract(format!("root action {a:?} is not in the space")))?;
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += x;
                    }
                    match options.iter().position(|o| o == *a) {
                        Some(k) => counts[k] += 1,
                        None => {
                            options.push((*a).clone());
                            counts.push(1);
                        }
                    }
                }
                let n = pool.len() as f64;
                let mean = sum
                    .iter()
                    .zip(low.iter().zip(high))
                    .map(|(s, (l, h))| (s / n).clamp(*l, *h))
                    .collect();
                Ok(Decision {
                    action: Action::Continuous(mean),
                    utilities: Distribution::from_counts(&counts)?,
                    options,
                    walker_counts: counts,
                    samples_used: self.samples_used,
                })
            }
        }
    }

    /// Fallback when no walker ever acted: a uniform random action with uniform utilities.
    fn uniform_decision(&mut self, space: &ActionSpace) -> Decision {
        let action = space.sample(&mut self.rng);
        let (options, n) = match space {
            ActionSpace::Discrete { actions } => ((0..actions.len()).map(Action::Discrete).collect(), actions.len()),
            ActionSpace::Continuous { .. } => (vec![action.clone()], 1),
        };
        Decision {
            action,
            utilities: Distribution::uniform(n),
            options,
            walker_counts: vec![0; n],
            samples_used: self.samples_used,
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Plans one decision from `root_state`.
pub fn plan_step<E: Environment>(
    env: &E,
    root_state: &E::State,
    root_observation: &[f64],
    params: &FmcParams,
) -> Result<Decision> {
    run_swarm(env, root_state, root_observation, params, None)
}

/// Like [`plan_step`], also returning one snapshot per engine iteration.
pub fn plan_step_traced<E: Environment>(
    env: &E,
    root_state: &E::State,
    root_observation: &[f64],
    params: &FmcParams,
) -> Result<(Decision, Vec<IterationSnapshot>)> {
    let mut trace = Vec::new();
    let decision = run_swarm(env, root_state, root_observation, params, Some(&mut trace))?;
    Ok((decision, trace))
}

fn run_swarm<E: Environment>(
    env: &E,
    root_state: &E::State,
    root_observation: &[f64],
    params: &FmcParams,
    mut trace: Option<&mut Vec<IterationSnapshot>>,
) -> Result<Decision> {
    let mut swarm = Swarm::new(root_state.clone(), root_observation.to_vec(), params)?;
    let mut iteration = 0;
    while swarm.alive_count() > 0 && !swarm.horizon_reached() && swarm.samples_used < params.max_samples {
        swarm.perturb(env)?;
        let vr = match swarm.evaluate() {
            Some(vr) => {
                swarm.recycle(&vr)?;
                vr
            }
            None => vec![0.0; swarm.walkers.len()],
        };
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(IterationSnapshot {
                iteration,
                samples_used: swarm.samples_used,
                alive: swarm.alive_count(),
                depths: swarm.walkers.iter().map(|w| w.depth).collect(),
                virtual_rewards: vr,
            });
        }
        iteration += 1;
    }
    if swarm.walkers.iter().all(|w| w.root_action.is_none()) {
        return Ok(swarm.uniform_decision(env.action_space()));
    }
    swarm.choose(env.action_space())
}

/// [`Planner`] adapter running [`plan_step`] with a fresh seed per decision.
#[derive(Debug, Clone)]
pub struct FmcPlanner {
    pub params: FmcParams,
    pub record_trace: bool,
}

impl FmcPlanner {
    pub fn new(params: FmcParams) -> Self {
        Self {
            params,
            record_trace: false,
        }
    }
}

impl<E: Environment> Planner<E> for FmcPlanner {
    fn repeat(&self) -> u32 {
        self.params.dt
    }

    fn plan(&mut self, env: &E, state: &E::State, observation: &[f64], seed: u64) -> Result<Plan> {
        let params = FmcParams {
            seed,
            ..self.params.clone()
        };
        let (decision, iterations) = if self.record_trace {
            plan_step_traced(env, state, observation, &params)?
        } else {
            (plan_step(env, state, observation, &params)?, Vec::new())
        };
        Ok(Plan {
            action: decision.action.clone(),
            samples_used: decision.samples_used,
            utilities: Some(decision.utilities),
            counts: decision.walker_counts,
            iterations,
        })
    }
}

/// Plays one episode with the FMC planner from the environment's reset state.
pub fn run_episode<E: Environment>(env: &E, params: &FmcParams, max_steps: usize, seed: u64) -> Result<EpisodeResult> {
    params.validate()?;
    episode::play(env, &mut FmcPlanner::new(params.clone()), max_steps, seed)
}
