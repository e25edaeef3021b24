//! Closed-loop episodes: plan from the true state, act, repeat.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::IterationSnapshot;
use crate::env::{Action, Environment};
use crate::stats::Distribution;
use crate::{Error, Result};

/// What a planner hands back for one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub action: Action,
    pub samples_used: u64,
    pub utilities: Option<Distribution>,
    /// Walker counts (FMC) or root visit counts (UCT) per option.
    pub counts: Vec<usize>,
    pub iterations: Vec<IterationSnapshot>,
}

impl Plan {
    /// A plan that spent no simulator samples.
    pub fn bare(action: Action) -> Self {
        Self {
            action,
            samples_used: 0,
            utilities: None,
            counts: Vec::new(),
            iterations: Vec::new(),
        }
    }
}

pub trait Planner<E: Environment> {
    /// Environment steps each decision is applied for.
    fn repeat(&self) -> u32 {
        1
    }

    fn plan(&mut self, env: &E, state: &E::State, observation: &[f64], seed: u64) -> Result<Plan>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Action,
    pub reward: f64,
}

/// One decision as recorded for trace output.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRecord {
    pub plan: Plan,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub total_score: f64,
    /// Environment steps taken in the true environment.
    pub steps: usize,
    pub decisions: usize,
    pub total_samples: u64,
    /// `total_samples / decisions`.
    pub samples_per_step: f64,
    pub trajectory: Vec<Transition>,
    pub died: bool,
    pub reached_terminal: bool,
    pub records: Vec<DecisionRecord>,
}

/// Plays from `env.reset(seed)` until death, a terminal state or `max_steps` environment steps.
///
/// Decision `k` is planned with the `k`-th draw of a generator seeded by `seed`.
pub fn play<E, P>(env: &E, planner: &mut P, max_steps: usize, seed: u64) -> Result<EpisodeResult>
where
    E: Environment,
    P: Planner<E> + ?Sized,
{
    play_inner(env, planner, max_steps, seed, false)
}

/// Like [`play`], keeping every [`Plan`] in [`EpisodeResult::records`].
pub fn play_recorded<E, P>(env: &E, planner: &mut P, max_steps: usize, seed: u64) -> Result<EpisodeResult>
where
    E: Environment,
    P: Planner<E> + ?Sized,
{
    play_inner(env, planner, max_steps, seed, true)
}

fn play_inner<E, P>(env: &E, planner: &mut P, max_steps: usize, seed: u64, keep: bool) -> Result<EpisodeResult>
where
    E: Environment,
    P: Planner<E> + ?Sized,
{
    if max_steps == 0 {
        return Err(Error::contract("max_steps must be at least 1"));
    }
    let repeat = planner.repeat().max(1) as usize;
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let (mut state, mut observation) = env.reset(seed)?;

    let mut result = EpisodeResult {
        total_score: 0.0,
        steps: 0,
        decisions: 0,
        total_samples: 0,
        samples_per_step: 0.0,
        trajectory: Vec::new(),
        died: false,
        reached_terminal: false,
        records: Vec::new(),
    };

    'episode: while result.steps < max_steps {
        let plan = planner.plan(env, &state, &observation, seeds.next_u64())?;
        result.decisions += 1;
        result.total_samples += plan.samples_used;
        for _ in 0..repeat {
            let out = env.step(&state, &plan.action)?;
            result.trajectory.push(Transition {
                observation: std::mem::replace(&mut observation, out.observation),
                action: plan.action.clone(),
                reward: out.reward,
            });
            result.total_score += out.reward;
            result.steps += 1;
            state = out.next_state;
            result.died = out.dead;
            result.reached_terminal = out.terminal && !out.dead;
            if out.dead || out.terminal || result.steps >= max_steps {
                if keep {
                    result.records.push(DecisionRecord {
                        plan,
                        step: result.steps,
                    });
                }
                env.retain_only(std::slice::from_ref(&state))?;
                break 'episode;
            }
        }
        if keep {
            result.records.push(DecisionRecord {
                plan,
                step: result.steps,
            });
        }
        env.retain_only(std::slice::from_ref(&state))?;
    }

    result.samples_per_step = if result.decisions == 0 {
        0.0
    } else {
        result.total_samples as f64 / result.decisions as f64
    };
    Ok(result)
}

/// Uniformly random actions; spends no samples.
#[derive(Debug, Clone, Default)]
pub struct RandomPlanner;

impl<E: Environment> Planner<E> for RandomPlanner {
    fn plan(&mut self, env: &E, _state: &E::State, _observation: &[f64], seed: u64) -> Result<Plan> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Plan::bare(env.action_space().sample(&mut rng)))
    }
}
