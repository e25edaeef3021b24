//! UCT baseline: UCB1 tree policy, single-action expansion, uniform random
//! rollouts and summed-reward backup. Every `env.step` call counts as one
//! sample, the same accounting the swarm planner uses.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Action, Environment};
use crate::episode::{Plan, Planner};
use crate::stats::Distribution;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UctParams {
    pub exploration_c: f64,
    /// Maximum depth from the root of any simulated path.
    pub rollout_horizon: u32,
    pub budget_samples: u64,
    pub seed: u64,
}

impl Default for UctParams {
    fn default() -> Self {
        Self {
            exploration_c: std::f64::consts::SQRT_2,
            rollout_horizon: 15,
            budget_samples: 300,
            seed: 0,
        }
    }
}

impl UctParams {
    pub fn validate(&self) -> Result<()> {
        if self.budget_samples == 0 {
            return Err(Error::InvalidParams("budget_samples must be at least 1".into()));
        }
        if !(self.exploration_c >= 0.0 && self.exploration_c.is_finite()) {
            return Err(Error::InvalidParams("exploration_c must be finite and non-negative".into()));
        }
        if self.rollout_horizon == 0 {
            return Err(Error::InvalidParams("rollout_horizon must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct UctNode<S> {
    pub state: S,
    pub visit_count: u64,
    /// Sum of full-path returns backed up through this node.
    pub total_value: f64,
    pub children: BTreeMap<usize, usize>,
    pub untried: Vec<usize>,
    /// Reward collected from the root down to this node.
    path_reward: f64,
    depth: u32,
    /// No further expansion is possible below this node.
    exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UctDecision {
    pub action: usize,
    pub samples_used: u64,
    pub iterations: u64,
    /// Visit count of each root action (0 for unexpanded ones).
    pub root_visits: Vec<u64>,
}

/// Search tree stored as an arena; index 0 is the root.
#[derive(Debug, Clone)]
pub struct UctTree<S> {
    pub nodes: Vec<UctNode<S>>,
}

impl<S> UctTree<S> {
    pub fn root(&self) -> &UctNode<S> {
        &self.nodes[0]
    }
}

/// Runs UCT from `root_state` until the sample budget is spent or the tree is exhausted.
pub fn uct_plan_step<E: Environment>(env: &E, root_state: &E::State, params: &UctParams) -> Result<UctDecision> {
    uct_search(env, root_state, params).map(|(d, _)| d)
}

/// [`uct_plan_step`] that also returns the final tree.
pub fn uct_search<E: Environment>(
    env: &E,
    root_state: &E::State,
    params: &UctParams,
) -> Result<(UctDecision, UctTree<E::State>)> {
    params.validate()?;
    let n_actions = env
        .action_space()
        .len()
        .ok_or_else(|| Error::UnsupportedSpace("UCT supports discrete action spaces only".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut tree = UctTree {
        nodes: vec![UctNode {
            state: root_state.clone(),
            visit_count: 0,
            total_value: 0.0,
            children: BTreeMap::new(),
            untried: (0..n_actions).collect(),
            path_reward: 0.0,
            depth: 0,
            exhausted: false,
        }],
    };
    let mut samples = 0u64;
    let mut iterations = 0u64;
    let mut path = Vec::new();

    while samples < params.budget_samples && !tree.nodes[0].exhausted {
        // Selection.
        path.clear();
        let mut node = 0;
        path.push(node);
        while tree.nodes[node].untried.is_empty() {
            node = select_child(&tree, node, params.exploration_c);
            path.push(node);
        }

        // Expansion.
        let pick = rng.gen_range(0..tree.nodes[node].untried.len());
        let action = tree.nodes[node].untried.swap_remove(pick);
        let out = env.step(&tree.nodes[node].state, &Action::Discrete(action))?;
        samples += 1;
        let depth = tree.nodes[node].depth + 1;
        let path_reward = tree.nodes[node].path_reward + out.reward;
        let leaf_closed = out.dead || out.terminal || depth >= params.rollout_horizon;
        let child = tree.nodes.len();
        tree.nodes.push(UctNode {
            state: out.next_state.clone(),
            visit_count: 0,
            total_value: 0.0,
            children: BTreeMap::new(),
            untried: if leaf_closed { Vec::new() } else { (0..n_actions).collect() },
            path_reward,
            depth,
            exhausted: leaf_closed,
        });
        tree.nodes[node].children.insert(action, child);
        path.push(child);

        // Rollout.
        let mut value = path_reward;
        if !leaf_closed {
            let mut state = out.next_state;
            let space = env.action_space();
            for _ in depth..params.rollout_horizon {
                let step = env.step(&state, &space.sample(&mut rng))?;
                samples += 1;
                value += step.reward;
                if step.dead || step.terminal {
                    break;
                }
                state = step.next_state;
            }
        }

        // Backup.
        for &i in path.iter().rev() {
            let n = &mut tree.nodes[i];
            n.visit_count += 1;
            n.total_value += value;
        }
        for &i in path.iter().rev() {
            let done = {
                let n = &tree.nodes[i];
                n.exhausted || (n.untried.is_empty() && n.children.values().all(|&c| tree.nodes[c].exhausted))
            };
            tree.nodes[i].exhausted = done;
        }
        iterations += 1;
    }

    let root = &tree.nodes[0];
    let mut root_visits = vec![0u64; n_actions];
    for (&a, &c) in &root.children {
        root_visits[a] = tree.nodes[c].visit_count;
    }
    let mut best = 0;
    for (a, &v) in root_visits.iter().enumerate() {
        if v > root_visits[best] {
            best = a;
        }
    }
    Ok((
        UctDecision {
            action: best,
            samples_used: samples,
            iterations,
            root_visits,
        },
        tree,
    ))
}

/// UCB1 over non-exhausted children; unvisited children first, ties to the lowest action.
fn select_child<S>(tree: &UctTree<S>, node: usize, c: f64) -> usize {
    let parent = &tree.nodes[node];
    let ln_n = (parent.visit_count.max(1) as f64).ln();
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    for &child in parent.children.values() {
        let ch = &tree.nodes[child];
        if ch.exhausted {
            continue;
        }
        let score = if ch.visit_count == 0 {
            f64::INFINITY
        } else {
            let n = ch.visit_count as f64;
            ch.total_value / n + c * (ln_n / n).sqrt()
        };
        if best.is_none() || score > best_score {
            best = Some(child);
            best_score = score;
        }
    }
    best.expect("a node that is not exhausted has an open child")
}

/// [`Planner`] adapter for UCT.
#[derive(Debug, Clone)]
pub struct UctPlanner {
    pub params: UctParams,
}

impl<E: Environment> Planner<E> for UctPlanner {
    fn plan(&mut self, env: &E, state: &E::State, _observation: &[f64], seed: u64) -> Result<Plan> {
        let params = UctParams {
            seed,
            ..self.params.clone()
        };
        let d = uct_plan_step(env, state, &params)?;
        let counts: Vec<usize> = d.root_visits.iter().map(|&v| v as usize).collect();
        Ok(Plan {
            action: Action::Discrete(d.action),
            samples_used: d.samples_used,
            utilities: Some(Distribution::from_counts(&counts)?),
            counts,
            iterations: Vec::new(),
        })
    }
}
