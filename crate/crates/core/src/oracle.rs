//! Exhaustive search over every action sequence up to a horizon.
//!
//! Only for small discrete instances; used as ground truth for the planners.

use serde::{Deserialize, Serialize};

use crate::env::{Action, Environment};
use crate::episode::{Plan, Planner};
use crate::{Error, Result};

/// Largest number of leaf sequences `|A|^horizon` the oracle accepts.
pub const MAX_SEQUENCES: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    /// Best undiscounted return over continuations starting with this action.
    pub optimal_return: f64,
    /// Some continuation of full length (or ending in a terminal state) stays alive.
    pub reachable_alive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionValueTable {
    pub entries: Vec<ActionValue>,
    /// Tree nodes visited, root included.
    pub nodes: u64,
}

impl ActionValueTable {
    /// Environment steps spent building the table.
    pub fn samples(&self) -> u64 {
        self.nodes.saturating_sub(1)
    }
}

/// Enumerates every action sequence of length `horizon` from `root`.
///
/// Dead and terminal states end their branch. A horizon of 0 takes no
/// steps: every action gets return 0 and counts as alive.
pub fn exhaustive_values<E: Environment>(env: &E, root: &E::State, horizon: u32) -> Result<ActionValueTable> {
    let n_actions = env
        .action_space()
        .len()
        .ok_or_else(|| Error::UnsupportedSpace("the oracle needs a discrete action space".into()))?;
    let sequences = (n_actions as u64).checked_pow(horizon).unwrap_or(u64::MAX);
    if sequences > MAX_SEQUENCES {
        return Err(Error::SizeLimit(format!(
            "{n_actions}^{horizon} sequences exceed the limit of {MAX_SEQUENCES}"
        )));
    }
    if horizon == 0 {
        return Ok(ActionValueTable {
            entries: vec![
                ActionValue {
                    optimal_return: 0.0,
                    reachable_alive: true
                };
                n_actions
            ],
            nodes: 1,
        });
    }

    let mut nodes = 1u64;
    let mut entries = Vec::with_capacity(n_actions);
    for a in 0..n_actions {
        let (optimal_return, reachable_alive) = search(env, root, a, horizon, n_actions, &mut nodes)?;
        entries.push(ActionValue {
            optimal_return,
            reachable_alive,
        });
    }
    Ok(ActionValueTable { entries, nodes })
}

/// Best return and alive-reachability of taking `action` from `state` with `remaining` steps left.
fn search<E: Environment>(
    env: &E,
    state: &E::State,
    action: usize,
    remaining: u32,
    n_actions: usize,
    nodes: &mut u64,
) -> Result<(f64, bool)> {
    let out = env.step(state, &Action::Discrete(action))?;
    *nodes += 1;
    if out.dead {
        return Ok((out.reward, false));
    }
    if out.terminal || remaining == 1 {
        return Ok((out.reward, true));
    }
    let mut best = f64::NEG_INFINITY;
    let mut alive = false;
    for next in 0..n_actions {
        let (r, a) = search(env, &out.next_state, next, remaining - 1, n_actions, nodes)?;
        best = best.max(r);
        alive |= a;
    }
    Ok((out.reward + best, alive))
}

/// Argmax of `optimal_return` among actions that can stay alive, or among all
/// actions when none can. Ties go to the lowest index.
pub fn oracle_best_action(table: &ActionValueTable) -> Result<usize> {
    if table.entries.is_empty() {
        return Err(Error::contract("empty action value table"));
    }
    let any_alive = table.entries.iter().any(|e| e.reachable_alive);
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in table.entries.iter().enumerate() {
        if any_alive && !e.reachable_alive {
            continue;
        }
        if best.is_none_or(|(_, r)| e.optimal_return > r) {
            best = Some((i, e.optimal_return));
        }
    }
    Ok(best.map(|(i, _)| i).unwrap_or(0))
}

/// Plays an optimal action at every step.
///
/// Returns are undiscounted, so many actions often tie at the full horizon
/// (stepping back and forth still reaches the goal in time). The planner
/// deepens from horizon 1 and takes the first action that already attains the
/// full-horizon optimum, which reaches it soonest.
#[derive(Debug, Clone)]
pub struct OraclePlanner {
    pub horizon: u32,
}

impl<E: Environment> Planner<E> for OraclePlanner {
    fn plan(&mut self, env: &E, state: &E::State, _observation: &[f64], _seed: u64) -> Result<Plan> {
        let full = exhaustive_values(env, state, self.horizon)?;
        let best = oracle_best_action(&full)?;
        let target = full.entries[best];
        let mut samples = full.samples();
        for h in 1..self.horizon {
            let table = exhaustive_values(env, state, h)?;
            samples += table.samples();
            let hit = table
                .entries
                .iter()
                .zip(&full.entries)
                .position(|(e, f)| e.optimal_return >= target.optimal_return && f.reachable_alive == target.reachable_alive);
            if let Some(a) = hit {
                return Ok(Plan {
                    samples_used: samples,
                    ..Plan::bare(Action::Discrete(a))
                });
            }
        }
        Ok(Plan {
            samples_used: samples,
            ..Plan::bare(Action::Discrete(best))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ActionSpace, ChainTrap, EnvironmentDescriptor, PointNavigator, StepOutcome};

    /// Trap-free counter: each action adds its index to the state.
    struct Counter {
        desc: EnvironmentDescriptor,
    }

    impl Counter {
        fn new(n: usize) -> Self {
            Self {
                desc: EnvironmentDescriptor {
                    name: "counter".into(),
                    action_space: ActionSpace::one_hot(n),
                    observation_dim: 1,
                    max_episode_steps: 10,
                },
            }
        }
    }

    impl Environment for Counter {
        type State = i64;
        fn descriptor(&self) -> &EnvironmentDescriptor {
            &self.desc
        }
        fn reset(&self, _: u64) -> Result<(i64, Vec<f64>)> {
            Ok((0, vec![0.0]))
        }
        fn step(&self, s: &i64, a: &Action) -> Result<StepOutcome<i64>> {
            let i = a.index().unwrap() as i64;
            Ok(StepOutcome {
                next_state: s + i,
                observation: vec![(s + i) as f64],
                reward: i as f64,
                dead: false,
                terminal: false,
            })
        }
    }

    #[test]
    fn goal_adjacent() {
        let t = exhaustive_values(&ChainTrap::new(), &5, 1).unwrap();
        assert_eq!(t.entries[ChainTrap::RIGHT].optimal_return, 10.0);
        assert_eq!(t.entries[ChainTrap::LEFT].optimal_return, 0.0);
        assert_eq!(oracle_best_action(&t).unwrap(), ChainTrap::RIGHT);
    }

    #[test]
    fn trap_adjacent_left_is_dead() {
        for h in 1..=8 {
            let t = exhaustive_values(&ChainTrap::new(), &1, h).unwrap();
            assert!(!t.entries[ChainTrap::LEFT].reachable_alive);
            assert!(t.entries[ChainTrap::RIGHT].reachable_alive);
            assert_eq!(oracle_best_action(&t).unwrap(), ChainTrap::RIGHT);
        }
        let t = exhaustive_values(&ChainTrap::new(), &1, 6).unwrap();
        assert_eq!(t.entries[ChainTrap::RIGHT].optimal_return, 10.0);
    }

    #[test]
    fn horizon_zero() {
        let t = exhaustive_values(&ChainTrap::new(), &3, 0).unwrap();
        assert_eq!(t.entries.len(), 2);
        assert!(t.entries.iter().all(|e| e.optimal_return == 0.0 && e.reachable_alive));
        assert_eq!(t.samples(), 0);
    }

    #[test]
    fn node_count_on_trap_free_tree() {
        for (n, h) in [(2usize, 5u32), (3, 4), (5, 3)] {
            let t = exhaustive_values(&Counter::new(n), &0, h).unwrap();
            let expected: u64 = (0..=h).map(|d| (n as u64).pow(d)).sum();
            assert_eq!(t.nodes, expected);
            // Best is repeating the largest increment.
            assert_eq!(t.entries[n - 1].optimal_return, ((n - 1) as u32 * h) as f64);
        }
    }

    #[test]
    fn tie_and_death_rules() {
        let v = |r, a| ActionValue {
            optimal_return: r,
            reachable_alive: a,
        };
        let table = |e: Vec<ActionValue>| ActionValueTable { entries: e, nodes: 0 };
        assert_eq!(oracle_best_action(&table(vec![v(1.0, true), v(1.0, true)])).unwrap(), 0);
        assert_eq!(oracle_best_action(&table(vec![v(0.0, false), v(0.0, false)])).unwrap(), 0);
        assert_eq!(oracle_best_action(&table(vec![v(9.0, false), v(1.0, true)])).unwrap(), 1);
        assert!(oracle_best_action(&table(vec![])).is_err());
    }

    #[test]
    fn rejects_large_and_continuous() {
        assert!(matches!(
            exhaustive_values(&Counter::new(5), &0, 11),
            Err(Error::SizeLimit(_))
        ));
        let env = PointNavigator::new();
        let (root, _) = env.reset(0).unwrap();
        assert!(matches!(exhaustive_values(&env, &root, 2), Err(Error::UnsupportedSpace(_))));
    }
}
