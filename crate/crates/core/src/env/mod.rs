//! The environment contract shared by every planner.
//!
//! States are plain values: planners copy them freely to save and restore
//! positions in the search tree, and [`Environment::step`] is a pure function
//! of `(state, action)`.

use std::fmt::Debug;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod chain_trap;
mod gridworld;
mod point_nav;

pub use chain_trap::{ChainTrap, CHAIN_GOAL, CHAIN_START, CHAIN_TRAP};
pub use gridworld::{GridCell, TrapGridworld, GRID_GOAL, GRID_SIZE, GRID_START};
pub use point_nav::{PointNavigator, PointState};

/// Names accepted by [`builtin_descriptor`] and the bench harness.
pub const BUILTIN_ENVIRONMENTS: [&str; 3] = [ChainTrap::NAME, TrapGridworld::NAME, PointNavigator::NAME];

/// An action: an index into a discrete space or a point of a continuous box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

impl Action {
    pub fn index(&self) -> Option<usize> {
        match self {
            Action::Discrete(i) => Some(*i),
            Action::Continuous(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[f64]> {
        match self {
            Action::Discrete(_) => None,
            Action::Continuous(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSpace {
    /// One numeric embedding per action index; the embeddings share a dimension.
    Discrete { actions: Vec<Vec<f64>> },
    /// A box with per-dimension bounds, `low[i] < high[i]`.
    Continuous { low: Vec<f64>, high: Vec<f64> },
}

impl ActionSpace {
    /// `n` actions embedded as the standard basis of `R^n`.
    pub fn one_hot(n: usize) -> Self {
        let actions = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        ActionSpace::Discrete { actions }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ActionSpace::Discrete { actions } => {
                let dim = actions
                    .first()
                    .ok_or_else(|| Error::contract("discrete space needs at least one action"))?
                    .len();
                if actions.iter().any(|a| a.len() != dim) {
                    return Err(Error::contract("action embeddings must share one dimension"));
                }
            }
            ActionSpace::Continuous { low, high } => {
                if low.is_empty() || low.len() != high.len() {
                    return Err(Error::contract("continuous bounds must be non-empty and equally long"));
                }
                if low.iter().zip(high).any(|(l, h)| !(l < h)) {
                    return Err(Error::contract("continuous bounds need low < high in every dimension"));
                }
            }
        }
        Ok(())
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ActionSpace::Discrete { .. })
    }

    /// Number of discrete actions; `None` for a continuous box.
    pub fn len(&self) -> Option<usize> {
        match self {
            ActionSpace::Discrete { actions } => Some(actions.len()),
            ActionSpace::Continuous { .. } => None,
        }
    }

    pub fn contains(&self, action: &Action) -> bool {
        match (self, action) {
            (ActionSpace::Discrete { actions }, Action::Discrete(i)) => *i < actions.len(),
            (ActionSpace::Continuous { low, high }, Action::Continuous(v)) => {
                v.len() == low.len()
                    && v.iter().zip(low.iter().zip(high)).all(|(x, (l, h))| x.is_finite() && *x >= *l && *x <= *h)
            }
            _ => false,
        }
    }

    pub fn check(&self, action: &Action) -> Result<()> {
        if self.contains(action) {
            Ok(())
        } else {
            Err(Error::contract(format!("action {action:?} is outside the action space")))
        }
    }

    /// Draws uniformly: over indices for a discrete space, inside the box otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match self {
            ActionSpace::Discrete { actions } => Action::Discrete(rng.gen_range(0..actions.len())),
            ActionSpace::Continuous { low, high } => Action::Continuous(
                low.iter().zip(high).map(|(l, h)| l + (h - l) * rng.gen::<f64>()).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentDescriptor {
    pub name: String,
    pub action_space: ActionSpace,
    pub observation_dim: usize,
    pub max_episode_steps: usize,
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<S> {
    pub next_state: S,
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The state lies in the excluded region. Dead states absorb every action with zero reward.
    pub dead: bool,
    /// The episode ended without dying (goal reached). Terminal states also absorb with zero reward.
    pub terminal: bool,
}

/// A simulator whose states can be copied and stepped from any point.
pub trait Environment {
    type State: Clone + Debug + PartialEq;

    fn descriptor(&self) -> &EnvironmentDescriptor;

    fn action_space(&self) -> &ActionSpace {
        &self.descriptor().action_space
    }

    /// The root state and observation. Deterministic given `seed`.
    fn reset(&self, seed: u64) -> Result<(Self::State, Vec<f64>)>;

    fn step(&self, state: &Self::State, action: &Action) -> Result<StepOutcome<Self::State>>;

    /// Steps several independent walkers. Remote environments override this to pipeline requests.
    fn step_batch(&self, batch: &[(&Self::State, &Action)]) -> Result<Vec<StepOutcome<Self::State>>> {
        batch.iter().map(|(s, a)| self.step(s, a)).collect()
    }

    /// Hint that only `keep` is still referenced by the caller; remote
    /// environments may free everything else.
    fn retain_only(&self, _keep: &[Self::State]) -> Result<()> {
        Ok(())
    }
}

/// Descriptor of a built-in environment by name.
pub fn builtin_descriptor(name: &str) -> Option<EnvironmentDescriptor> {
    match name {
        ChainTrap::NAME => Some(ChainTrap::new().descriptor().clone()),
        TrapGridworld::NAME => Some(TrapGridworld::new().descriptor().clone()),
        PointNavigator::NAME => Some(PointNavigator::new().descriptor().clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn space_validation() {
        assert!(ActionSpace::one_hot(3).validate().is_ok());
        assert!(ActionSpace::Discrete { actions: vec![] }.validate().is_err());
        assert!(ActionSpace::Discrete {
            actions: vec![vec![0.0], vec![0.0, 1.0]]
        }
        .validate()
        .is_err());
        assert!(ActionSpace::Continuous {
            low: vec![0.0, 1.0],
            high: vec![1.0, 1.0]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn samples_stay_in_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let boxed = ActionSpace::Continuous {
            low: vec![-1.0, 0.0],
            high: vec![1.0, 0.5],
        };
        let grid = ActionSpace::one_hot(5);
        for _ in 0..1000 {
            assert!(boxed.contains(&boxed.sample(&mut rng)));
            assert!(grid.contains(&grid.sample(&mut rng)));
        }
        assert!(!grid.contains(&Action::Discrete(5)));
        assert!(!grid.contains(&Action::Continuous(vec![0.0])));
    }

    #[test]
    fn descriptor_json_uses_snake_case_fields() {
        let desc = builtin_descriptor("chain-trap").unwrap();
        let json = serde_json::to_value(&desc).unwrap();
        for key in ["name", "action_space", "observation_dim", "max_episode_steps"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let back: EnvironmentDescriptor = serde_json::from_value(json).unwrap();
        assert_eq!(back, desc);
    }

    #[test]
    fn action_wire_forms() {
        assert_eq!(serde_json::to_string(&Action::Discrete(2)).unwrap(), "2");
        assert_eq!(
            serde_json::from_str::<Action>("[0.5,-0.25]").unwrap(),
            Action::Continuous(vec![0.5, -0.25])
        );
    }
}
