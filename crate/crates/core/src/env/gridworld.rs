use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, Environment, EnvironmentDescriptor, StepOutcome};
use crate::Result;

pub const GRID_SIZE: i32 = 9;
pub const GRID_START: GridCell = GridCell { x: 0, y: 2 };
pub const GRID_GOAL: GridCell = GridCell { x: 8, y: 6 };

/// Inclusive bounds of the excluded block: `x` in `1..=5`, `y` in `2..=4`.
/// The cell right of the start is already dead.
const TRAP_X: (i32, i32) = (1, 5);
const TRAP_Y: (i32, i32) = (2, 4);

const GOAL_REWARD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCell {
    pub x: i32,
    pub y: i32,
}

impl GridCell {
    pub fn is_trap(self) -> bool {
        (TRAP_X.0..=TRAP_X.1).contains(&self.x) && (TRAP_Y.0..=TRAP_Y.1).contains(&self.y)
    }

    pub fn is_goal(self) -> bool {
        self == GRID_GOAL
    }

    fn observation(self) -> Vec<f64> {
        vec![self.x as f64, self.y as f64]
    }
}

/// A 9x9 grid with a rectangular block of dead cells between start and goal.
///
/// Actions are `UP (y+1)`, `DOWN (y-1)`, `LEFT (x-1)`, `RIGHT (x+1)` and
/// `STAY`; moves off the grid leave the walker in place. Every step pays 0
/// except entering the goal, which pays 10 and ends the episode.
#[derive(Debug, Clone)]
pub struct TrapGridworld {
    descriptor: EnvironmentDescriptor,
}

impl TrapGridworld {
    pub const NAME: &'static str = "trap-gridworld";
    pub const UP: usize = 0;
    pub const DOWN: usize = 1;
    pub const LEFT: usize = 2;
    pub const RIGHT: usize = 3;
    pub const STAY: usize = 4;

    pub fn new() -> Self {
        Self {
            descriptor: EnvironmentDescriptor {
                name: Self::NAME.into(),
                action_space: ActionSpace::one_hot(5),
                observation_dim: 2,
                max_episode_steps: 200,
            },
        }
    }

    /// Every dead cell, row by row.
    pub fn trap_cells() -> Vec<GridCell> {
        (0..GRID_SIZE)
            .flat_map(|y| (0..GRID_SIZE).map(move |x| GridCell { x, y }))
            .filter(|c| c.is_trap())
            .collect()
    }
}

impl Default for TrapGridworld {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for TrapGridworld {
    type State = GridCell;

    fn descriptor(&self) -> &EnvironmentDescriptor {
        &self.descriptor
    }

    fn reset(&self, _seed: u64) -> Result<(GridCell, Vec<f64>)> {
        Ok((GRID_START, GRID_START.observation()))
    }

    fn step(&self, state: &GridCell, action: &Action) -> Result<StepOutcome<GridCell>> {
        self.descriptor.action_space.check(action)?;
        let cell = *state;
        let absorbed = cell.is_trap() || cell.is_goal();
        let next = if absorbed {
            cell
        } else {
            let (dx, dy) = match action.index() {
                Some(Self::UP) => (0, 1),
                Some(Self::DOWN) => (0, -1),
                Some(Self::LEFT) => (-1, 0),
                Some(Self::RIGHT) => (1, 0),
                _ => (0, 0),
            };
            GridCell {
                x: (cell.x + dx).clamp(0, GRID_SIZE - 1),
                y: (cell.y + dy).clamp(0, GRID_SIZE - 1),
            }
        };
        let reward = if !absorbed && next.is_goal() { GOAL_REWARD } else { 0.0 };
        Ok(StepOutcome {
            next_state: next,
            observation: next.observation(),
            reward,
            dead: next.is_trap(),
            terminal: next.is_goal(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_is_next_to_the_trap() {
        let env = TrapGridworld::new();
        let (start, obs) = env.reset(7).unwrap();
        assert_eq!(obs, vec![0.0, 2.0]);
        let out = env.step(&start, &Action::Discrete(TrapGridworld::RIGHT)).unwrap();
        assert!(out.dead);
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.observation, vec![1.0, 2.0]);
        assert!(!start.is_trap() && !GRID_GOAL.is_trap());
        assert_eq!(TrapGridworld::trap_cells().len(), 15);
    }

    #[test]
    fn walls_clamp_moves() {
        let env = TrapGridworld::new();
        let out = env.step(&GRID_START, &Action::Discrete(TrapGridworld::LEFT)).unwrap();
        assert_eq!(out.next_state, GRID_START);
        assert!(!out.dead);
    }

    #[test]
    fn goal_pays_once() {
        let env = TrapGridworld::new();
        let near = GridCell { x: 7, y: 6 };
        let out = env.step(&near, &Action::Discrete(TrapGridworld::RIGHT)).unwrap();
        assert_eq!((out.reward, out.terminal), (10.0, true));
        let again = env.step(&out.next_state, &Action::Discrete(TrapGridworld::STAY)).unwrap();
        assert_eq!((again.reward, again.terminal), (0.0, true));
    }

    #[test]
    fn dead_cells_absorb() {
        let env = TrapGridworld::new();
        let trap = GridCell { x: 3, y: 3 };
        for a in 0..5 {
            let out = env.step(&trap, &Action::Discrete(a)).unwrap();
            assert_eq!((out.next_state, out.reward, out.dead), (trap, 0.0, true));
        }
    }
}
