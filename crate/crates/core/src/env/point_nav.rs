use serde::{Deserialize, Serialize};

use super::{Action, ActionSpace, Environment, EnvironmentDescriptor, StepOutcome};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointState {
    pub x: f64,
    pub y: f64,
}

impl PointState {
    fn distance_to(self, (cx, cy): (f64, f64)) -> f64 {
        (self.x - cx).hypot(self.y - cy)
    }
}

/// A 2D point driven by a command in `[-1, 1]^2`, integrated with Euler steps
/// of `dt = 0.1`: `p' = p + dt * a`.
///
/// A circular dead obstacle sits between the start `(0, 0)` and the goal
/// `(2, 0)`. Each step pays minus the distance to the goal; entering the goal
/// radius adds 100 and ends the episode.
#[derive(Debug, Clone)]
pub struct PointNavigator {
    descriptor: EnvironmentDescriptor,
}

impl PointNavigator {
    pub const NAME: &'static str = "point-navigator";
    pub const DT: f64 = 0.1;
    pub const START: (f64, f64) = (0.0, 0.0);
    pub const GOAL: (f64, f64) = (2.0, 0.0);
    pub const GOAL_RADIUS: f64 = 0.2;
    pub const GOAL_BONUS: f64 = 100.0;
    pub const OBSTACLE: (f64, f64) = (1.0, 0.05);
    pub const OBSTACLE_RADIUS: f64 = 0.3;

    pub fn new() -> Self {
        Self {
            descriptor: EnvironmentDescriptor {
                name: Self::NAME.into(),
                action_space: ActionSpace::Continuous {
                    low: vec![-1.0, -1.0],
                    high: vec![1.0, 1.0],
                },
                observation_dim: 2,
                max_episode_steps: 200,
            },
        }
    }

    pub fn is_dead(state: PointState) -> bool {
        state.distance_to(Self::OBSTACLE) < Self::OBSTACLE_RADIUS
    }

    pub fn at_goal(state: PointState) -> bool {
        state.distance_to(Self::GOAL) <= Self::GOAL_RADIUS
    }
}

impl Default for PointNavigator {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for PointNavigator {
    type State = PointState;

    fn descriptor(&self) -> &EnvironmentDescriptor {
        &self.descriptor
    }

    fn reset(&self, _seed: u64) -> Result<(PointState, Vec<f64>)> {
        let (x, y) = Self::START;
        Ok((PointState { x, y }, vec![x, y]))
    }

    fn step(&self, state: &PointState, action: &Action) -> Result<StepOutcome<PointState>> {
        self.descriptor.action_space.check(action)?;
        let s = *state;
        let dead = Self::is_dead(s);
        let done = Self::at_goal(s);
        if dead || done {
            return Ok(StepOutcome {
                next_state: s,
                observation: vec![s.x, s.y],
                reward: 0.0,
                dead,
                terminal: done && !dead,
            });
        }
        let a = action.vector().unwrap_or(&[0.0, 0.0]);
        let next = PointState {
            x: s.x + Self::DT * a[0],
            y: s.y + Self::DT * a[1],
        };
        let dead = Self::is_dead(next);
        let terminal = !dead && Self::at_goal(next);
        let bonus = if terminal { Self::GOAL_BONUS } else { 0.0 };
        Ok(StepOutcome {
            next_state: next,
            observation: vec![next.x, next.y],
            reward: -next.distance_to(Self::GOAL) + bonus,
            dead,
            terminal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_step_from_origin() {
        let env = PointNavigator::new();
        let (start, obs) = env.reset(1).unwrap();
        assert_eq!(obs, vec![0.0, 0.0]);
        let out = env.step(&start, &Action::Continuous(vec![0.5, -0.25])).unwrap();
        assert!((out.next_state.x - 0.05).abs() < 1e-15);
        assert!((out.next_state.y + 0.025).abs() < 1e-15);
        // 1.95^2 + 0.025^2 = 3.803125
        let expected = -3.803125f64.sqrt();
        assert!((out.reward - expected).abs() < 1e-12);
        assert!(!out.dead && !out.terminal);
    }

    #[test]
    fn obstacle_kills_and_absorbs() {
        let env = PointNavigator::new();
        let edge = PointState { x: 0.65, y: 0.05 };
        let out = env.step(&edge, &Action::Continuous(vec![1.0, 0.0])).unwrap();
        assert!(out.dead);
        let again = env.step(&out.next_state, &Action::Continuous(vec![-1.0, 0.0])).unwrap();
        assert_eq!((again.next_state, again.reward, again.dead), (out.next_state, 0.0, true));
    }

    #[test]
    fn goal_bonus() {
        let env = PointNavigator::new();
        let near = PointState { x: 1.75, y: 0.0 };
        let out = env.step(&near, &Action::Continuous(vec![1.0, 0.0])).unwrap();
        assert!(out.terminal);
        assert!((out.reward - (100.0 - 0.15)).abs() < 1e-9);
    }

    #[test]
    fn bounds_are_enforced() {
        let env = PointNavigator::new();
        let s = PointState { x: 0.0, y: 0.0 };
        assert!(env.step(&s, &Action::Continuous(vec![1.5, 0.0])).is_err());
        assert!(env.step(&s, &Action::Discrete(0)).is_err());
    }
}
