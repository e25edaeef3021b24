use super::{Action, ActionSpace, Environment, EnvironmentDescriptor, StepOutcome};
use crate::Result;

/// Dead end of the chain.
pub const CHAIN_TRAP: u8 = 0;
/// Rewarding, episode-ending end of the chain.
pub const CHAIN_GOAL: u8 = 6;
/// Start cell, one step from the trap.
pub const CHAIN_START: u8 = 1;

const GOAL_REWARD: f64 = 10.0;

/// Positions `0..=6` on a line with actions `LEFT = 0`, `RIGHT = 1`.
///
/// Position 0 is dead, position 6 pays 10 and ends the episode. The state is
/// the position itself and the observation is `[position]`.
#[derive(Debug, Clone)]
pub struct ChainTrap {
    descriptor: EnvironmentDescriptor,
}

impl ChainTrap {
    pub const NAME: &'static str = "chain-trap";
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;

    pub fn new() -> Self {
        Self {
            descriptor: EnvironmentDescriptor {
                name: Self::NAME.into(),
                action_space: ActionSpace::one_hot(2),
                observation_dim: 1,
                max_episode_steps: 20,
            },
        }
    }
}

impl Default for ChainTrap {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for ChainTrap {
    type State = u8;

    fn descriptor(&self) -> &EnvironmentDescriptor {
        &self.descriptor
    }

    fn reset(&self, _seed: u64) -> Result<(u8, Vec<f64>)> {
        Ok((CHAIN_START, vec![CHAIN_START as f64]))
    }

    fn step(&self, state: &u8, action: &Action) -> Result<StepOutcome<u8>> {
        self.descriptor.action_space.check(action)?;
        let pos = *state;
        let absorbed = pos == CHAIN_TRAP || pos >= CHAIN_GOAL;
        let next = if absorbed {
            pos
        } else if action.index() == Some(Self::LEFT) {
            pos - 1
        } else {
            pos + 1
        };
        let reward = if !absorbed && next == CHAIN_GOAL { GOAL_REWARD } else { 0.0 };
        Ok(StepOutcome {
            next_state: next,
            observation: vec![next as f64],
            reward,
            dead: next == CHAIN_TRAP,
            terminal: next == CHAIN_GOAL,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_and_step() {
        let env = ChainTrap::new();
        assert_eq!(env.reset(0).unwrap(), (CHAIN_START, vec![1.0]));
        let out = env.step(&3, &Action::Discrete(ChainTrap::RIGHT)).unwrap();
        assert_eq!((out.next_state, out.reward, out.dead), (4, 0.0, false));
        let goal = env.step(&5, &Action::Discrete(ChainTrap::RIGHT)).unwrap();
        assert_eq!((goal.reward, goal.terminal, goal.dead), (10.0, true, false));
        let trap = env.step(&1, &Action::Discrete(ChainTrap::LEFT)).unwrap();
        assert!(trap.dead);
    }

    #[test]
    fn absorbing_ends() {
        let env = ChainTrap::new();
        for a in 0..2 {
            let dead = env.step(&CHAIN_TRAP, &Action::Discrete(a)).unwrap();
            assert_eq!((dead.next_state, dead.reward, dead.dead), (CHAIN_TRAP, 0.0, true));
            let goal = env.step(&CHAIN_GOAL, &Action::Discrete(a)).unwrap();
            assert_eq!((goal.next_state, goal.reward, goal.terminal), (CHAIN_GOAL, 0.0, true));
        }
    }

    #[test]
    fn rejects_foreign_actions() {
        let env = ChainTrap::new();
        assert!(env.step(&3, &Action::Discrete(2)).is_err());
        assert!(env.step(&3, &Action::Continuous(vec![1.0])).is_err());
    }
}
