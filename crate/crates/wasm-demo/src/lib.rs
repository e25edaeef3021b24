//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed:
//!
//! * [`relativize_curve`]: the relativize transform applied to any list of numbers.
//! * [`GridDemo`]: an agent on the trap gridworld whose planning swarm can be
//!   advanced one iteration at a time, so the page can draw every walker.
//! * [`point_nav_episode`]: a full continuous-control episode, returned as a path.

use fmc::engine::{FmcParams, Swarm};
use fmc::env::{Action, Environment, GridCell, PointNavigator, TrapGridworld, GRID_GOAL, GRID_SIZE};
use fmc::stats::relativize;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub fn relativize_curve(values: Vec<f64>) -> Vec<f64> {
    relativize(&values)
}

/// Grid edge length, for sizing the canvas.
#[wasm_bindgen]
pub fn grid_size() -> i32 {
    GRID_SIZE
}

/// Goal cell as `[x, y]`.
#[wasm_bindgen]
pub fn grid_goal() -> Vec<i32> {
    vec![GRID_GOAL.x, GRID_GOAL.y]
}

/// Dead cells as a flat `[x0, y0, x1, y1, ...]` list.
#[wasm_bindgen]
pub fn grid_trap_cells() -> Vec<i32> {
    TrapGridworld::trap_cells().iter().flat_map(|c| [c.x, c.y]).collect()
}

/// A gridworld episode with a planner the caller drives by hand.
#[wasm_bindgen]
pub struct GridDemo {
    env: TrapGridworld,
    params: FmcParams,
    agent: GridCell,
    observation: Vec<f64>,
    swarm: Option<Swarm<GridCell>>,
    decisions: u64,
    steps: usize,
    score: f64,
    dead: bool,
    done: bool,
}

#[wasm_bindgen]
impl GridDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(walkers: usize, horizon: f64, max_samples: u64, seed: u64) -> Result<GridDemo, JsError> {
        let params = FmcParams {
            n_walkers: walkers,
            time_horizon: horizon,
            dt: 1,
            max_samples,
            seed,
        };
        params.validate().map_err(js)?;
        let env = TrapGridworld::new();
        let (agent, observation) = env.reset(seed).map_err(js)?;
        Ok(GridDemo {
            env,
            params,
            agent,
            observation,
            swarm: None,
            decisions: 0,
            steps: 0,
            score: 0.0,
            dead: false,
            done: false,
        })
    }

    /// Runs one perturb / evaluate / recycle round. When the swarm has spent
    /// its budget or horizon, the agent acts instead. Returns true if it acted.
    pub fn iterate(&mut self) -> Result<bool, JsError> {
        if self.done {
            return Ok(false);
        }
        if self.swarm.is_none() {
            let params = FmcParams {
                seed: self.params.seed.wrapping_add(self.decisions),
                ..self.params.clone()
            };
            self.swarm = Some(Swarm::new(self.agent, self.observation.clone(), &params).map_err(js)?);
        }
        let swarm = self.swarm.as_mut().expect("created above");
        let exhausted = swarm.alive_count() == 0
            || swarm.horizon_reached()
            || swarm.samples_used() >= self.params.max_samples;
        if !exhausted {
            swarm.perturb(&self.env).map_err(js)?;
            if let Some(vr) = swarm.evaluate() {
                swarm.recycle(&vr).map_err(js)?;
            }
            return Ok(false);
        }
        let action = swarm
            .choose(self.env.action_space())
            .map(|d| d.action)
            .unwrap_or(Action::Discrete(TrapGridworld::STAY));
        self.swarm = None;
        self.decisions += 1;
        let out = self.env.step(&self.agent, &action).map_err(js)?;
        self.agent = out.next_state;
        self.observation = out.observation;
        self.score += out.reward;
        self.steps += 1;
        self.dead = out.dead;
        self.done = out.dead || out.terminal || self.steps >= self.env.descriptor().max_episode_steps;
        Ok(true)
    }

    /// Plans and acts once, skipping the per-iteration view.
    pub fn act(&mut self) -> Result<(), JsError> {
        while !self.done && !self.iterate()? {}
        Ok(())
    }

    /// Walkers as a flat `[x, y, alive, ...]` list (alive is 0 or 1).
    pub fn walkers(&self) -> Vec<i32> {
        self.swarm
            .as_ref()
            .map(|s| {
                s.walkers()
                    .iter()
                    .flat_map(|w| [w.state.x, w.state.y, i32::from(w.alive)])
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn agent_x(&self) -> i32 {
        self.agent.x
    }

    pub fn agent_y(&self) -> i32 {
        self.agent.y
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn samples_used(&self) -> u64 {
        self.swarm.as_ref().map_or(0, |s| s.samples_used())
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn dead(&self) -> bool {
        self.dead
    }
}

/// Plays one point-navigator episode and returns the visited positions as
/// `[x0, y0, x1, y1, ...]`, starting at the start position.
#[wasm_bindgen]
pub fn point_nav_episode(walkers: usize, horizon: f64, max_samples: u64, seed: u64) -> Result<Vec<f64>, JsError> {
    let params = FmcParams {
        n_walkers: walkers,
        time_horizon: horizon,
        dt: 1,
        max_samples,
        seed,
    };
    let env = PointNavigator::new();
    let episode = fmc::run_episode(&env, &params, env.descriptor().max_episode_steps, seed).map_err(js)?;
    let (start, _) = env.reset(seed).map_err(js)?;
    let mut path = vec![start.x, start.y];
    let mut state = start;
    for t in &episode.trajectory {
        state = env.step(&state, &t.action).map_err(js)?.next_state;
        path.extend([state.x, state.y]);
    }
    Ok(path)
}

/// Point-navigator scene as `[goal_x, goal_y, goal_r, obstacle_x, obstacle_y, obstacle_r]`.
#[wasm_bindgen]
pub fn point_nav_scene() -> Vec<f64> {
    vec![
        PointNavigator::GOAL.0,
        PointNavigator::GOAL.1,
        PointNavigator::GOAL_RADIUS,
        PointNavigator::OBSTACLE.0,
        PointNavigator::OBSTACLE.1,
        PointNavigator::OBSTACLE_RADIUS,
    ]
}

fn js(e: fmc::Error) -> JsError {
    JsError::new(&e.to_string())
}
