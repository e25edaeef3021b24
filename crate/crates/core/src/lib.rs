//! Fractal Monte Carlo planning over clonable simulator states.
//!
//! A swarm of walkers scans the futures reachable from a root state,
//! recycling dead or poorly valued walkers onto better leaves, and the
//! decision is read off the distribution of walkers over root actions.
//!
//! The crate also ships the pieces needed to judge that planner:
//!
//! - [`uct`]: a UCB1 tree-search baseline under the same sample accounting.
//! - [`oracle`]: exhaustive enumeration for small discrete instances.
//! - [`env`]: the environment contract and three built-in environments.
//! - [`bridge`]: a newline-delimited JSON protocol for out-of-process simulators.
//! - [`bench`]: seeded episode runs, comparisons and trace output.

pub mod bench;
pub mod bridge;
pub mod engine;
pub mod env;
pub mod episode;
mod error;
pub mod oracle;
pub mod stats;
pub mod uct;

pub use engine::{plan_step, run_episode, Decision, FmcParams, Swarm, Walker};
pub use env::{Action, ActionSpace, Environment, EnvironmentDescriptor, StepOutcome};
pub use error::{Error, Result};
