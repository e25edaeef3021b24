//! Seeded benchmark runs, agent comparisons and trace output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bridge::BridgeEnv;
use crate::engine::{FmcParams, FmcPlanner};
use crate::env::{Action, ChainTrap, Environment, PointNavigator, TrapGridworld};
use crate::episode::{self, EpisodeResult, Planner, RandomPlanner};
use crate::oracle::{OraclePlanner, MAX_SEQUENCES};
use crate::uct::{UctParams, UctPlanner};
use crate::{Error, Result};

/// Header of `results.csv`.
pub const RESULTS_HEADER: [&str; 7] = [
    "agent",
    "environment",
    "seed",
    "total_score",
    "steps",
    "samples_per_step",
    "wall_time_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Fmc,
    Uct,
    Random,
    Oracle,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Fmc => "fmc",
            AgentKind::Uct => "uct",
            AgentKind::Random => "random",
            AgentKind::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fmc" => Ok(AgentKind::Fmc),
            "uct" => Ok(AgentKind::Uct),
            "random" => Ok(AgentKind::Random),
            "oracle" => Ok(AgentKind::Oracle),
            other => Err(Error::Config(format!(
                "unknown agent {other:?}; expected fmc, uct, random or oracle"
            ))),
        }
    }
}

/// One benchmark run: an agent on an environment over a list of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Built-in environment name, `tcp://host:port` or `exec:<command>`.
    pub environment: String,
    pub agent: AgentKind,
    pub fmc: FmcParams,
    pub uct: UctParams,
    pub oracle_horizon: u32,
    /// Number of episodes when `seeds` is empty; seeds are then `base_seed + index`.
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub base_seed: u64,
    /// Environment steps per episode; defaults to the environment's own limit.
    pub max_steps: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            environment: TrapGridworld::NAME.into(),
            agent: AgentKind::Fmc,
            fmc: FmcParams::default(),
            uct: UctParams::default(),
            oracle_horizon: 6,
            episodes: 10,
            seeds: Vec::new(),
            base_seed: 0,
            max_steps: None,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn seeds(&self) -> Result<Vec<u64>> {
        if self.seeds.is_empty() {
            return Ok((0..self.episodes as u64).map(|i| self.base_seed + i).collect());
        }
        if self.episodes != 0 && self.episodes != self.seeds.len() {
            return Err(Error::Config(format!(
                "episodes = {} but {} seeds were given",
                self.episodes,
                self.seeds.len()
            )));
        }
        Ok(self.seeds.clone())
    }

    fn validate_for<E: Environment>(&self, env: &E) -> Result<()> {
        self.seeds()?;
        if self.max_steps == Some(0) {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        let space = env.action_space();
        match self.agent {
            AgentKind::Fmc => self.fmc.validate()?,
            AgentKind::Uct => {
                self.uct.validate()?;
                if !space.is_discrete() {
                    return Err(Error::UnsupportedSpace(format!(
                        "uct needs a discrete action space, {} is continuous",
                        env.descriptor().name
                    )));
                }
            }
            AgentKind::Oracle => {
                let n = space.len().ok_or_else(|| {
                    Error::UnsupportedSpace(format!(
                        "oracle needs a discrete action space, {} is continuous",
                        env.descriptor().name
                    ))
                })?;
                if (n as u64).checked_pow(self.oracle_horizon).is_none_or(|s| s > MAX_SEQUENCES) {
                    return Err(Error::SizeLimit(format!(
                        "oracle horizon {} is too deep for {n} actions",
                        self.oracle_horizon
                    )));
                }
            }
            AgentKind::Random => {}
        }
        Ok(())
    }

    fn planner<E: Environment>(&self, record_trace: bool) -> Box<dyn Planner<E>> {
        match self.agent {
            AgentKind::Fmc => Box::new(FmcPlanner {
                params: self.fmc.clone(),
                record_trace,
            }),
            AgentKind::Uct => Box::new(UctPlanner {
                params: self.uct.clone(),
            }),
            AgentKind::Random => Box::new(RandomPlanner),
            AgentKind::Oracle => Box::new(OraclePlanner {
                horizon: self.oracle_horizon,
            }),
        }
    }
}

/// One episode's line in `results.csv` / `results.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub agent: String,
    pub environment: String,
    pub seed: u64,
    pub total_score: f64,
    pub steps: usize,
    pub samples_per_step: f64,
    pub wall_time_ms: f64,
}

/// A result row together with the full episode it summarizes.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub row: ResultRow,
    pub episode: EpisodeResult,
}

/// Calls `visit` with the environment named by `name`.
pub trait EnvVisitor {
    type Output;
    fn visit<E: Environment>(self, env: &E) -> Result<Self::Output>;
}

pub fn with_environment<V: EnvVisitor>(name: &str, visitor: V) -> Result<V::Output> {
    match name {
        ChainTrap::NAME => visitor.visit(&ChainTrap::new()),
        TrapGridworld::NAME => visitor.visit(&TrapGridworld::new()),
        PointNavigator::NAME => visitor.visit(&PointNavigator::new()),
        endpoint if endpoint.starts_with("tcp://") || endpoint.starts_with("exec:") => {
            let env = BridgeEnv::connect(endpoint)?;
            visitor.visit(&env)
        }
        other => Err(Error::Config(format!(
            "unknown environment {other:?}; try list-envs or a bridge endpoint"
        ))),
    }
}

struct Runner<'a> {
    config: &'a RunConfig,
    record: bool,
}

impl EnvVisitor for Runner<'_> {
    type Output = Vec<EpisodeRun>;

    fn visit<E: Environment>(self, env: &E) -> Result<Vec<EpisodeRun>> {
        run_on(env, self.config, self.record)
    }
}

/// Runs every seeded episode of `config` against `env`. Rows come back ordered by seed.
pub fn run_on<E: Environment>(env: &E, config: &RunConfig, record: bool) -> Result<Vec<EpisodeRun>> {
    config.validate_for(env)?;
    let mut seeds = config.seeds()?;
    seeds.sort_unstable();
    let max_steps = config.max_steps.unwrap_or(env.descriptor().max_episode_steps);
    let mut planner = config.planner::<E>(record);
    let mut runs = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let start = Instant::now();
        let episode = if record {
            episode::play_recorded(env, planner.as_mut(), max_steps, seed)?
        } else {
            episode::play(env, planner.as_mut(), max_steps, seed)?
        };
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        runs.push(EpisodeRun {
            row: ResultRow {
                agent: config.agent.name().into(),
                environment: env.descriptor().name.clone(),
                seed,
                total_score: episode.total_score,
                steps: episode.steps,
                samples_per_step: episode.samples_per_step,
                wall_time_ms,
            },
            episode,
        });
    }
    Ok(runs)
}

/// Runs `config`, returning full episodes.
pub fn run_detailed(config: &RunConfig) -> Result<Vec<EpisodeRun>> {
    with_environment(&config.environment, Runner { config, record: false })
}

/// Runs `config` and, when `out_dir` is set, writes `results.csv` and `results.json` there.
pub fn run(config: &RunConfig) -> Result<Vec<ResultRow>> {
    let rows: Vec<ResultRow> = run_detailed(config)?.into_iter().map(|r| r.row).collect();
    if let Some(dir) = &config.out_dir {
        write_results(dir, &rows)?;
    }
    Ok(rows)
}

pub fn write_results(dir: &Path, rows: &[ResultRow]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_csv(&dir.join("results.csv"), rows)?;
    write_json(&dir.join("results.json"), rows)
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    if rows.is_empty() {
        w.write_record(RESULTS_HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, rows)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Ratio of baseline to planner samples per step.
pub fn efficiency(baseline_samples_per_step: f64, fmc_samples_per_step: f64) -> Result<f64> {
    if !(baseline_samples_per_step > 0.0 && fmc_samples_per_step > 0.0) {
        return Err(Error::contract(format!(
            "efficiency needs positive samples per step, got {baseline_samples_per_step} and {fmc_samples_per_step}"
        )));
    }
    Ok(baseline_samples_per_step / fmc_samples_per_step)
}

/// `x N` with `N` rounded to the nearest integer and grouped by thousands.
pub fn format_efficiency(ratio: f64) -> String {
    let n = ratio.round() as u64;
    let digits = n.to_string();
    let mut grouped = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    format!("x {grouped}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: String,
    pub episodes: usize,
    pub mean_score: f64,
    pub mean_samples_per_step: f64,
    /// Share of episodes that ended in a terminal state while alive.
    pub goal_rate: f64,
}

impl AgentSummary {
    pub fn from_runs(agent: &str, runs: &[EpisodeRun]) -> Self {
        let n = runs.len().max(1) as f64;
        Self {
            agent: agent.into(),
            episodes: runs.len(),
            mean_score: runs.iter().map(|r| r.row.total_score).sum::<f64>() / n,
            mean_samples_per_step: runs.iter().map(|r| r.row.samples_per_step).sum::<f64>() / n,
            goal_rate: runs.iter().filter(|r| r.episode.reached_terminal).count() as f64 / n,
        }
    }
}

/// Two agents on the same environment and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub environment: String,
    pub reference: AgentSummary,
    pub baseline: AgentSummary,
    /// Baseline samples per step over reference samples per step; `None` if either is zero.
    pub efficiency: Option<f64>,
}

impl Comparison {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "agent",
            "environment",
            "episodes",
            "mean_score",
            "mean_samples_per_step",
            "goal_rate",
            "efficiency",
        ])?;
        for (summary, eff) in [(&self.reference, Some(1.0)), (&self.baseline, self.efficiency)] {
            w.write_record([
                summary.agent.clone(),
                self.environment.clone(),
                summary.episodes.to_string(),
                summary.mean_score.to_string(),
                summary.mean_samples_per_step.to_string(),
                summary.goal_rate.to_string(),
                eff.map(|e| e.to_string()).unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Stream(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:>12} {:>18} {:>10} {:>12}\n",
            "agent", "mean score", "samples per step", "goal rate", "efficiency"
        );
        for (s, eff) in [(&self.reference, Some(1.0)), (&self.baseline, self.efficiency)] {
            out.push_str(&format!(
                "{:<10} {:>12.2} {:>18.1} {:>10.2} {:>12}\n",
                s.agent,
                s.mean_score,
                s.mean_samples_per_step,
                s.goal_rate,
                eff.map(format_efficiency).unwrap_or_else(|| "-".into())
            ));
        }
        out
    }
}

pub fn compare_runs(environment: &str, reference: (&str, &[EpisodeRun]), baseline: (&str, &[EpisodeRun])) -> Comparison {
    let reference = AgentSummary::from_runs(reference.0, reference.1);
    let baseline = AgentSummary::from_runs(baseline.0, baseline.1);
    let efficiency = efficiency(baseline.mean_samples_per_step, reference.mean_samples_per_step).ok();
    Comparison {
        environment: environment.into(),
        reference,
        baseline,
        efficiency,
    }
}

/// Runs both configs and summarizes them. `config_a` is the reference the efficiency is relative to.
pub fn compare(config_a: &RunConfig, config_b: &RunConfig) -> Result<Comparison> {
    check_comparable(config_a, config_b)?;
    let a = run_detailed(config_a)?;
    let b = run_detailed(config_b)?;
    let environment = a
        .first()
        .or(b.first())
        .map(|r| r.row.environment.clone())
        .unwrap_or_else(|| config_a.environment.clone());
    Ok(compare_runs(
        &environment,
        (config_a.agent.name(), &a),
        (config_b.agent.name(), &b),
    ))
}

fn check_comparable(a: &RunConfig, b: &RunConfig) -> Result<()> {
    if a.environment != b.environment {
        return Err(Error::Config(format!(
            "compare needs one environment, got {:?} and {:?}",
            a.environment, b.environment
        )));
    }
    let (mut sa, mut sb) = (a.seeds()?, b.seeds()?);
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return Err(Error::Config("compare needs the same seeds in both configs".into()));
    }
    Ok(())
}

/// Result of tuning a UCT budget so its measured samples per step match the reference run.
#[derive(Debug, Clone)]
pub struct MatchedBudget {
    pub uct: UctParams,
    pub target_samples_per_step: f64,
    pub measured_samples_per_step: f64,
    pub runs: Vec<EpisodeRun>,
}

impl MatchedBudget {
    pub fn relative_gap(&self) -> f64 {
        (self.measured_samples_per_step / self.target_samples_per_step - 1.0).abs()
    }
}

/// Rescales `uct_config.uct.budget_samples` until the measured mean samples
/// per step is within `tolerance` of `target` (at most `rounds` tries).
pub fn match_uct_budget(uct_config: &RunConfig, target: f64, tolerance: f64, rounds: usize) -> Result<MatchedBudget> {
    if uct_config.agent != AgentKind::Uct {
        return Err(Error::Config("budget matching applies to the uct agent".into()));
    }
    if !(target > 0.0) {
        return Err(Error::Config("budget matching needs a positive target".into()));
    }
    let mut config = uct_config.clone();
    config.uct.budget_samples = (target.round() as u64).max(1);
    let mut best: Option<MatchedBudget> = None;
    for _ in 0..rounds.max(1) {
        let runs = run_detailed(&config)?;
        let measured = AgentSummary::from_runs("uct", &runs).mean_samples_per_step;
        let candidate = MatchedBudget {
            uct: config.uct.clone(),
            target_samples_per_step: target,
            measured_samples_per_step: measured,
            runs,
        };
        let gap = candidate.relative_gap();
        if best.as_ref().is_none_or(|b| gap < b.relative_gap()) {
            best = Some(candidate);
        }
        if gap <= tolerance || measured <= 0.0 {
            break;
        }
        let scaled = config.uct.budget_samples as f64 * target / measured;
        config.uct.budget_samples = (scaled.round() as u64).max(1);
    }
    Ok(best.expect("at least one round"))
}

/// One line of `trace.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceLine {
    Iteration {
        seed: u64,
        decision: usize,
        iteration: usize,
        samples_used: u64,
        alive: usize,
        depths: Vec<u32>,
        virtual_rewards: Vec<f64>,
    },
    Decision {
        seed: u64,
        decision: usize,
        step: usize,
        action: Action,
        samples_used: u64,
        utilities: Option<Vec<f64>>,
        counts: Vec<usize>,
    },
    Summary {
        agent: String,
        environment: String,
        episodes: usize,
        decisions: usize,
        iterations: usize,
    },
}

/// Flattens recorded episodes into trace lines, ending with a summary.
pub fn trace_lines(agent: &str, environment: &str, runs: &[EpisodeRun]) -> Vec<TraceLine> {
    let mut lines = Vec::new();
    let mut decisions = 0;
    let mut iterations = 0;
    for run in runs {
        for (k, record) in run.episode.records.iter().enumerate() {
            for snap in &record.plan.iterations {
                lines.push(TraceLine::Iteration {
                    seed: run.row.seed,
                    decision: k,
                    iteration: snap.iteration,
                    samples_used: snap.samples_used,
                    alive: snap.alive,
                    depths: snap.depths.clone(),
                    virtual_rewards: snap.virtual_rewards.clone(),
                });
                iterations += 1;
            }
            lines.push(TraceLine::Decision {
                seed: run.row.seed,
                decision: k,
                step: record.step,
                action: record.plan.action.clone(),
                samples_used: record.plan.samples_used,
                utilities: record.plan.utilities.as_ref().map(|u| u.weights().to_vec()),
                counts: record.plan.counts.clone(),
            });
            decisions += 1;
        }
    }
    lines.push(TraceLine::Summary {
        agent: agent.into(),
        environment: environment.into(),
        episodes: runs.len(),
        decisions,
        iterations,
    });
    lines
}

/// Runs `config` with tracing on and returns the trace lines.
pub fn trace(config: &RunConfig) -> Result<Vec<TraceLine>> {
    let runs = with_environment(&config.environment, Runner { config, record: true })?;
    let environment = runs
        .first()
        .map(|r| r.row.environment.clone())
        .unwrap_or_else(|| config.environment.clone());
    Ok(trace_lines(config.agent.name(), &environment, &runs))
}

/// Writes trace lines as JSON Lines.
pub fn emit_trace(lines: &[TraceLine], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        serde_json::to_writer(&mut w, line)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceLine>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l.map_err(|e| Error::io(path, e))?)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_arithmetic() {
        assert_eq!(efficiency(150000.0, 158.0).unwrap().round(), 949.0);
        assert_eq!(efficiency(4000000.0, 390.0).unwrap().round(), 10256.0);
        assert_eq!(efficiency(300.0, 300.0).unwrap(), 1.0);
        assert!(efficiency(0.0, 1.0).is_err());
        assert!(efficiency(1.0, -1.0).is_err());
        assert_eq!(format_efficiency(4000000.0 / 390.0), "x 10,256");
        assert_eq!(format_efficiency(949.37), "x 949");
        assert_eq!(format_efficiency(1.0), "x 1");
    }

    #[test]
    fn seeds_resolution() {
        let mut c = RunConfig {
            episodes: 3,
            base_seed: 10,
            ..RunConfig::default()
        };
        assert_eq!(c.seeds().unwrap(), vec![10, 11, 12]);
        c.seeds = vec![4, 5];
        assert!(c.seeds().is_err());
        c.episodes = 0;
        assert_eq!(c.seeds().unwrap(), vec![4, 5]);
    }

    #[test]
    fn unknown_names_are_config_errors() {
        let bad_env = RunConfig {
            environment: "pong".into(),
            ..RunConfig::default()
        };
        assert!(run(&bad_env).unwrap_err().is_config());
        assert!("mcts".parse::<AgentKind>().unwrap_err().is_config());
    }

    #[test]
    fn uct_on_continuous_is_rejected_up_front() {
        let c = RunConfig {
            environment: PointNavigator::NAME.into(),
            agent: AgentKind::Uct,
            ..RunConfig::default()
        };
        let err = run(&c).unwrap_err();
        assert!(matches!(err, Error::UnsupportedSpace(_)));
        assert!(err.is_config());
    }

    #[test]
    fn config_json_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"environment":"chain-trap","agent":"oracle"}"#).unwrap();
        assert_eq!(c.agent, AgentKind::Oracle);
        assert_eq!(c.fmc, FmcParams::default());
        assert_eq!(c.episodes, 10);
    }

    #[test]
    fn mismatched_seeds_rejected() {
        let a = RunConfig {
            seeds: vec![1, 2],
            episodes: 0,
            ..RunConfig::default()
        };
        let b = RunConfig {
            seeds: vec![1, 3],
            episodes: 0,
            agent: AgentKind::Uct,
            ..RunConfig::default()
        };
        assert!(compare(&a, &b).unwrap_err().is_config());
    }

    #[test]
    fn empty_trace_has_only_summary() {
        let lines = trace_lines("fmc", "chain-trap", &[]);
        assert_eq!(
            lines,
            vec![TraceLine::Summary {
                agent: "fmc".into(),
                environment: "chain-trap".into(),
                episodes: 0,
                decisions: 0,
                iterations: 0
            }]
        );
    }
}
