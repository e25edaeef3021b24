//! `fmc-bench`: seeded episode runs, agent comparisons and swarm traces.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fmc::bench::{self, AgentKind, RunConfig};
use fmc::env::{builtin_descriptor, BUILTIN_ENVIRONMENTS};
use fmc::{Error, Result};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "fmc-bench", version, about = "Benchmark Fractal Monte Carlo against UCT, random and oracle agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded episodes and write results.csv / results.json.
    Run(RunArgs),
    /// Run two agents on the same seeds and print a score / samples-per-step table.
    Compare(CompareArgs),
    /// Run seeded episodes and write the per-iteration swarm trace as trace.jsonl.
    Trace(RunArgs),
    /// List the built-in environments.
    ListEnvs {
        /// Print descriptors as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Serve a built-in environment over the bridge protocol on stdin/stdout.
    Serve {
        #[arg(long)]
        env: String,
    },
}

/// Flags overriding fields of a JSON run config.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Environment name or bridge endpoint (tcp://host:port, exec:<command>).
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    walkers: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    max_samples: Option<u64>,
    /// Environment steps each action is repeated for.
    #[arg(long)]
    dt: Option<u32>,
    /// Comma-separated seeds or a half-open range like 0..50.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// UCT sample budget per decision.
    #[arg(long)]
    budget: Option<u64>,
    /// UCT exploration constant.
    #[arg(long)]
    exploration: Option<f64>,
    /// UCT rollout horizon.
    #[arg(long)]
    rollout_horizon: Option<u32>,
    #[arg(long)]
    oracle_horizon: Option<u32>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agent: Option<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config_a: Option<PathBuf>,
    #[arg(long)]
    config_b: Option<PathBuf>,
    /// Two agents, e.g. fmc,uct. The first is the efficiency reference.
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<String>>,
    /// Rescale the UCT budget until its measured samples per step is within 10% of the reference.
    #[arg(long)]
    match_samples: bool,
    #[command(flatten)]
    overrides: Overrides,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse seeds {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        return Ok((lo..hi).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_json_file(p),
        None => Ok(RunConfig::default()),
    }
}

fn apply(mut c: RunConfig, o: &Overrides) -> Result<RunConfig> {
    if let Some(v) = &o.env {
        c.environment = v.clone();
    }
    if let Some(v) = o.walkers {
        c.fmc.n_walkers = v;
    }
    if let Some(v) = o.horizon {
        c.fmc.time_horizon = v;
        c.uct.rollout_horizon = v.ceil() as u32;
    }
    if let Some(v) = o.max_samples {
        c.fmc.max_samples = v;
    }
    if let Some(v) = o.dt {
        c.fmc.dt = v;
    }
    if let Some(v) = &o.seeds {
        c.seeds = parse_seeds(v)?;
        c.episodes = 0;
    }
    if let Some(v) = o.episodes {
        c.episodes = v;
        if o.seeds.is_none() {
            c.seeds.clear();
        }
    }
    if let Some(v) = o.max_steps {
        c.max_steps = Some(v);
    }
    if let Some(v) = o.budget {
        c.uct.budget_samples = v;
    }
    if let Some(v) = o.exploration {
        c.uct.exploration_c = v;
    }
    if let Some(v) = o.rollout_horizon {
        c.uct.rollout_horizon = v;
    }
    if let Some(v) = o.oracle_horizon {
        c.oracle_horizon = v;
    }
    if let Some(v) = &o.out {
        c.out_dir = Some(v.clone());
    }
    Ok(c)
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut c = apply(load(args.config.as_ref())?, &args.overrides)?;
    if let Some(a) = &args.agent {
        c.agent = a.parse()?;
    }
    Ok(c)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = run_config(&args)?;
    let rows = bench::run(&config)?;
    for row in &rows {
        println!(
            "{} {} seed={} score={} steps={} samples/step={:.1} wall={:.1}ms",
            row.agent, row.environment, row.seed, row.total_score, row.steps, row.samples_per_step, row.wall_time_ms
        );
    }
    if let Some(dir) = &config.out_dir {
        eprintln!("wrote {}", dir.join("results.csv").display());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let (a, b) = match (&args.config_a, &args.config_b, &args.agents) {
        (Some(pa), Some(pb), None) => (
            apply(RunConfig::from_json_file(pa)?, &args.overrides)?,
            apply(RunConfig::from_json_file(pb)?, &args.overrides)?,
        ),
        (None, None, Some(agents)) if agents.len() == 2 => {
            let base = apply(RunConfig::default(), &args.overrides)?;
            let mut a = base.clone();
            a.agent = agents[0].parse()?;
            let mut b = base;
            b.agent = agents[1].parse()?;
            (a, b)
        }
        _ => {
            return Err(Error::Config(
                "compare needs either --config-a and --config-b, or --agents a,b".into(),
            ))
        }
    };

    let comparison = if args.match_samples {
        if b.agent != AgentKind::Uct {
            return Err(Error::Config("--match-samples needs uct as the second agent".into()));
        }
        let reference = bench::run_detailed(&a)?;
        let target = bench::AgentSummary::from_runs(a.agent.name(), &reference).mean_samples_per_step;
        let matched = bench::match_uct_budget(&b, target, 0.10, 6)?;
        eprintln!(
            "uct budget {} gives {:.1} samples/step against a target of {:.1}",
            matched.uct.budget_samples, matched.measured_samples_per_step, target
        );
        let env = reference
            .first()
            .map(|r| r.row.environment.clone())
            .unwrap_or_else(|| a.environment.clone());
        bench::compare_runs(&env, (a.agent.name(), &reference), ("uct", &matched.runs))
    } else {
        bench::compare(&a, &b)?
    };

    print!("{}", comparison.to_text());
    if let Some(dir) = a.out_dir.as_ref() {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let path = dir.join("comparison.csv");
        std::fs::write(&path, comparison.to_csv()?).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_trace(args: RunArgs) -> Result<()> {
    let config = run_config(&args)?;
    let lines = bench::trace(&config)?;
    let dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = dir.join("trace.jsonl");
    bench::emit_trace(&lines, &path)?;
    eprintln!("wrote {} ({} lines)", path.display(), lines.len());
    Ok(())
}

fn cmd_list_envs(json: bool) -> Result<()> {
    for name in BUILTIN_ENVIRONMENTS {
        let desc = builtin_descriptor(name).expect("built-in name");
        if json {
            println!("{}", serde_json::to_string(&desc)?);
        } else {
            let space = match desc.action_space.len() {
                Some(n) => format!("{n} discrete actions"),
                None => "continuous actions".to_string(),
            };
            println!(
                "{:<16} obs_dim={} max_steps={} {}",
                desc.name, desc.observation_dim, desc.max_episode_steps, space
            );
        }
    }
    Ok(())
}

fn cmd_serve(env: &str) -> Result<()> {
    use fmc::env::{ChainTrap, PointNavigator, TrapGridworld};
    let stdin = std::io::stdin().lock();
    let stdout = std::io::stdout().lock();
    match env {
        ChainTrap::NAME => fmc::bridge::serve(&ChainTrap::new(), stdin, stdout),
        TrapGridworld::NAME => fmc::bridge::serve(&TrapGridworld::new(), stdin, stdout),
        PointNavigator::NAME => fmc::bridge::serve(&PointNavigator::new(), stdin, stdout),
        other => Err(Error::Config(format!("unknown environment {other:?}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Trace(args) => cmd_trace(args),
        Command::ListEnvs { json } => cmd_list_envs(json),
        Command::Serve { env } => cmd_serve(&env),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}
