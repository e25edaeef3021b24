use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fmc-bench");

fn fmc_bench(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn list_envs_names_builtins() {
    let out = fmc_bench(&["list-envs"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["chain-trap", "trap-gridworld", "point-navigator"] {
        assert!(text.contains(name), "{text}");
    }

    let out = fmc_bench(&["list-envs", "--json"]);
    let descriptors: Vec<serde_json::Value> =
        stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(descriptors.len(), 3);
    assert!(descriptors[0].get("max_episode_steps").is_some());
    assert!(descriptors[0].get("observation_dim").is_some());
}

#[test]
fn run_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = fmc_bench(&[
        "run", "--env", "chain-trap", "--agent", "fmc", "--walkers", "20", "--horizon", "6", "--max-samples", "200",
        "--dt", "1", "--seeds", "0..4", "--out", out_dir,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "agent,environment,seed,total_score,steps,samples_per_step,wall_time_ms"
    );
    assert_eq!(lines.count(), 4);
    let json: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(json.len(), 4);
    assert_eq!(json[0]["agent"], "fmc");
    assert_eq!(json[0]["total_score"], 10.0);
}

#[test]
fn config_errors_exit_with_two() {
    let out = fmc_bench(&["run", "--env", "no-such-env", "--episodes", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = fmc_bench(&["run", "--env", "point-navigator", "--agent", "uct", "--episodes", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = fmc_bench(&["run", "--walkers", "0", "--episodes", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = fmc_bench(&["run", "--config", "/no/such/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_three() {
    // A bridge peer that exits right away fails the handshake at run time.
    let out = fmc_bench(&["run", "--env", "exec:true", "--episodes", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn compare_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = fmc_bench(&[
        "compare", "--env", "chain-trap", "--agents", "fmc,random", "--walkers", "20", "--horizon", "6",
        "--max-samples", "200", "--seeds", "0..5", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("fmc") && text.contains("random"), "{text}");
    assert!(dir.path().join("comparison.csv").exists());
}

#[test]
fn trace_writes_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let out = fmc_bench(&[
        "trace", "--env", "trap-gridworld", "--walkers", "10", "--horizon", "5", "--max-samples", "50",
        "--seeds", "3", "--max-steps", "5", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("trace.jsonl");
    let lines = fmc::bench::read_trace(Path::new(&path)).unwrap();
    assert!(matches!(lines.last(), Some(fmc::bench::TraceLine::Summary { .. })));
    assert!(lines.iter().any(|l| matches!(l, fmc::bench::TraceLine::Iteration { .. })));
}

#[test]
fn exec_bridge_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = fmc_bench(&[
            "run", "--env", env, "--walkers", "15", "--horizon", "6", "--max-samples", "120", "--seeds", "0..3",
            "--out", out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fmc::bench::read_csv(&out_dir.join("results.csv")).unwrap()
    };
    let local = run("chain-trap", "local");
    let remote = run(&format!("exec:{BIN} serve --env chain-trap"), "remote");
    assert_eq!(local.len(), remote.len());
    for (a, b) in local.iter().zip(&remote) {
        assert_eq!((a.seed, a.total_score, a.steps), (b.seed, b.total_score, b.steps));
        assert_eq!(a.samples_per_step, b.samples_per_step);
        assert_eq!(a.environment, b.environment);
    }
}
