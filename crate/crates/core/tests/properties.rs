use fmc::engine::{plan_step, FmcParams, Swarm};
use fmc::env::{
    Action, ActionSpace, ChainTrap, Environment, EnvironmentDescriptor, GridCell, PointNavigator, PointState,
    StepOutcome, TrapGridworld, GRID_SIZE,
};
use fmc::oracle::{exhaustive_values, oracle_best_action};
use fmc::uct::{uct_search, UctParams};
use fmc::stats::{entropic_divergence, relativize, reward_density, virtual_reward, Distribution};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn finite_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f64..1e6, 1..40)
}

proptest! {
    #[test]
    fn relativize_preserves_order(values in finite_vec()) {
        let out = relativize(&values);
        prop_assert_eq!(out.len(), values.len());
        for i in 0..values.len() {
            prop_assert!(out[i] > 0.0 && out[i].is_finite());
            for j in 0..values.len() {
                if values[i] < values[j] {
                    prop_assert!(out[i] < out[j]);
                } else if values[i] == values[j] {
                    prop_assert_eq!(out[i], out[j]);
                }
            }
        }
    }

    #[test]
    fn virtual_reward_is_elementwise(pairs in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 1..30)) {
        let (r, d): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let vr = virtual_reward(&r, &d).unwrap();
        for i in 0..r.len() {
            prop_assert_eq!(vr[i], r[i] * d[i]);
        }
    }

    #[test]
    fn reward_density_sums_to_one(rewards in prop::collection::vec(0.0f64..100.0, 1..30)) {
        prop_assume!(rewards.iter().any(|r| *r > 0.0));
        let density = reward_density(&rewards).unwrap();
        let total: f64 = density.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn divergence_of_self_is_zero(raw in prop::collection::vec(0.0f64..1.0, 1..20)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 0.0);
        let p = Distribution::new(raw.iter().map(|x| x / total).collect::<Vec<_>>());
        // Rounding can push the sum just past the tolerance only for pathological inputs.
        if let Ok(p) = p {
            prop_assert_eq!(entropic_divergence(&p, &p).unwrap(), 0.0);
        }
    }
}

#[test]
fn divergence_finite_on_two_point_grid() {
    for i in 0..=10 {
        for j in 0..=10 {
            let p = Distribution::new(vec![i as f64 / 10.0, 1.0 - i as f64 / 10.0]).unwrap();
            let q = Distribution::new(vec![j as f64 / 10.0, 1.0 - j as f64 / 10.0]).unwrap();
            assert!(entropic_divergence(&p, &q).unwrap().is_finite(), "p={p:?} q={q:?}");
        }
    }
}

fn random_action(space: &ActionSpace, rng: &mut ChaCha8Rng) -> Action {
    space.sample(rng)
}

fn replay_twice<E: Environment>(env: &E, mut state_for: impl FnMut(&mut ChaCha8Rng) -> E::State) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let state = state_for(&mut rng);
        let action = random_action(env.action_space(), &mut rng);
        let a = env.step(&state, &action).unwrap();
        let b = env.step(&state, &action).unwrap();
        assert_eq!(a.next_state, b.next_state);
        assert_eq!(a.observation.len(), env.descriptor().observation_dim);
        assert_eq!(a.observation.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                   b.observation.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(a.reward.to_bits(), b.reward.to_bits());
        assert_eq!((a.dead, a.terminal), (b.dead, b.terminal));
        if a.dead {
            let again = env.step(&a.next_state, &random_action(env.action_space(), &mut rng)).unwrap();
            assert!(again.dead);
            assert_eq!(again.reward, 0.0);
        }
    }
}

#[test]
fn builtin_environments_are_deterministic_and_absorb_death() {
    replay_twice(&ChainTrap::new(), |rng| rng.gen_range(0..=6u8));
    replay_twice(&TrapGridworld::new(), |rng| GridCell {
        x: rng.gen_range(0..GRID_SIZE),
        y: rng.gen_range(0..GRID_SIZE),
    });
    replay_twice(&PointNavigator::new(), |rng| PointState {
        x: rng.gen_range(-0.5..2.5),
        y: rng.gen_range(-1.0..1.0),
    });
}

#[test]
fn chain_trap_enumeration_is_bounded() {
    let table = exhaustive_values(&ChainTrap::new(), &3, 8).unwrap();
    // Root plus at most 2 + 4 + ... + 256 nodes.
    assert!(table.nodes <= (0..=8).map(|d| 1u64 << d).sum::<u64>());
}

/// ChainTrap with LEFT and RIGHT swapped.
struct Mirrored(ChainTrap);

impl Environment for Mirrored {
    type State = u8;
    fn descriptor(&self) -> &EnvironmentDescriptor {
        self.0.descriptor()
    }
    fn reset(&self, seed: u64) -> fmc::Result<(u8, Vec<f64>)> {
        self.0.reset(seed)
    }
    fn step(&self, s: &u8, a: &Action) -> fmc::Result<StepOutcome<u8>> {
        let flipped = Action::Discrete(1 - a.index().unwrap_or(0));
        self.0.step(s, &flipped)
    }
}

#[test]
fn oracle_is_invariant_to_action_order() {
    for pos in 1..6u8 {
        for h in 1..=6 {
            let plain = exhaustive_values(&ChainTrap::new(), &pos, h).unwrap();
            let mirrored = exhaustive_values(&Mirrored(ChainTrap::new()), &pos, h).unwrap();
            assert_eq!(plain.entries[0], mirrored.entries[1]);
            assert_eq!(plain.entries[1], mirrored.entries[0]);
            assert_eq!(plain.nodes, mirrored.nodes);
            let a = oracle_best_action(&plain).unwrap();
            let b = oracle_best_action(&mirrored).unwrap();
            // Equal values fall to the lowest index, so only strict winners must map across.
            if plain.entries[0] != plain.entries[1] {
                assert_eq!(a, 1 - b);
            }
        }
    }
}

fn params_strategy() -> impl Strategy<Value = FmcParams> {
    (1usize..40, 1u32..4, 1u32..6, 1u64..8, any::<u64>()).prop_map(|(n, dt, ticks, sweeps, seed)| FmcParams {
        n_walkers: n,
        time_horizon: (dt * ticks) as f64,
        dt,
        max_samples: n as u64 * sweeps,
        seed,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swarm_conserves_walkers(params in params_strategy(), ops in prop::collection::vec(0u8..3, 1..30)) {
        let env = TrapGridworld::new();
        let (root, obs) = env.reset(0).unwrap();
        let mut swarm = Swarm::new(root, obs, &params).unwrap();
        let mut vr = vec![1.0; params.n_walkers];
        for op in ops {
            match op {
                0 => { swarm.perturb(&env).unwrap(); }
                1 => { if let Some(v) = swarm.evaluate() { vr = v; } }
                _ => { swarm.recycle(&vr).unwrap(); }
            }
            prop_assert_eq!(swarm.walkers().len(), params.n_walkers);
            prop_assert!(swarm.walkers().iter().all(|w| w.depth <= params.depth_limit()));
            let ids: Vec<usize> = swarm.walkers().iter().map(|w| w.id).collect();
            prop_assert_eq!(ids, (0..params.n_walkers).collect::<Vec<_>>());
        }
    }

    #[test]
    fn plan_step_invariants(params in params_strategy(), env_pick in 0u8..3) {
        match env_pick {
            0 => check_plan(&ChainTrap::new(), &params)?,
            1 => check_plan(&TrapGridworld::new(), &params)?,
            _ => check_plan(&PointNavigator::new(), &params)?,
        }
    }
}

fn check_plan<E: Environment>(env: &E, params: &FmcParams) -> Result<(), TestCaseError> {
    let (root, obs) = env.reset(0).unwrap();
    let d = plan_step(env, &root, &obs, params).unwrap();
    prop_assert!(d.samples_used <= params.max_samples + params.n_walkers as u64 * params.dt as u64);
    let total: f64 = d.utilities.weights().iter().sum();
    prop_assert!((total - 1.0).abs() < 1e-9);
    let counted: usize = d.walker_counts.iter().sum();
    prop_assert!(counted <= params.n_walkers && counted > 0);
    prop_assert!(env.action_space().contains(&d.action));
    let again = plan_step(env, &root, &obs, params).unwrap();
    prop_assert_eq!(&d, &again);
    let uniform = Distribution::uniform(d.utilities.len());
    prop_assert!(entropic_divergence(&d.utilities, &uniform).unwrap().is_finite());
    Ok(())
}

#[test]
fn dead_walker_with_live_companion_always_revives() {
    let env = ChainTrap::new();
    for seed in 0..200 {
        let params = FmcParams {
            n_walkers: 8,
            time_horizon: 1.0,
            dt: 1,
            max_samples: 8,
            seed,
        };
        let mut swarm = Swarm::new(1u8, vec![1.0], &params).unwrap();
        swarm.perturb(&env).unwrap();
        let Some(vr) = swarm.evaluate() else { continue };
        let before: Vec<bool> = swarm.walkers().iter().map(|w| w.alive).collect();
        let alive_before = before.iter().filter(|a| **a).count();
        swarm.recycle(&vr).unwrap();
        let alive_after = swarm.alive_count();
        if alive_before > 0 {
            // Dead walkers clone with probability one onto live companions
            // and live walkers can only clone onto live ones.
            for (w, was_alive) in swarm.walkers().iter().zip(&before) {
                if *was_alive {
                    assert!(w.alive, "a live walker never clones onto a dead one");
                }
            }
            assert!(alive_after >= alive_before);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uct_visit_counts_add_up(budget in 1u64..400, horizon in 1u32..12, seed in any::<u64>(), c in 0.0f64..3.0) {
        let env = TrapGridworld::new();
        let params = UctParams { exploration_c: c, rollout_horizon: horizon, budget_samples: budget, seed };
        let (root, _) = env.reset(0).unwrap();
        let (decision, tree) = uct_search(&env, &root, &params).unwrap();
        prop_assert_eq!(tree.root().visit_count, decision.iterations);
        prop_assert_eq!(decision.root_visits.iter().sum::<u64>(), decision.iterations);
        for node in &tree.nodes {
            let below: u64 = node.children.values().map(|&i| tree.nodes[i].visit_count).sum();
            prop_assert!(below <= node.visit_count);
            prop_assert!(node.visit_count >= 1 || std::ptr::eq(node, tree.root()));
        }
        prop_assert!(decision.samples_used < budget + horizon as u64);
        prop_assert!(decision.action < 5);
    }
}
