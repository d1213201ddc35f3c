use zentropy_core::mdp::{Action, GridWorld};
use zentropy_core::rl::{train, ShapingConfig, TrainConfig, ZPolicy};

/// Greedy actions of the optimal Q-function of the reward "+1 on entering the
/// goal", by value iteration on the exact transition kernel.
fn value_iteration_greedy(
    g: &GridWorld,
    gamma: f64,
) -> Vec<(zentropy_core::mdp::Cell, Vec<Action>)> {
    let cells: Vec<_> = g.open_cells().collect();
    let mut v = vec![0.0; g.num_cells()];
    let q = |v: &[f64], c, a| {
        let t = g.target(c, a);
        let moved = if t == g.goal() {
            1.0
        } else {
            gamma * v[g.index(t).unwrap()]
        };
        let stay = gamma * v[g.index(c).unwrap()];
        (1.0 - g.slip()) * moved + g.slip() * stay
    };
    for _ in 0..2000 {
        let mut next = v.clone();
        for &c in &cells {
            if c != g.goal() {
                next[g.index(c).unwrap()] = Action::ALL
                    .iter()
                    .map(|&a| q(&v, c, a))
                    .fold(f64::MIN, f64::max);
            }
        }
        v = next;
    }
    cells
        .into_iter()
        .filter(|&c| c != g.goal())
        .map(|c| {
            let best = Action::ALL
                .iter()
                .map(|&a| q(&v, c, a))
                .fold(f64::MIN, f64::max);
            let arg = Action::ALL
                .into_iter()
                .filter(|&a| q(&v, c, a) > best - 1e-9)
                .collect();
            (c, arg)
        })
        .collect()
}

fn run(g: &GridWorld, beta: f64, z_policy: ZPolicy, seed: u64) -> zentropy_core::rl::TrainResult {
    let shaping = ShapingConfig {
        beta,
        horizon_k: 16,
        recompute_every: 50,
        z_policy,
    };
    let cfg = TrainConfig {
        episodes: 500,
        max_steps: 100,
        seed,
        ..TrainConfig::default()
    };
    train(g, &shaping, &cfg).unwrap()
}

#[test]
fn deterministic_corridor_learns_the_optimal_policy() {
    let g = GridWorld::corridor(5, 0.0).unwrap();
    let oracle = value_iteration_greedy(&g, 0.9);
    assert!(oracle.iter().all(|(_, arg)| arg == &vec![Action::Right]));
    for seed in 0..5 {
        let r = run(&g, 0.5, ZPolicy::CurrentGreedy, seed);
        for (c, arg) in &oracle {
            assert!(
                arg.contains(&r.greedy_action(*c).unwrap()),
                "seed {seed} cell {c}"
            );
        }
    }
}

#[test]
fn shaping_keeps_the_slippery_corridor_pointing_right() {
    let g = GridWorld::corridor(5, 0.2).unwrap();
    for z_policy in [ZPolicy::CurrentGreedy, ZPolicy::FixedUniform] {
        for seed in 0..5 {
            let r = run(&g, 0.5, z_policy, seed);
            for p in &r.greedy_policy {
                assert_eq!(
                    p.action,
                    Action::Right,
                    "{z_policy:?} seed {seed} cell {}",
                    p.cell
                );
            }
        }
    }
}

#[test]
fn zero_beta_ignores_the_shaping_settings() {
    let g = GridWorld::open(4, 0.2).unwrap();
    let a = run(&g, 0.0, ZPolicy::CurrentGreedy, 9);
    let shaping = ShapingConfig {
        beta: 0.0,
        horizon_k: 3,
        recompute_every: 7,
        z_policy: ZPolicy::FixedUniform,
    };
    let cfg = TrainConfig {
        episodes: 500,
        max_steps: 100,
        seed: 9,
        ..TrainConfig::default()
    };
    assert_eq!(a, train(&g, &shaping, &cfg).unwrap());
    assert!(a.z_snapshots.is_empty());
}

#[test]
fn training_is_reproducible() {
    let g = GridWorld::open(4, 0.2).unwrap();
    assert_eq!(
        run(&g, 0.5, ZPolicy::CurrentGreedy, 4),
        run(&g, 0.5, ZPolicy::CurrentGreedy, 4)
    );
    assert_ne!(
        run(&g, 0.5, ZPolicy::CurrentGreedy, 4).steps,
        run(&g, 0.5, ZPolicy::CurrentGreedy, 5).steps
    );
}
