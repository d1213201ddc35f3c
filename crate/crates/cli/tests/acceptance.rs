//! Acceptance criteria 1-11, one line each. Every oracle here is computed
//! independently of the library code it checks.
//!
//! Run with `cargo test -p zentropy-cli --test acceptance`.

use std::collections::VecDeque;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zentropy_core::anomaly::{
    regime_shift_stream, replay, uniform_stream, Detector, DetectorConfig,
};
use zentropy_core::bayes::{
    expected_event_potential, mutual_information, realized_event_potential, GridPosterior,
    ObservationModel, Outcome, QueryCandidate,
};
use zentropy_core::entropy::{joint_product, plugin_entropy, renyi_entropy, shannon_entropy};
use zentropy_core::markov::{Intervention, MarkovChain};
use zentropy_core::mdp::{action_z_scores, Action, Cell, GridModel, GridWorld, Policy};
use zentropy_core::potential::{derive_seed, z_counterfactual, z_pre_post};
use zentropy_core::rl::{train, ShapingConfig, TrainConfig, TrainResult, ZPolicy};
use zentropy_core::{
    Baseline, Distribution, EstimatorConfig, Event, Horizon, SampleCounts, SystemModel,
};

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn h(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn random_law(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < zero_prob {
                0.0
            } else {
                rng.random_range(0.01..1.0)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Law after `k` steps of `p` under the row-stochastic matrix `t`.
fn propagate(t: &[Vec<f64>], p: &[f64], k: u64) -> Vec<f64> {
    let mut p = p.to_vec();
    for _ in 0..k {
        let mut next = vec![0.0; p.len()];
        for (i, &m) in p.iter().enumerate() {
            for (j, &q) in t[i].iter().enumerate() {
                next[j] += m * q;
            }
        }
        p = next;
    }
    p
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let exact = EstimatorConfig::exact();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=64);
        let next: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let chain =
            MarkovChain::deterministic(next, rng.random_range(0..n)).map_err(|e| e.to_string())?;
        let hz = Horizon::steps(rng.random_range(1..=10)).unwrap();
        let events = chain.event_space();
        let a = &events[rng.random_range(0..events.len())];
        let pre = z_pre_post(&chain, a, &hz, &exact).map_err(|e| e.to_string())?;
        worst = worst.max(pre.value.abs());
        let rest: Vec<Event> = events.iter().filter(|e| e.id != a.id).cloned().collect();
        if !rest.is_empty() {
            let cf = z_counterfactual(&chain, a, &Baseline::uniform(rest).unwrap(), &hz, &exact)
                .map_err(|e| e.to_string())?;
            worst = worst.max(cf.value.abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max |Z| = {worst:e}"))?;
    Ok(format!("50 models, max |Z| = {worst:e}"))
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let exact = EstimatorConfig::exact();
    let mut worst_reduction: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=64);
        let t: Vec<Vec<f64>> = (0..n).map(|_| random_law(&mut rng, n, 0.5)).collect();
        let initial = random_law(&mut rng, n, 0.3);
        let reset = random_law(&mut rng, n, 0.3);
        let clamp = rng.random_range(0..n);
        let chain = MarkovChain::new(
            t.clone(),
            initial.clone(),
            vec![
                (Event::new("reset", ""), Intervention::Reset(reset.clone())),
                (Event::new("clamp", ""), Intervention::Clamp(clamp)),
                (Event::new("randomize", ""), Intervention::Randomize),
            ],
        )
        .map_err(|e| e.to_string())?;
        let k = rng.random_range(1..=6);
        let hz = Horizon::steps(k).unwrap();
        let h_before = h(&propagate(&t, &initial, k));
        let mut point = vec![0.0; n];
        point[clamp] = 1.0;
        for (id, start) in [
            ("reset", reset),
            ("clamp", point),
            ("randomize", vec![1.0 / n as f64; n]),
        ] {
            let e = Event::new(id, "");
            let pre = z_pre_post(&chain, &e, &hz, &exact).map_err(|e| e.to_string())?;
            let cf = z_counterfactual(&chain, &e, &Baseline::null(), &hz, &exact)
                .map_err(|e| e.to_string())?;
            worst_reduction = worst_reduction.max((cf.value - pre.value).abs());
            worst_oracle =
                worst_oracle.max((pre.value - (h(&propagate(&t, &start, k)) - h_before)).abs());
        }
    }
    ensure(worst_reduction <= 1e-12, || {
        format!("null-baseline gap {worst_reduction:e}")
    })?;
    ensure(worst_oracle <= 1e-12, || {
        format!("gap to independent push-forward {worst_oracle:e}")
    })?;
    Ok(format!(
        "50 models, max gap {worst_reduction:e}, max gap to independent oracle {worst_oracle:e}"
    ))
}

fn criterion_3() -> Verdict {
    const N: usize = 100_000;
    const TRIALS: u64 = 100;
    let chain = MarkovChain::two_state_flip(0.3, vec![0.9, 0.1]).unwrap();
    let chain_event = Event::new("clamp-1", "");
    let chain_hz = Horizon::steps(3).unwrap();
    // exact values from the closed-form two-state recursion
    let after_one = |p1: f64| p1 * 0.7 + (1.0 - p1) * 0.3;
    let p_after = after_one(after_one(after_one(1.0)));
    let p_before = after_one(after_one(after_one(0.1)));
    let chain_exact = h(&[p_after, 1.0 - p_after]) - h(&[p_before, 1.0 - p_before]);

    let g = GridWorld::corridor(5, 0.2).unwrap();
    let right = Policy::always(&g, Action::Right);
    let model =
        GridModel::new(&g, Cell::new(3, 0), &right, &[Action::Left, Action::Right]).unwrap();
    let corridor_hz = Horizon::steps(2).unwrap();
    let corridor_exact = h(&[0.96, 0.04]) - h(&[0.68, 0.16, 0.16]);
    let baseline = Baseline::uniform(vec![model.event(Action::Left)]).unwrap();

    let mut summary = Vec::new();
    for name in ["chain", "corridor"] {
        let mut good = 0;
        let mut worst: f64 = 0.0;
        for trial in 0..TRIALS {
            let est = EstimatorConfig::monte_carlo(N, derive_seed(0xACCE, trial));
            let (z, exact) = if name == "chain" {
                (
                    z_pre_post(&chain, &chain_event, &chain_hz, &est),
                    chain_exact,
                )
            } else {
                (
                    z_counterfactual(
                        &model,
                        &model.event(Action::Right),
                        &baseline,
                        &corridor_hz,
                        &est,
                    ),
                    corridor_exact,
                )
            };
            let z = z.map_err(|e| e.to_string())?;
            let err = (z.value - exact).abs();
            worst = worst.max(err);
            if err <= 0.02 && err <= 3.0 * z.std_error {
                good += 1;
            }
        }
        ensure(good >= 99, || {
            format!("{name}: only {good}/{TRIALS} trials within tolerance")
        })?;
        summary.push(format!("{name} {good}/{TRIALS} (max err {worst:.4})"));
    }
    Ok(summary.join(", "))
}

fn criterion_4() -> Verdict {
    let g = GridWorld::corridor(5, 0.2).unwrap();
    let right = Policy::always(&g, Action::Right);
    let scores = action_z_scores(
        &g,
        Cell::new(3, 0),
        &right,
        2,
        &EstimatorConfig::exact(),
        &[Action::Left, Action::Right],
    )
    .map_err(|e| e.to_string())?;
    let z = |a: Action| scores.iter().find(|(b, _)| *b == a).unwrap().1.value;
    let (r, l) = (z(Action::Right), z(Action::Left));
    ensure((r + 0.982).abs() <= 0.001, || format!("Z(right) = {r}"))?;
    ensure((l - 0.982).abs() <= 0.001, || format!("Z(left) = {l}"))?;
    let hand = h(&[0.96, 0.04]) - h(&[0.68, 0.16, 0.16]);
    ensure((r - hand).abs() < 1e-12, || {
        format!("Z(right) = {r}, hand push-forward {hand}")
    })?;
    Ok(format!("Z(right) = {r:.6}, Z(left) = {l:+.6}"))
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=60);
        let prior = GridPosterior::new(
            GridPosterior::equally_spaced(n),
            random_law(&mut rng, n, 0.2),
        )
        .map_err(|e| e.to_string())?;
        let model = match rng.random_range(0..3) {
            0 => ObservationModel::Coin,
            1 => ObservationModel::NoisyCoin {
                flip: rng.random_range(0.0..0.5),
            },
            _ => ObservationModel::Uninformative {
                p_heads: rng.random(),
            },
        };
        let q = QueryCandidate::new("q", model);
        let z = expected_event_potential(&prior, &q)
            .map_err(|e| e.to_string())?
            .value;
        let mi = mutual_information(&prior, &q)
            .map_err(|e| e.to_string())?
            .bits();
        worst = worst.max((z + mi).abs());
    }
    ensure(worst <= 1e-9, || format!("max |EZ + MI| = {worst:e}"))?;
    // 11-point uniform prior, one flip: every posterior after one outcome is
    // proportional to theta (or 1 - theta) on the grid
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let post: Vec<f64> = grid.iter().map(|t| t / 5.5).collect();
    let golden = h(&post) - (11f64).log2();
    let z = expected_event_potential(
        &GridPosterior::uniform(11).unwrap(),
        &QueryCandidate::new("flip", ObservationModel::Coin),
    )
    .map_err(|e| e.to_string())?
    .value;
    ensure((z + 0.3557).abs() <= 1e-4, || format!("11-point Z = {z}"))?;
    ensure((z - golden).abs() < 1e-12, || {
        format!("11-point Z = {z}, oracle {golden}")
    })?;
    Ok(format!(
        "200 priors, max |EZ + MI| = {worst:e}; 11-point Z = {z:.4}"
    ))
}

fn criterion_6() -> Verdict {
    let prior = GridPosterior::new(vec![0.5, 0.9, 1.0], vec![0.05, 0.05, 0.9])
        .map_err(|e| e.to_string())?;
    let z = realized_event_potential(&prior, &ObservationModel::Coin, Outcome::Tails)
        .map_err(|e| e.to_string())?
        .value;
    // by hand: tails has likelihood 0.5, 0.1, 0 on the grid
    let post = [0.025 / 0.03, 0.005 / 0.03, 0.0];
    let oracle = h(&post) - h(&[0.05, 0.05, 0.9]);
    ensure(z > 0.0, || format!("realized Z = {z}"))?;
    ensure((z - oracle).abs() < 1e-12, || {
        format!("realized Z = {z}, oracle {oracle}")
    })?;
    Ok(format!(
        "confident two-headed prior, tails observed: Z = {z:+.4} bits"
    ))
}

/// Plain epsilon-greedy Q-learning written from scratch: per step one uniform
/// for exploration, one index draw when exploring (or when the greedy set has
/// ties), one uniform for the slip.
fn reference_learner(
    g: &GridWorld,
    cfg: &TrainConfig,
) -> (Vec<f64>, Vec<usize>, Vec<(Cell, Action)>) {
    let (w, hgt) = (g.width(), g.height());
    let goal = g.goal();
    let open = |c: Cell| !g.is_wall(c).unwrap();
    let moved = |c: Cell, a: Action| {
        let (x, y) = (c.x as i64, c.y as i64);
        let (nx, ny) = match a {
            Action::Up => (x, y - 1),
            Action::Down => (x, y + 1),
            Action::Left => (x - 1, y),
            Action::Right => (x + 1, y),
        };
        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= hgt as i64 {
            return c;
        }
        let n = Cell::new(nx as u32, ny as u32);
        if open(n) {
            n
        } else {
            c
        }
    };
    let idx = |c: Cell| (c.y * w + c.x) as usize;
    let mut q = vec![[0.0f64; 4]; (w * hgt) as usize];
    let argmax = |row: &[f64; 4]| {
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..4).filter(|&i| row[i] == best).collect::<Vec<_>>()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut returns, mut steps) = (Vec::new(), Vec::new());
    for _ in 0..cfg.episodes {
        let mut s = g.start();
        let (mut ret, mut n) = (0.0, 0);
        while n < cfg.max_steps && s != goal {
            let u: f64 = rng.random();
            let a = if u < cfg.epsilon {
                rng.random_range(0..4)
            } else {
                let ties = argmax(&q[idx(s)]);
                if ties.len() == 1 {
                    ties[0]
                } else {
                    ties[rng.random_range(0..ties.len())]
                }
            };
            let action = Action::ALL[a];
            let slip: f64 = rng.random();
            let next = if slip < g.slip() { s } else { moved(s, action) };
            let r = if next == goal { 1.0 } else { 0.0 };
            let target = r + cfg.gamma
                * q[idx(next)]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
            let old = q[idx(s)][a];
            q[idx(s)][a] = (1.0 - cfg.alpha) * old + cfg.alpha * target;
            ret += r;
            n += 1;
            s = next;
        }
        returns.push(ret);
        steps.push(n);
    }
    let policy = (0..hgt)
        .flat_map(|y| (0..w).map(move |x| Cell::new(x, y)))
        .filter(|&c| open(c) && c != goal)
        .map(|c| (c, Action::ALL[argmax(&q[idx(c)])[0]]))
        .collect();
    (returns, steps, policy)
}

fn render_run(
    returns: &[f64],
    steps: &[usize],
    intrinsic: &[f64],
    policy: &[(Cell, Action)],
) -> Vec<u8> {
    let mut out = String::new();
    for i in 0..returns.len() {
        out.push_str(&format!(
            "{i},{:?},{},{:?}\n",
            returns[i], steps[i], intrinsic[i]
        ));
    }
    for (c, a) in policy {
        out.push_str(&format!("{},{},{a}\n", c.x, c.y));
    }
    out.into_bytes()
}

fn criterion_7() -> Verdict {
    let mut checked = 0;
    for (g, seed) in [
        (GridWorld::open(5, 0.2).unwrap(), 7u64),
        (GridWorld::corridor(6, 0.3).unwrap(), 8),
        (
            GridWorld::new(&zentropy_core::mdp::GridSpec {
                width: 4,
                height: 4,
                walls: vec![Cell::new(1, 1), Cell::new(2, 1), Cell::new(1, 2)],
                goal: Cell::new(3, 3),
                start: Cell::new(0, 0),
                slip: 0.1,
            })
            .unwrap(),
            9,
        ),
    ] {
        let cfg = TrainConfig {
            episodes: 300,
            seed,
            ..TrainConfig::default()
        };
        // shaping parameters must not matter once beta is zero
        let shaping = ShapingConfig {
            beta: 0.0,
            horizon_k: 5,
            recompute_every: 3,
            z_policy: ZPolicy::CurrentGreedy,
        };
        let r = train(&g, &shaping, &cfg).map_err(|e| e.to_string())?;
        let ours = render_run(
            &r.returns,
            &r.steps,
            &r.mean_intrinsic,
            &r.greedy_policy
                .iter()
                .map(|p| (p.cell, p.action))
                .collect::<Vec<_>>(),
        );
        let (ret, steps, policy) = reference_learner(&g, &cfg);
        let reference = render_run(&ret, &steps, &vec![0.0; ret.len()], &policy);
        ensure(ours == reference, || {
            format!("seed {seed}: output differs from the reference learner")
        })?;
        checked += ours.len();
    }
    Ok(format!("3 grids, {checked} bytes identical"))
}

fn bfs_shortest(g: &GridWorld) -> usize {
    let mut dist = vec![usize::MAX; g.num_cells()];
    let at = |c: Cell| (c.y * g.width() + c.x) as usize;
    let mut queue = VecDeque::from([g.start()]);
    dist[at(g.start())] = 0;
    while let Some(c) = queue.pop_front() {
        for (dx, dy) in [(0i64, -1i64), (0, 1), (-1, 0), (1, 0)] {
            let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
            if x < 0 || y < 0 || x >= g.width() as i64 || y >= g.height() as i64 {
                continue;
            }
            let n = Cell::new(x as u32, y as u32);
            if !g.is_wall(n).unwrap() && dist[at(n)] == usize::MAX {
                dist[at(n)] = dist[at(c)] + 1;
                queue.push_back(n);
            }
        }
    }
    dist[at(g.goal())]
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn criterion_8() -> Verdict {
    let g = GridWorld::open(5, 0.2).unwrap();
    let shortest = bfs_shortest(&g);
    let bound = (shortest + 4) as f64;
    let cfg = TrainConfig {
        episodes: 2000,
        max_steps: 200,
        epsilon: 0.1,
        alpha: 0.5,
        gamma: 0.9,
        seed: 2024,
    };
    let mut parts = Vec::new();
    for beta in [0.0, 0.5] {
        let shaping = ShapingConfig {
            beta,
            horizon_k: 16,
            recompute_every: 50,
            z_policy: ZPolicy::FixedUniform,
        };
        let r: TrainResult = train(&g, &shaping, &cfg).map_err(|e| e.to_string())?;
        let m = median(r.steps[r.steps.len() - 100..].to_vec());
        ensure(m <= bound, || {
            format!("beta={beta}: median steps {m} > {bound}")
        })?;
        parts.push(format!("beta={beta}: median {m}"));
    }
    Ok(format!(
        "shortest path {shortest}, bound {bound}; {}",
        parts.join(", ")
    ))
}

fn criterion_9() -> Verdict {
    let cfg = DetectorConfig::default();
    let mut latest = 0;
    for seed in 0..20 {
        let stream = regime_shift_stream(seed, 500, 500, 0.0, 4.0);
        let scores = replay(&stream, &cfg).map_err(|e| e.to_string())?;
        let hit = scores[500..=510]
            .iter()
            .find(|s| s.flagged)
            .map(|s| s.index);
        let Some(i) = hit else {
            return Err(format!("seed {seed}: no flag in [500, 510]"));
        };
        latest = latest.max(i);

        let mut det = Detector::new(cfg).map_err(|e| e.to_string())?;
        for s in &scores {
            let o = det.ingest(s.value);
            let same = o.index == s.index
                && o.bin == s.bin
                && o.flagged == s.flagged
                && o.z.value.to_bits() == s.z.value.to_bits()
                && o.rolling_mean.to_bits() == s.rolling_mean.to_bits()
                && o.rolling_std.to_bits() == s.rolling_std.to_bits();
            ensure(same, || {
                format!("seed {seed}: online and replay differ at {}", s.index)
            })?;
        }
    }
    let mut worst_rate: f64 = 0.0;
    for seed in 0..5 {
        let stream = uniform_stream(100 + seed, 10_000, 0.0, 4.0);
        let flags = replay(&stream, &cfg)
            .map_err(|e| e.to_string())?
            .iter()
            .filter(|s| s.flagged)
            .count();
        worst_rate = worst_rate.max(flags as f64 / 10_000.0);
    }
    ensure(worst_rate <= 0.02, || {
        format!("stationary flag rate {worst_rate}")
    })?;
    Ok(format!(
        "20/20 shifts flagged by index {latest}, stationary rate <= {:.2}%, online == replay bitwise",
        100.0 * worst_rate
    ))
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checks = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=40);
        let p = random_law(&mut rng, n, 0.2);
        let d = Distribution::new((0..n).collect(), p.clone()).map_err(|e| e.to_string())?;
        let hd = shannon_entropy(&d).bits();
        ensure(
            hd >= 0.0 && hd <= (d.support_size() as f64).log2() + 1e-9,
            || format!("bounds: H = {hd}"),
        )?;

        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let permuted: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let hp = shannon_entropy(&Distribution::new((0..n).collect(), permuted).unwrap()).bits();
        ensure((hp - hd).abs() < 1e-9, || {
            format!("permutation: {hp} vs {hd}")
        })?;

        let m = rng.random_range(1..=10);
        let e = Distribution::new((0..m).collect(), random_law(&mut rng, m, 0.2)).unwrap();
        let hj = shannon_entropy(&joint_product(&d, &e)).bits();
        let he = shannon_entropy(&e).bits();
        ensure((hj - hd - he).abs() < 1e-9, || {
            format!("additivity: {hj} vs {}", hd + he)
        })?;

        for alpha in [1.0 - 1e-6, 1.0 + 1e-6] {
            let hr = renyi_entropy(&d, alpha).map_err(|e| e.to_string())?.bits();
            ensure((hr - hd).abs() < 1e-4, || {
                format!("Renyi limit: {hr} vs {hd}")
            })?;
        }
        checks += 1;
    }
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let k = 2 + 3 * trial;
        let p = random_law(&mut rng, k, 0.0);
        let cdf: Vec<f64> = p
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        let counts: SampleCounts<usize> = (0..100_000)
            .map(|_| {
                let u: f64 = rng.random();
                cdf.iter().position(|&c| u < c).unwrap_or(k - 1)
            })
            .collect();
        let est = plugin_entropy(&counts).map_err(|e| e.to_string())?.bits();
        worst = worst.max((est - h(&p)).abs());
    }
    ensure(worst <= 0.01, || {
        format!("plug-in error {worst} at N = 100000")
    })?;
    Ok(format!(
        "{checks} random laws; plug-in max error {worst:.5} bits at N = 100000"
    ))
}

fn run_bin(args: &[&str], stdin: Option<&Path>) -> Result<std::process::Output, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zentropy"));
    cmd.args(args).env_remove("ZENTROPY_OUT");
    if let Some(p) = stdin {
        cmd.stdin(Stdio::from(
            std::fs::File::open(p).map_err(|e| e.to_string())?,
        ));
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn criterion_11() -> Verdict {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let p = |name: &str| presets.join(name).to_string_lossy().into_owned();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: Vec<(&str, Vec<String>, Option<std::path::PathBuf>)> = vec![
        (
            "gridworld",
            vec!["--config".into(), p("corridor.json")],
            None,
        ),
        (
            "gridworld",
            vec!["--config".into(), p("gridworld_open.json")],
            None,
        ),
        (
            "train",
            vec!["--config".into(), p("train_corridor.json")],
            None,
        ),
        (
            "train",
            vec![
                "--config".into(),
                p("train_grid.json"),
                "--seed".into(),
                "9".into(),
            ],
            None,
        ),
        ("bayes", vec!["--config".into(), p("bayes.json")], None),
        (
            "anomaly",
            vec![
                "--config".into(),
                p("anomaly.json"),
                "--input".into(),
                p("regime_shift.txt"),
            ],
            None,
        ),
        (
            "anomaly",
            vec!["--config".into(), p("anomaly.json")],
            Some(presets.join("regime_shift.txt")),
        ),
    ];
    let mut files = 0;
    for (i, (sub, args, stdin)) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        let mut reports = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{i}-{rep}"));
            let dir_s = dir.to_string_lossy().into_owned();
            let mut full = vec![*sub];
            full.extend(args.iter().map(String::as_str));
            full.extend(["--out", &dir_s]);
            run_bin(&full, stdin.as_deref())?;
            outputs.push(dir_bytes(&dir)?);
            reports.push(run_bin(&["report", &dir_s], None)?.stdout);
        }
        ensure(!outputs[0].is_empty(), || {
            format!("{sub} run {i} wrote nothing")
        })?;
        ensure(outputs[0] == outputs[1], || {
            format!("{sub} run {i}: outputs differ between runs")
        })?;
        ensure(reports[0] == reports[1], || {
            format!("{sub} run {i}: reports differ between runs")
        })?;
        files += outputs[0].len();
    }
    Ok(format!(
        "{} invocations x2, {files} files and all reports byte-identical",
        runs.len()
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Verdict,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "deterministic models have zero potential",
            budget: Duration::from_secs(1),
            check: criterion_1,
        },
        Criterion {
            id: 2,
            name: "null-baseline counterfactual equals pre/post",
            budget: Duration::from_secs(1),
            check: criterion_2,
        },
        Criterion {
            id: 3,
            name: "Monte Carlo agrees with exact",
            budget: Duration::from_secs(30),
            check: criterion_3,
        },
        Criterion {
            id: 4,
            name: "corridor golden values",
            budget: Duration::from_secs(1),
            check: criterion_4,
        },
        Criterion {
            id: 5,
            name: "expected Z = -mutual information",
            budget: Duration::from_secs(5),
            check: criterion_5,
        },
        Criterion {
            id: 6,
            name: "a realized Z can be positive",
            budget: Duration::from_secs(1),
            check: criterion_6,
        },
        Criterion {
            id: 7,
            name: "beta=0 equals the vanilla learner",
            budget: Duration::from_secs(10),
            check: criterion_7,
        },
        Criterion {
            id: 8,
            name: "learning reaches near-shortest paths",
            budget: Duration::from_secs(60),
            check: criterion_8,
        },
        Criterion {
            id: 9,
            name: "anomaly detection",
            budget: Duration::from_secs(30),
            check: criterion_9,
        },
        Criterion {
            id: 10,
            name: "entropy properties",
            budget: Duration::from_secs(30),
            check: criterion_10,
        },
        Criterion {
            id: 11,
            name: "CLI determinism",
            budget: Duration::from_secs(90),
            check: criterion_11,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(_) if elapsed > c.budget => ("FAIL", format!("over time budget {:?}", c.budget)),
            Ok(d) => ("PASS", d),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status} [{:>7.2}s / {:>3}s] {}: {detail}",
            c.id,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            c.name
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
