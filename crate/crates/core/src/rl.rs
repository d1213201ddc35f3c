//! Tabular Q-learning on the grid-world with entropic-potential shaping.
//!
//! The per-step reward is `r_env - beta * Z(s, a)`, where `Z(s, a)` is the
//! exact entropic potential of taking `a` in `s` against the uniform mix of the
//! other three actions. `Z` values are cached per (cell, action) and refreshed
//! every `recompute_every` episodes. With `beta = 0` the `Z` machinery is
//! skipped entirely and the learner is plain epsilon-greedy Q-learning.
//!
//! Random stream, per step: one uniform for the epsilon test, then either one
//! uniform action index (explore) or one index among tied greedy actions when
//! there is more than one, then the transition uniform from
//! [`GridWorld::sample_step`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{action_z_scores, Action, Cell, GridWorld, MdpError, Policy};
use crate::potential::{derive_seed, EstimatorConfig, ZEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("invalid hyperparameter `{name}`: {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },

    #[error(transparent)]
    Mdp(#[from] MdpError),
}

pub type Result<T> = std::result::Result<T, RlError>;

fn check(name: &'static str, value: f64, ok: bool) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(RlError::InvalidHyperparameter { name, value })
    }
}

/// `r_env - beta * z`: uncertainty-reducing moves earn a bonus, the others a
/// penalty.
pub fn shaped_reward(r_env: f64, z: &ZEstimate, beta: f64) -> f64 {
    shape(r_env, z.value, beta)
}

fn shape(r_env: f64, z: f64, beta: f64) -> f64 {
    r_env - beta * z
}

/// Action values for every cell of a grid, walls included (and never read).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QTable {
    width: u32,
    values: Vec<[f64; 4]>,
}

impl QTable {
    pub fn zeros(g: &GridWorld) -> Self {
        Self {
            width: g.width(),
            values: vec![[0.0; 4]; g.num_cells()],
        }
    }

    fn idx(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub fn get(&self, c: Cell, a: Action) -> f64 {
        self.values[self.idx(c)][a.index()]
    }

    pub fn set(&mut self, c: Cell, a: Action, v: f64) {
        let i = self.idx(c);
        self.values[i][a.index()] = v;
    }

    pub fn row(&self, c: Cell) -> [f64; 4] {
        self.values[self.idx(c)]
    }

    pub fn max_value(&self, c: Cell) -> f64 {
        self.row(c).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Actions attaining the maximum, in [`Action::ALL`] order.
    pub fn argmax_set(&self, c: Cell) -> Vec<Action> {
        let row = self.row(c);
        let best = self.max_value(c);
        Action::ALL
            .into_iter()
            .filter(|a| row[a.index()] == best)
            .collect()
    }

    /// Greedy action, first in [`Action::ALL`] order on ties.
    pub fn greedy(&self, c: Cell) -> Action {
        self.argmax_set(c)[0]
    }

    /// `q(s,a) <- (1-alpha) q(s,a) + alpha (r + gamma max_a' q(s',a'))`.
    pub fn update(&mut self, s: Cell, a: Action, reward: f64, next: Cell, alpha: f64, gamma: f64) {
        let target = reward + gamma * self.max_value(next);
        let old = self.get(s, a);
        self.set(s, a, (1.0 - alpha) * old + alpha * target);
    }

    /// Greedy policy that splits mass evenly over tied actions.
    pub fn greedy_policy(&self, g: &GridWorld) -> Policy {
        self.epsilon_greedy_policy(g, 0.0)
    }

    /// Greedy policy mixed with a uniform action draw of weight `epsilon`.
    pub fn epsilon_greedy_policy(&self, g: &GridWorld, epsilon: f64) -> Policy {
        let rows = |c: Cell| {
            let ties = self.argmax_set(c);
            let mut row = [epsilon / 4.0; 4];
            for a in &ties {
                row[a.index()] += (1.0 - epsilon) / ties.len() as f64;
            }
            row
        };
        Policy::from_fn(g, rows).expect("mixture rows are normalized")
    }
}

/// Functional form of [`QTable::update`].
pub fn q_update(
    q: &QTable,
    s: Cell,
    a: Action,
    r_shaped: f64,
    next: Cell,
    alpha: f64,
    gamma: f64,
) -> QTable {
    let mut out = q.clone();
    out.update(s, a, r_shaped, next, alpha, gamma);
    out
}

/// Follow-on behavior assumed inside `Z` while training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZPolicy {
    CurrentGreedy,
    FixedUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapingConfig {
    pub beta: f64,
    pub horizon_k: u64,
    pub recompute_every: usize,
    pub z_policy: ZPolicy,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self {
            beta: 0.0,
            horizon_k: 16,
            recompute_every: 50,
            z_policy: ZPolicy::CurrentGreedy,
        }
    }
}

impl ShapingConfig {
    pub fn validate(&self) -> Result<()> {
        check("beta", self.beta, self.beta >= 0.0)?;
        check("horizon_k", self.horizon_k as f64, self.horizon_k >= 1)?;
        check(
            "recompute_every",
            self.recompute_every as f64,
            self.recompute_every >= 1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 500,
            max_steps: 200,
            epsilon: 0.1,
            alpha: 0.5,
            gamma: 0.9,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        check("max_steps", self.max_steps as f64, self.max_steps >= 1)?;
        check("epsilon", self.epsilon, (0.0..=1.0).contains(&self.epsilon))?;
        check("alpha", self.alpha, self.alpha > 0.0 && self.alpha <= 1.0)?;
        check("gamma", self.gamma, (0.0..=1.0).contains(&self.gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZEntry {
    pub cell: Cell,
    pub action: Action,
    pub z: f64,
}

/// Cached `Z` table as it stood from `episode` on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZSnapshot {
    pub episode: usize,
    pub entries: Vec<ZEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyEntry {
    pub cell: Cell,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainResult {
    /// Undiscounted environment return per episode.
    pub returns: Vec<f64>,
    pub steps: Vec<usize>,
    /// Mean intrinsic term `-beta * Z` per step, per episode.
    pub mean_intrinsic: Vec<f64>,
    /// Greedy action in every open non-goal cell after training.
    pub greedy_policy: Vec<PolicyEntry>,
    pub z_snapshots: Vec<ZSnapshot>,
}

impl TrainResult {
    pub fn episodes(&self) -> usize {
        self.returns.len()
    }

    pub fn greedy_action(&self, c: Cell) -> Option<Action> {
        self.greedy_policy
            .iter()
            .find(|p| p.cell == c)
            .map(|p| p.action)
    }
}

fn z_table(g: &GridWorld, follow: &Policy, k: u64) -> Result<Vec<[f64; 4]>> {
    let mut table = vec![[0.0; 4]; g.num_cells()];
    let exact = EstimatorConfig::exact();
    for c in g.open_cells() {
        if c == g.goal() {
            continue;
        }
        let slot = &mut table[(c.y * g.width() + c.x) as usize];
        for (a, z) in action_z_scores(g, c, follow, k, &exact, &Action::ALL)? {
            slot[a.index()] = z.value;
        }
    }
    Ok(table)
}

fn snapshot(g: &GridWorld, table: &[[f64; 4]], episode: usize) -> ZSnapshot {
    let entries = g
        .open_cells()
        .filter(|&c| c != g.goal())
        .flat_map(|c| {
            let row = table[(c.y * g.width() + c.x) as usize];
            Action::ALL.into_iter().map(move |a| ZEntry {
                cell: c,
                action: a,
                z: row[a.index()],
            })
        })
        .collect();
    ZSnapshot { episode, entries }
}

fn choose_action<R: Rng + ?Sized>(q: &QTable, s: Cell, epsilon: f64, rng: &mut R) -> Action {
    let u: f64 = rng.random();
    if u < epsilon {
        return Action::ALL[rng.random_range(0..4)];
    }
    let ties = q.argmax_set(s);
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Epsilon-greedy Q-learning from `g.start()`; reward `+1` on reaching the
/// goal, 0 otherwise, plus the shaping term. Episodes end at the goal or after
/// `max_steps` moves. Fully determined by `train.seed`.
pub fn train(g: &GridWorld, shaping: &ShapingConfig, train: &TrainConfig) -> Result<TrainResult> {
    shaping.validate()?;
    train.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
    let mut q = QTable::zeros(g);
    let shaped = shaping.beta > 0.0;
    let mut z_cache: Vec<[f64; 4]> = Vec::new();
    let mut result = TrainResult {
        returns: Vec::with_capacity(train.episodes),
        steps: Vec::with_capacity(train.episodes),
        mean_intrinsic: Vec::with_capacity(train.episodes),
        greedy_policy: Vec::new(),
        z_snapshots: Vec::new(),
    };

    for episode in 0..train.episodes {
        if shaped && episode % shaping.recompute_every == 0 {
            let follow = match shaping.z_policy {
                ZPolicy::CurrentGreedy => q.epsilon_greedy_policy(g, train.epsilon),
                ZPolicy::FixedUniform => Policy::uniform(g),
            };
            z_cache = z_table(g, &follow, shaping.horizon_k)?;
            result.z_snapshots.push(snapshot(g, &z_cache, episode));
        }

        let mut s = g.start();
        let mut env_return = 0.0;
        let mut intrinsic_sum = 0.0;
        let mut steps = 0;
        while steps < train.max_steps && s != g.goal() {
            let a = choose_action(&q, s, train.epsilon, &mut rng);
            let next = g.sample_step(s, a, &mut rng);
            let r_env = if next == g.goal() { 1.0 } else { 0.0 };
            let reward = if shaped {
                let z = z_cache[(s.y * g.width() + s.x) as usize][a.index()];
                let r = shape(r_env, z, shaping.beta);
                intrinsic_sum += r - r_env;
                r
            } else {
                r_env
            };
            q.update(s, a, reward, next, train.alpha, train.gamma);
            env_return += r_env;
            steps += 1;
            s = next;
        }
        result.returns.push(env_return);
        result.steps.push(steps);
        result.mean_intrinsic.push(if steps > 0 {
            intrinsic_sum / steps as f64
        } else {
            0.0
        });
    }

    result.greedy_policy = g
        .open_cells()
        .filter(|&c| c != g.goal())
        .map(|c| PolicyEntry {
            cell: c,
            action: q.greedy(c),
        })
        .collect();
    Ok(result)
}

/// Policy with the trained greedy actions; the goal cell keeps a uniform row.
pub fn policy_from_result(g: &GridWorld, result: &TrainResult) -> Policy {
    Policy::deterministic(g, |c| result.greedy_action(c).unwrap_or(Action::Up))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyStats {
    pub mean_return: f64,
    pub mean_steps: f64,
}

/// Rollout statistics of `policy` from `g.start()`. Episode `i` uses its own
/// seed stream derived from `seed`, so episodes are independent of order.
pub fn evaluate_policy(
    g: &GridWorld,
    policy: &Policy,
    n_episodes: usize,
    max_steps: usize,
    seed: u64,
) -> PolicyStats {
    if n_episodes == 0 {
        return PolicyStats {
            mean_return: 0.0,
            mean_steps: 0.0,
        };
    }
    let mut total_return = 0.0;
    let mut total_steps = 0usize;
    for episode in 0..n_episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, episode as u64));
        let mut s = g.start();
        let mut steps = 0;
        while steps < max_steps && s != g.goal() {
            let a = policy.sample(g, s, &mut rng);
            s = g.sample_step(s, a, &mut rng);
            steps += 1;
        }
        if s == g.goal() {
            total_return += 1.0;
        }
        total_steps += steps;
    }
    PolicyStats {
        mean_return: total_return / n_episodes as f64,
        mean_steps: total_steps as f64 / n_episodes as f64,
    }
}
