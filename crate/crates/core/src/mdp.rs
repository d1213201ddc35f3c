//! Stochastic grid-world.
//!
//! An agent moves on a `width x height` grid with walls. A move succeeds with
//! probability `1 - slip` and otherwise leaves the agent in place; moves into a
//! wall or off the border also leave it in place. The goal cell is absorbing.
//!
//! Exact `k`-step push-forward of a state distribution is the reference oracle
//! for everything sampled on top of it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{entropy_bits, Distribution};
use crate::potential::{
    rank_events, BaselineRule, EstimatorConfig, Event, Horizon, PotentialError, SystemModel,
    ZEstimate,
};

/// Largest grid (in cells) accepted, so exact enumeration stays cheap.
pub const MAX_CELLS: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cell {0} is a wall")]
    CellIsWall(Cell),

    #[error("cell {0} is outside the grid")]
    OutOfBounds(Cell),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("number of steps must be at least 1")]
    ZeroSteps,

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error(transparent)]
    Potential(#[from] PotentialError),
}

pub type Result<T> = std::result::Result<T, MdpError>;

/// Grid coordinates; `x` grows to the right, `y` grows downwards.
///
/// Cells order row-major (by `y`, then `x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<[u32; 2]> for Cell {
    fn from([x, y]: [u32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Cell> for [u32; 2] {
    fn from(c: Cell) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
        }
    }

    fn arrow(self) -> char {
        match self {
            Action::Up => '^',
            Action::Down => 'v',
            Action::Left => '<',
            Action::Right => '>',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = MdpError;

    fn from_str(s: &str) -> Result<Self> {
        Action::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| MdpError::UnknownAction(s.to_string()))
    }
}

/// Serializable grid description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub walls: Vec<Cell>,
    pub goal: Cell,
    pub start: Cell,
    pub slip: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWorld {
    width: u32,
    height: u32,
    walls: Vec<bool>,
    goal: Cell,
    start: Cell,
    slip: f64,
}

impl GridWorld {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let GridSpec {
            width,
            height,
            goal,
            start,
            slip,
            ..
        } = *spec;
        let cells = u64::from(width) * u64::from(height);
        if cells == 0 || cells > MAX_CELLS {
            return Err(MdpError::InvalidGrid(format!(
                "grid has {cells} cells, allowed range is 1..={MAX_CELLS}"
            )));
        }
        if !(0.0..1.0).contains(&slip) {
            return Err(MdpError::InvalidGrid(format!("slip {slip} outside [0,1)")));
        }
        let mut g = Self {
            width,
            height,
            walls: vec![false; cells as usize],
            goal,
            start,
            slip,
        };
        for &w in &spec.walls {
            let i = g.index(w)?;
            g.walls[i] = true;
        }
        for (what, c) in [("goal", goal), ("start", start)] {
            if g.is_wall(c)? {
                return Err(MdpError::InvalidGrid(format!("{what} {c} is a wall")));
            }
        }
        Ok(g)
    }

    /// A `1 x len` corridor from cell 0 to an absorbing goal at `len - 1`.
    pub fn corridor(len: u32, slip: f64) -> Result<Self> {
        Self::new(&GridSpec {
            width: len,
            height: 1,
            walls: vec![],
            goal: Cell::new(len.saturating_sub(1), 0),
            start: Cell::new(0, 0),
            slip,
        })
    }

    /// Open `size x size` grid from the top-left corner to the bottom-right.
    pub fn open(size: u32, slip: f64) -> Result<Self> {
        Self::new(&GridSpec {
            width: size,
            height: size,
            walls: vec![],
            goal: Cell::new(size.saturating_sub(1), size.saturating_sub(1)),
            start: Cell::new(0, 0),
            slip,
        })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            width: self.width,
            height: self.height,
            walls: self.cells().filter(|&c| self.walls[self.idx(c)]).collect(),
            goal: self.goal,
            start: self.start,
            slip: self.slip,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    pub fn num_cells(&self) -> usize {
        self.walls.len()
    }

    /// Number of cells that are not walls.
    pub fn num_open(&self) -> usize {
        self.walls.iter().filter(|&&w| !w).count()
    }

    /// Every cell in row-major order, walls included.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn open_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|&c| !self.walls[self.idx(c)])
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Cell) -> Result<usize> {
        if self.contains(c) {
            Ok(self.idx(c))
        } else {
            Err(MdpError::OutOfBounds(c))
        }
    }

    pub(crate) fn idx(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub(crate) fn cell_at(&self, i: usize) -> Cell {
        let i = i as u32;
        Cell::new(i % self.width, i / self.width)
    }

    pub fn is_wall(&self, c: Cell) -> Result<bool> {
        Ok(self.walls[self.index(c)?])
    }

    fn ensure_open(&self, c: Cell) -> Result<()> {
        if self.is_wall(c)? {
            Err(MdpError::CellIsWall(c))
        } else {
            Ok(())
        }
    }

    /// Cell reached when the move succeeds; the cell itself if blocked.
    pub fn target(&self, c: Cell, a: Action) -> Cell {
        let next = match a {
            Action::Up if c.y > 0 => Cell::new(c.x, c.y - 1),
            Action::Down if c.y + 1 < self.height => Cell::new(c.x, c.y + 1),
            Action::Left if c.x > 0 => Cell::new(c.x - 1, c.y),
            Action::Right if c.x + 1 < self.width => Cell::new(c.x + 1, c.y),
            _ => c,
        };
        if self.walls[self.idx(next)] {
            c
        } else {
            next
        }
    }

    /// The two (index, probability) branches of one transition.
    fn branches(&self, c: Cell, a: Action) -> [(usize, f64); 2] {
        let here = self.idx(c);
        if c == self.goal {
            return [(here, 1.0), (here, 0.0)];
        }
        [
            (self.idx(self.target(c, a)), 1.0 - self.slip),
            (here, self.slip),
        ]
    }

    /// One sampled transition. Draws a single uniform unless `c` is the goal.
    pub fn sample_step<R: Rng + ?Sized>(&self, c: Cell, a: Action, rng: &mut R) -> Cell {
        if c == self.goal {
            return c;
        }
        let u: f64 = rng.random();
        if u < self.slip {
            c
        } else {
            self.target(c, a)
        }
    }
}

/// Probability vector over all grid cells (walls always carry zero).
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistribution {
    width: u32,
    probs: Vec<f64>,
}

impl StateDistribution {
    pub fn point(g: &GridWorld, c: Cell) -> Result<Self> {
        g.ensure_open(c)?;
        let mut probs = vec![0.0; g.num_cells()];
        probs[g.idx(c)] = 1.0;
        Ok(Self {
            width: g.width,
            probs,
        })
    }

    /// Uniform over the open cells.
    pub fn uniform(g: &GridWorld) -> Self {
        let w = 1.0 / g.num_open() as f64;
        let probs = g
            .walls
            .iter()
            .map(|&wall| if wall { 0.0 } else { w })
            .collect();
        Self {
            width: g.width,
            probs,
        }
    }

    pub fn from_distribution(g: &GridWorld, d: &Distribution<Cell>) -> Result<Self> {
        let mut probs = vec![0.0; g.num_cells()];
        for (&c, p) in d.iter() {
            if p > 0.0 {
                g.ensure_open(c)?;
            }
            probs[g.index(c)?] += p;
        }
        Ok(Self {
            width: g.width,
            probs,
        })
    }

    pub fn prob(&self, c: Cell) -> f64 {
        let i = (c.y * self.width + c.x) as usize;
        self.probs.get(i).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.probs)
    }

    /// Distribution over the open cells of `g`, zeros included.
    pub fn to_distribution(&self, g: &GridWorld) -> Result<Distribution<Cell>> {
        let (cells, probs): (Vec<Cell>, Vec<f64>) =
            g.open_cells().map(|c| (c, self.probs[g.idx(c)])).unzip();
        Ok(Distribution::new(cells, probs).map_err(PotentialError::from)?)
    }
}

/// Per-cell distribution over actions, indexed like [`Action::ALL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    rows: Vec<[f64; 4]>,
}

impl Policy {
    pub fn from_fn<F: FnMut(Cell) -> [f64; 4]>(g: &GridWorld, mut f: F) -> Result<Self> {
        let mut rows = Vec::with_capacity(g.num_cells());
        for c in g.cells() {
            if g.walls[g.idx(c)] {
                rows.push([0.25; 4]);
                continue;
            }
            let row = f(c);
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(MdpError::InvalidPolicy(format!(
                    "action law at {c} is {row:?}"
                )));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn deterministic<F: FnMut(Cell) -> Action>(g: &GridWorld, mut f: F) -> Self {
        let rows = g
            .cells()
            .map(|c| {
                let mut row = [0.0; 4];
                row[f(c).index()] = 1.0;
                row
            })
            .collect();
        Self { rows }
    }

    pub fn always(g: &GridWorld, a: Action) -> Self {
        Self::deterministic(g, |_| a)
    }

    pub fn uniform(g: &GridWorld) -> Self {
        Self {
            rows: vec![[0.25; 4]; g.num_cells()],
        }
    }

    pub fn action_probs(&self, g: &GridWorld, c: Cell) -> [f64; 4] {
        self.rows[g.idx(c)]
    }

    /// Most probable action at `c`, first in [`Action::ALL`] order on ties.
    pub fn mode(&self, g: &GridWorld, c: Cell) -> Action {
        let row = self.rows[g.idx(c)];
        let mut best = 0;
        for i in 1..4 {
            if row[i] > row[best] {
                best = i;
            }
        }
        Action::ALL[best]
    }

    pub fn sample<R: Rng + ?Sized>(&self, g: &GridWorld, c: Cell, rng: &mut R) -> Action {
        let row = self.rows[g.idx(c)];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, p) in Action::ALL.into_iter().zip(row) {
            acc += p;
            if u < acc {
                return a;
            }
        }
        // rounding left u above the final partial sum
        *Action::ALL
            .iter()
            .rev()
            .find(|a| row[a.index()] > 0.0)
            .unwrap_or(&Action::Right)
    }
}

/// How the agent acts during one push-forward step.
#[derive(Debug, Clone, Copy)]
pub enum Step<'a> {
    Action(Action),
    Policy(&'a Policy),
}

/// Law of the next cell when the agent starts in `c` and takes `a`.
pub fn transition_kernel(g: &GridWorld, c: Cell, a: Action) -> Result<StateDistribution> {
    g.ensure_open(c)?;
    let mut probs = vec![0.0; g.num_cells()];
    for (i, p) in g.branches(c, a) {
        probs[i] += p;
    }
    Ok(StateDistribution {
        width: g.width,
        probs,
    })
}

/// Exact one-step evolution `sum_s d(s) sum_a pi(a|s) kernel(s, a)`.
pub fn push_forward(g: &GridWorld, d: &StateDistribution, step: Step<'_>) -> StateDistribution {
    let mut next = vec![0.0; g.num_cells()];
    for (i, &mass) in d.probs.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let c = g.cell_at(i);
        match step {
            Step::Action(a) => {
                for (j, p) in g.branches(c, a) {
                    next[j] += mass * p;
                }
            }
            Step::Policy(pi) => {
                for (a, pa) in Action::ALL.into_iter().zip(pi.rows[i]) {
                    if pa == 0.0 {
                        continue;
                    }
                    for (j, p) in g.branches(c, a) {
                        next[j] += mass * pa * p;
                    }
                }
            }
        }
    }
    StateDistribution {
        width: g.width,
        probs: next,
    }
}

/// Law of the cell after `k` steps: `first` once (when given), then `follow`
/// for the remaining steps. Without `first`, `follow` drives all `k` steps.
pub fn future_state_distribution(
    g: &GridWorld,
    start: &StateDistribution,
    first: Option<Action>,
    follow: &Policy,
    k: u64,
) -> Result<StateDistribution> {
    if k == 0 {
        return Err(MdpError::ZeroSteps);
    }
    let mut d = start.clone();
    let mut remaining = k;
    if let Some(a) = first {
        d = push_forward(g, &d, Step::Action(a));
        remaining -= 1;
    }
    for _ in 0..remaining {
        d = push_forward(g, &d, Step::Policy(follow));
    }
    Ok(d)
}

/// One sampled terminal cell of the process described in
/// [`future_state_distribution`].
pub fn sample_trajectory<R: Rng + ?Sized>(
    g: &GridWorld,
    start: Cell,
    first: Option<Action>,
    follow: &Policy,
    k: u64,
    rng: &mut R,
) -> Result<Cell> {
    if k == 0 {
        return Err(MdpError::ZeroSteps);
    }
    g.ensure_open(start)?;
    let mut c = start;
    let mut remaining = k;
    if let Some(a) = first {
        c = g.sample_step(c, a, rng);
        remaining -= 1;
    }
    for _ in 0..remaining {
        if c == g.goal {
            break;
        }
        let a = follow.sample(g, c, rng);
        c = g.sample_step(c, a, rng);
    }
    Ok(c)
}

/// Grid-world viewed as a [`SystemModel`]: the event is the action taken at
/// `cell` at `t0`, after which `follow` drives the agent until `T`.
#[derive(Debug, Clone)]
pub struct GridModel<'a> {
    grid: &'a GridWorld,
    cell: Cell,
    follow: &'a Policy,
    actions: Vec<Action>,
}

impl<'a> GridModel<'a> {
    pub fn new(
        grid: &'a GridWorld,
        cell: Cell,
        follow: &'a Policy,
        actions: &[Action],
    ) -> Result<Self> {
        grid.ensure_open(cell)?;
        let mut actions = actions.to_vec();
        actions.sort_unstable();
        actions.dedup();
        Ok(Self {
            grid,
            cell,
            follow,
            actions,
        })
    }

    pub fn event(&self, a: Action) -> Event {
        Event::new(a.name(), format!("move {a} from {}", self.cell))
    }

    fn action_of(
        &self,
        event: Option<&Event>,
    ) -> std::result::Result<Option<Action>, PotentialError> {
        event
            .map(|e| {
                e.id.parse::<Action>()
                    .ok()
                    .filter(|a| self.actions.contains(a))
                    .ok_or_else(|| PotentialError::EventNotAdmissible(e.id.clone()))
            })
            .transpose()
    }
}

impl SystemModel for GridModel<'_> {
    type Outcome = Cell;

    fn event_space(&self) -> Vec<Event> {
        self.actions.iter().map(|&a| self.event(a)).collect()
    }

    fn exact_future_distribution(
        &self,
        event: Option<&Event>,
        horizon: &Horizon,
    ) -> std::result::Result<Distribution<Cell>, PotentialError> {
        let first = self.action_of(event)?;
        let start = StateDistribution::point(self.grid, self.cell).map_err(to_potential)?;
        let d = future_state_distribution(self.grid, &start, first, self.follow, horizon.lead())
            .map_err(to_potential)?;
        d.to_distribution(self.grid).map_err(to_potential)
    }

    fn sample_future_outcome<R: Rng + ?Sized>(
        &self,
        event: Option<&Event>,
        horizon: &Horizon,
        rng: &mut R,
    ) -> std::result::Result<Cell, PotentialError> {
        let first = self.action_of(event)?;
        sample_trajectory(
            self.grid,
            self.cell,
            first,
            self.follow,
            horizon.lead(),
            rng,
        )
        .map_err(to_potential)
    }
}

fn to_potential(e: MdpError) -> PotentialError {
    match e {
        MdpError::Potential(p) => p,
        other => PotentialError::Model(other.to_string()),
    }
}

/// `Z` of each action at `cell`, each against the uniform mix of the other
/// actions in `actions`, with `follow` driving the remaining `k - 1` steps.
/// Sorted most beneficial first.
pub fn action_z_scores(
    g: &GridWorld,
    cell: Cell,
    follow: &Policy,
    k: u64,
    estimator: &EstimatorConfig,
    actions: &[Action],
) -> Result<Vec<(Action, ZEstimate)>> {
    if k == 0 {
        return Err(MdpError::ZeroSteps);
    }
    let model = GridModel::new(g, cell, follow, actions)?;
    let horizon = Horizon::steps(k)?;
    let ranked = rank_events(
        &model,
        &model.event_space(),
        &BaselineRule::EachVsRest,
        &horizon,
        estimator,
    )?;
    ranked
        .into_iter()
        .map(|(e, z)| Ok((e.id.parse::<Action>()?, z)))
        .collect()
}

/// ASCII picture of the grid: `#` walls, `G` goal, `S` start, `.` open cells.
/// With a policy, open cells show the policy's most likely move instead.
pub fn render_ascii(g: &GridWorld, policy: Option<&Policy>) -> String {
    let mut out = String::with_capacity(g.num_cells() + g.height as usize);
    for y in 0..g.height {
        for x in 0..g.width {
            let c = Cell::new(x, y);
            let ch = if g.walls[g.idx(c)] {
                '#'
            } else if c == g.goal {
                'G'
            } else if let Some(pi) = policy {
                pi.mode(g, c).arrow()
            } else if c == g.start {
                'S'
            } else {
                '.'
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}
