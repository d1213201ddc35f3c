//! The four experiment subcommands. Each reads its config block, computes, and
//! writes its tables plus `manifest.json` into the output directory.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use zentropy_core::anomaly::{self, EventScore};
use zentropy_core::bayes::{self, GridPosterior, RankedQuery};
use zentropy_core::mdp::{self, Action, Cell, GridWorld, MdpError, Policy};
use zentropy_core::potential::{classify_event, Horizon, PotentialError};
use zentropy_core::rl::{self, TrainResult};

use crate::attribution::{self, AttributionReport, AttributionRow};
use crate::config::{LoadedConfig, OutputFormat, Prior};
use crate::error::{CliError, Result};
use crate::format::{json_bytes, sig, write_bytes, Table};

pub const MANIFEST: &str = "manifest.json";

/// Run metadata written next to every set of outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub config_hash: String,
    pub tolerance: f64,
    pub files: Vec<String>,
}

/// Collects output files for one run.
struct Outputs<'a> {
    dir: PathBuf,
    loaded: &'a LoadedConfig,
    files: BTreeSet<String>,
}

impl<'a> Outputs<'a> {
    fn create(dir: &Path, loaded: &'a LoadedConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            loaded,
            files: BTreeSet::new(),
        })
    }

    fn hash(&self) -> &str {
        &self.loaded.hash
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_bytes(&self.dir.join(name), bytes)?;
        self.files.insert(name.to_string());
        Ok(())
    }

    fn put_csv(&mut self, name: &str, table: Table) -> Result<()> {
        if self.loaded.wants(OutputFormat::Csv) {
            self.put(name, &table.into_bytes())?;
        }
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if self.loaded.wants(OutputFormat::Json) {
            self.put(name, &json_bytes(value))?;
        }
        Ok(())
    }

    fn put_attribution(&mut self, rows: Vec<AttributionRow>) -> Result<()> {
        let report = AttributionReport {
            config_hash: self.hash().to_string(),
            tolerance: self.loaded.config.tolerance,
            rows,
        };
        // the report command needs one of the two, so CSV is the fallback
        if self.loaded.wants(OutputFormat::Csv) || !self.loaded.wants(OutputFormat::Json) {
            self.put(attribution::FILE_CSV, &report.csv_bytes())?;
        }
        self.put_json(attribution::FILE_JSON, &report)
    }

    fn finish(mut self, subcommand: &str) -> Result<RunSummary> {
        let mut files: Vec<String> = self.files.iter().cloned().collect();
        files.push(MANIFEST.to_string());
        files.sort();
        let manifest = Manifest {
            tool: "zentropy".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            seed: self.loaded.seed,
            config_hash: self.loaded.hash.clone(),
            tolerance: self.loaded.config.tolerance,
            files: files.clone(),
        };
        self.put(MANIFEST, &json_bytes(&manifest))?;
        Ok(RunSummary {
            dir: self.dir,
            files,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

/// Core errors raised by bad estimator settings are configuration errors;
/// anything else surfacing from the computation is a runtime failure.
fn from_mdp(e: MdpError) -> CliError {
    match e {
        MdpError::Potential(
            p @ (PotentialError::TooFewSamples(_) | PotentialError::TooFewResamples(_)),
        ) => CliError::invalid("estimator", p),
        other => CliError::runtime(other),
    }
}

fn open_non_goal(g: &GridWorld) -> Vec<Cell> {
    g.open_cells().filter(|&c| c != g.goal()).collect()
}

pub fn gridworld(loaded: &LoadedConfig, out: &Path) -> Result<RunSummary> {
    const BLOCK: &str = "gridworld";
    let block = loaded
        .config
        .gridworld
        .as_ref()
        .ok_or(CliError::MissingBlock(BLOCK))?;
    let g = GridWorld::new(&block.grid).map_err(|e| CliError::invalid(BLOCK, e))?;
    if block.horizon == 0 {
        return Err(CliError::invalid(BLOCK, "horizon must be at least 1"));
    }
    let mut actions = block
        .actions
        .clone()
        .unwrap_or_else(|| Action::ALL.to_vec());
    actions.sort_unstable();
    actions.dedup();
    if actions.len() < 2 {
        return Err(CliError::invalid(
            BLOCK,
            "at least two distinct actions are needed",
        ));
    }
    let cells = block.cells.clone().unwrap_or_else(|| open_non_goal(&g));
    for &c in &cells {
        if g.is_wall(c).map_err(|e| CliError::invalid(BLOCK, e))? {
            return Err(CliError::invalid(BLOCK, MdpError::CellIsWall(c)));
        }
    }
    let estimator = loaded.estimator();
    estimator
        .validate()
        .map_err(|e| CliError::invalid("estimator", e))?;
    let follow = match block.follow.action() {
        Some(a) => Policy::always(&g, a),
        None => Policy::uniform(&g),
    };
    let tol = loaded.config.tolerance;

    let mut out = Outputs::create(out, loaded)?;
    let mut table = Table::new(
        out.hash(),
        &[
            "x",
            "y",
            "action",
            "rank",
            "z_bits",
            "std_error",
            "class",
            "method",
        ],
    );
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for &cell in &cells {
        let stream = g.index(cell).map_err(from_mdp)? as u64;
        let scores = mdp::action_z_scores(
            &g,
            cell,
            &follow,
            block.horizon,
            &estimator.with_stream(stream),
            &actions,
        )
        .map_err(from_mdp)?;
        for (rank, (action, z)) in scores.iter().enumerate() {
            let class = classify_event(z, tol);
            table.row([
                cell.x.to_string(),
                cell.y.to_string(),
                action.to_string(),
                (rank + 1).to_string(),
                sig(z.value),
                sig(z.std_error),
                class.to_string(),
                z.method.to_string(),
            ]);
            records.push(json!({
                "cell": cell,
                "action": action,
                "rank": rank + 1,
                "class": class,
                "z": z,
            }));
            rows.push(AttributionRow::new(
                format!("{cell}:{action}"),
                format!("move {action} from {cell}"),
                z,
                tol,
            ));
        }
    }
    out.put_csv("z_table.csv", table)?;
    out.put_json(
        "z_table.json",
        &json!({
            "config_hash": out.hash(),
            "seed": loaded.seed,
            "horizon": block.horizon,
            "follow": block.follow,
            "map": mdp::render_ascii(&g, None),
            "scores": records,
        }),
    )?;
    out.put_attribution(rows)?;
    out.finish(BLOCK)
}

pub fn train(loaded: &LoadedConfig, out: &Path) -> Result<RunSummary> {
    const BLOCK: &str = "train";
    let block = loaded
        .config
        .train
        .as_ref()
        .ok_or(CliError::MissingBlock(BLOCK))?;
    let g = GridWorld::new(&block.grid).map_err(|e| CliError::invalid(BLOCK, e))?;
    let config = block.train_config(loaded.seed);
    block
        .shaping
        .validate()
        .map_err(|e| CliError::invalid(BLOCK, e))?;
    config.validate().map_err(|e| CliError::invalid(BLOCK, e))?;

    let mut result = rl::train(&g, &block.shaping, &config).map_err(CliError::runtime)?;
    if result.episodes() == 0 {
        // an untrained table has no greedy action worth reporting
        result.greedy_policy.clear();
    }
    let tol = loaded.config.tolerance;

    let mut out = Outputs::create(out, loaded)?;
    let mut curve = Table::new(
        out.hash(),
        &["episode", "return", "steps", "mean_intrinsic"],
    );
    for i in 0..result.episodes() {
        curve.row([
            i.to_string(),
            sig(result.returns[i]),
            result.steps[i].to_string(),
            sig(result.mean_intrinsic[i]),
        ]);
    }
    out.put_csv("train.csv", curve)?;

    let mut policy = Table::new(out.hash(), &["x", "y", "action"]);
    for p in &result.greedy_policy {
        policy.row([
            p.cell.x.to_string(),
            p.cell.y.to_string(),
            p.action.to_string(),
        ]);
    }
    out.put_csv("policy.csv", policy)?;

    let map = (result.episodes() > 0)
        .then(|| mdp::render_ascii(&g, Some(&rl::policy_from_result(&g, &result))));
    out.put_json(
        "train.json",
        &json!({
            "config_hash": out.hash(),
            "seed": loaded.seed,
            "shaping": block.shaping,
            "train": config,
            "policy_map": map,
            "result": &result,
        }),
    )?;
    out.put_attribution(final_z_rows(&result, block.shaping.horizon_k, tol))?;
    out.finish(BLOCK)
}

/// Attribution for the `Z` table in force at the end of training.
fn final_z_rows(result: &TrainResult, k: u64, tol: f64) -> Vec<AttributionRow> {
    let Some(last) = result.z_snapshots.last() else {
        return Vec::new();
    };
    let horizon = Horizon::steps(k).expect("validated horizon");
    last.entries
        .iter()
        .map(|e| {
            let z = zentropy_core::ZEstimate::exact(e.z, horizon, e.action.name(), "uniform-rest");
            AttributionRow::new(
                format!("{}:{}", e.cell, e.action),
                format!(
                    "move {} from {} (Z table of episode {})",
                    e.action, e.cell, last.episode
                ),
                &z,
                tol,
            )
        })
        .collect()
}

fn prior_of(prior: &Prior, n: usize) -> Result<GridPosterior> {
    const BLOCK: &str = "bayes";
    if n < 2 {
        return Err(CliError::invalid(BLOCK, "grid_points must be at least 2"));
    }
    match prior {
        Prior::Named(name) if name == "uniform" => GridPosterior::uniform(n),
        Prior::Named(name) => {
            return Err(CliError::invalid(BLOCK, format!("unknown prior `{name}`")))
        }
        Prior::Weights(w) if w.len() != n => {
            return Err(CliError::invalid(
                BLOCK,
                format!("prior has {} weights for {n} grid points", w.len()),
            ))
        }
        Prior::Weights(w) => GridPosterior::new(GridPosterior::equally_spaced(n), w.clone()),
    }
    .map_err(|e| CliError::invalid(BLOCK, e))
}

pub fn bayes(loaded: &LoadedConfig, out: &Path) -> Result<RunSummary> {
    const BLOCK: &str = "bayes";
    let block = loaded
        .config
        .bayes
        .as_ref()
        .ok_or(CliError::MissingBlock(BLOCK))?;
    let prior = prior_of(&block.prior, block.grid_points)?;
    if block.queries.is_empty() {
        return Err(CliError::invalid(BLOCK, "no queries"));
    }
    let mut ids = BTreeSet::new();
    for q in &block.queries {
        q.model
            .validate()
            .map_err(|e| CliError::invalid(BLOCK, e))?;
        if !ids.insert(q.id.as_str()) {
            return Err(CliError::invalid(
                BLOCK,
                format!("duplicate query id `{}`", q.id),
            ));
        }
    }
    block
        .data_model
        .validate()
        .map_err(|e| CliError::invalid(BLOCK, e))?;
    let tol = loaded.config.tolerance;

    let ranking: Vec<RankedQuery> =
        bayes::rank_queries(&prior, &block.queries).map_err(CliError::runtime)?;

    let mut posterior = prior.clone();
    let mut realized = Vec::with_capacity(block.data.len());
    for (i, &outcome) in block.data.iter().enumerate() {
        let mut z = bayes::realized_event_potential(&posterior, &block.data_model, outcome)
            .map_err(CliError::runtime)?;
        z.horizon = Horizon::new(i as u64, i as u64 + 1).expect("i < i + 1");
        z.event = format!("datum-{}:{outcome}", i + 1);
        posterior = bayes::posterior_update(&posterior, &block.data_model, outcome)
            .map_err(CliError::runtime)?;
        realized.push(z);
    }

    let mut out = Outputs::create(out, loaded)?;
    let mut table = Table::new(
        out.hash(),
        &[
            "rank",
            "id",
            "expected_z_bits",
            "mutual_information_bits",
            "class",
        ],
    );
    for (rank, r) in ranking.iter().enumerate() {
        table.row([
            (rank + 1).to_string(),
            r.query.id.clone(),
            sig(r.expected_z.value),
            sig(r.mutual_information.bits()),
            classify_event(&r.expected_z, tol).to_string(),
        ]);
    }
    out.put_csv("queries.csv", table)?;
    out.put_json(
        "bayes.json",
        &json!({
            "config_hash": out.hash(),
            "seed": loaded.seed,
            "grid_points": block.grid_points,
            "prior_entropy_bits": prior.entropy().bits(),
            "posterior_entropy_bits": posterior.entropy().bits(),
            "ranking": ranking,
            "realized": realized,
        }),
    )?;
    let rows = block
        .data
        .iter()
        .zip(&realized)
        .map(|(o, z)| AttributionRow::new(z.event.clone(), format!("observe {o}"), z, tol))
        .collect();
    out.put_attribution(rows)?;
    out.finish(BLOCK)
}

/// Where the anomaly subcommand reads its values from.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Stdin,
    File(PathBuf),
}

/// Newline-delimited numbers; blank lines are skipped.
pub fn read_values(input: &Input) -> Result<Vec<f64>> {
    let text = match input {
        Input::Stdin => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|source| CliError::ReadInput {
                    source_name: "standard input".into(),
                    source,
                })?;
            text
        }
        Input::File(path) => {
            std::fs::read_to_string(path).map_err(|source| CliError::ReadInput {
                source_name: path.display().to_string(),
                source,
            })?
        }
    };
    parse_values(&text)
}

pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(CliError::BadInput {
                    line: i + 1,
                    text: t.to_string(),
                })
            }
        }
    }
    Ok(values)
}

pub fn anomaly(loaded: &LoadedConfig, values: &[f64], out: &Path) -> Result<RunSummary> {
    const BLOCK: &str = "anomaly";
    let cfg = loaded.config.anomaly.ok_or(CliError::MissingBlock(BLOCK))?;
    cfg.validate().map_err(|e| CliError::invalid(BLOCK, e))?;
    let scores: Vec<EventScore> = anomaly::replay(values, &cfg).map_err(CliError::runtime)?;
    let tol = loaded.config.tolerance;

    let mut out = Outputs::create(out, loaded)?;
    let mut table = Table::new(
        out.hash(),
        &[
            "index",
            "value",
            "bin",
            "z_bits",
            "rolling_mean",
            "rolling_std",
            "flagged",
        ],
    );
    for s in &scores {
        table.row([
            s.index.to_string(),
            sig(s.value),
            s.bin.to_string(),
            sig(s.z.value),
            sig(s.rolling_mean),
            sig(s.rolling_std),
            s.flagged.to_string(),
        ]);
    }
    out.put_csv("scores.csv", table)?;
    let flagged: Vec<usize> = scores
        .iter()
        .filter(|s| s.flagged)
        .map(|s| s.index)
        .collect();
    // the summary is the anomaly run's headline result, so it is always written
    out.put(
        "summary.json",
        &json_bytes(&json!({
            "config_hash": out.hash(),
            "seed": loaded.seed,
            "detector": cfg,
            "events": scores.len(),
            "flag_count": flagged.len(),
            "first_flag_index": flagged.first(),
            "flagged": flagged,
        })),
    )?;
    let rows = scores
        .iter()
        .map(|s| {
            AttributionRow::new(
                s.z.event.clone(),
                format!(
                    "value {} in bin {}{}",
                    sig(s.value),
                    s.bin,
                    if s.flagged { " (flagged)" } else { "" }
                ),
                &s.z,
                tol,
            )
        })
        .collect();
    out.put_attribution(rows)?;
    out.finish(BLOCK)
}
