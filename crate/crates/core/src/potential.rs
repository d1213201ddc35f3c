//! Entropic potential of events.
//!
//! The entropic potential `Z(T, A)` of an event `A` considered at time `t0`
//! is a difference of entropies of the system state `X_T` at a later time `T`.
//! Two formulations are provided:
//!
//! * [`z_pre_post`]: entropy of `X_T` with `A` applied at `t0`, minus entropy
//!   of `X_T` when the system evolves from `t0` with no event at all.
//! * [`z_counterfactual`]: entropy of `X_T` given `A`, minus the weighted
//!   average of the entropies of `X_T` given each alternative event drawn from
//!   a [`Baseline`]. A null baseline reduces this to the pre/post form.
//!
//! Negative values mark beneficial (uncertainty-reducing) events, positive
//! values harmful ones. Both formulations can be evaluated exactly, when the
//! model can enumerate its predictive distribution, or by Monte Carlo with a
//! bootstrap standard error.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{
    plugin_entropy_of_counts, shannon_entropy, Distribution, EntropyBits, EntropyError,
    SampleCounts,
};

/// Smallest Monte Carlo sample size accepted per branch.
pub const MIN_MC_SAMPLES: usize = 100;

/// Default half-width of the neutral band used by [`classify_event`].
pub const DEFAULT_NEUTRAL_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("model cannot enumerate its future distribution exactly")]
    UnsupportedBackend,

    #[error("model cannot sample future outcomes")]
    SamplingUnsupported,

    #[error("event `{0}` is not admissible at t0")]
    EventNotAdmissible(String),

    #[error("baseline has no alternatives")]
    EmptyBaseline,

    #[error("event `{0}` appears in its own baseline")]
    EventInBaseline(String),

    #[error("baseline weights are invalid: {0}")]
    InvalidBaselineWeights(String),

    #[error("horizon requires t > t0, got t0={t0}, t={t}")]
    InvalidHorizon { t0: u64, t: u64 },

    #[error("Monte Carlo needs at least {MIN_MC_SAMPLES} samples per branch, got {0}")]
    TooFewSamples(usize),

    #[error("bootstrap needs at least 2 resamples, got {0}")]
    TooFewResamples(usize),

    #[error("no events to rank")]
    NoEvents,

    #[error("duplicate event id `{0}`")]
    DuplicateEvent(String),

    #[error("model error: {0}")]
    Model(String),

    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

pub type Result<T> = std::result::Result<T, PotentialError>;

/// A discrete event that may occur at `t0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    #[serde(default)]
    pub description: String,
}

impl Event {
    pub fn new(id: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
        }
    }
}

/// Time at which the event is considered and the later time at which the
/// state entropy is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    t0: u64,
    t: u64,
}

impl Horizon {
    pub fn new(t0: u64, t: u64) -> Result<Self> {
        if t <= t0 {
            return Err(PotentialError::InvalidHorizon { t0, t });
        }
        Ok(Self { t0, t })
    }

    /// Horizon `k` steps after an event at time 0.
    pub fn steps(k: u64) -> Result<Self> {
        Self::new(0, k)
    }

    pub fn t0(&self) -> u64 {
        self.t0
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Number of steps between the event and the evaluation time.
    pub fn lead(&self) -> u64 {
        self.t - self.t0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    UniformAlternatives,
    WeightedAlternatives,
    NullEvent,
}

/// What "the event did not occur" means for the counterfactual form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    kind: BaselineKind,
    alternatives: Vec<Event>,
    weights: Vec<f64>,
}

impl Baseline {
    /// The system evolves with no event at `t0`.
    pub fn null() -> Self {
        Self {
            kind: BaselineKind::NullEvent,
            alternatives: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn uniform(alternatives: Vec<Event>) -> Result<Self> {
        if alternatives.is_empty() {
            return Err(PotentialError::EmptyBaseline);
        }
        check_unique(&alternatives)?;
        let w = 1.0 / alternatives.len() as f64;
        Ok(Self {
            kind: BaselineKind::UniformAlternatives,
            weights: vec![w; alternatives.len()],
            alternatives,
        })
    }

    pub fn weighted(alternatives: Vec<Event>, weights: Vec<f64>) -> Result<Self> {
        if alternatives.is_empty() {
            return Err(PotentialError::EmptyBaseline);
        }
        check_unique(&alternatives)?;
        let labels = (0..alternatives.len()).collect();
        let d = Distribution::new(labels, weights)
            .map_err(|e| PotentialError::InvalidBaselineWeights(e.to_string()))?;
        Ok(Self {
            kind: BaselineKind::WeightedAlternatives,
            weights: d.probs().to_vec(),
            alternatives,
        })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn alternatives(&self) -> &[Event] {
        &self.alternatives
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_null(&self) -> bool {
        self.kind == BaselineKind::NullEvent
    }

    /// Compact human-readable description, e.g. `uniform{left,up}`.
    pub fn summary(&self) -> String {
        match self.kind {
            BaselineKind::NullEvent => "null".to_string(),
            BaselineKind::UniformAlternatives => {
                let ids: Vec<&str> = self.alternatives.iter().map(|e| e.id.as_str()).collect();
                format!("uniform{{{}}}", ids.join(","))
            }
            BaselineKind::WeightedAlternatives => {
                let parts: Vec<String> = self
                    .alternatives
                    .iter()
                    .zip(&self.weights)
                    .map(|(e, w)| format!("{}:{}", e.id, w))
                    .collect();
                format!("weighted{{{}}}", parts.join(","))
            }
        }
    }
}

fn check_unique(events: &[Event]) -> Result<()> {
    let mut ids: Vec<&str> = events.iter().map(|e| e.id.as_str()).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(PotentialError::DuplicateEvent(w[0].to_string())),
        None => Ok(()),
    }
}

/// A system whose future state distribution can be queried under an event.
///
/// `None` as the event means "nothing happens at `t0`": the model evolves
/// under its default dynamics. Whatever happens between `t0` and `T` (for
/// example a follow-on policy) is owned by the model.
pub trait SystemModel {
    type Outcome: Ord + Clone + fmt::Debug;

    /// Events admissible at `t0`.
    fn event_space(&self) -> Vec<Event>;

    /// Exact law of `X_T` given the event, if the model can enumerate it.
    fn exact_future_distribution(
        &self,
        _event: Option<&Event>,
        _horizon: &Horizon,
    ) -> Result<Distribution<Self::Outcome>> {
        Err(PotentialError::UnsupportedBackend)
    }

    /// One draw of `X_T` given the event.
    fn sample_future_outcome<R: Rng + ?Sized>(
        &self,
        _event: Option<&Event>,
        _horizon: &Horizon,
        _rng: &mut R,
    ) -> Result<Self::Outcome> {
        Err(PotentialError::SamplingUnsupported)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Mc,
}

/// How branch entropies are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub backend: Backend,
    pub n_samples: usize,
    pub seed: u64,
    pub bootstrap_resamples: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Exact,
            n_samples: 10_000,
            seed: 0,
            bootstrap_resamples: 200,
        }
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn monte_carlo(n_samples: usize, seed: u64) -> Self {
        Self {
            backend: Backend::Mc,
            n_samples,
            seed,
            ..Self::default()
        }
    }

    /// Checks the Monte Carlo sizes; the exact back-end ignores them.
    pub fn validate(&self) -> Result<()> {
        if self.backend == Backend::Mc {
            if self.n_samples < MIN_MC_SAMPLES {
                return Err(PotentialError::TooFewSamples(self.n_samples));
            }
            if self.bootstrap_resamples < 2 {
                return Err(PotentialError::TooFewResamples(self.bootstrap_resamples));
            }
        }
        Ok(())
    }

    /// Same configuration on an independent seed stream.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, stream),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

/// An entropic-potential value in bits with its estimator metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: Method,
    /// Samples drawn per branch; zero for the exact back-end.
    pub n_samples: u64,
    pub horizon: Horizon,
    pub event: String,
    pub baseline: String,
}

impl ZEstimate {
    pub fn exact(
        value: f64,
        horizon: Horizon,
        event: impl Into<String>,
        baseline: impl Into<String>,
    ) -> Self {
        Self {
            value,
            std_error: 0.0,
            method: Method::Exact,
            n_samples: 0,
            horizon,
            event: event.into(),
            baseline: baseline.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventClass {
    Beneficial,
    Harmful,
    Neutral,
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventClass::Beneficial => "beneficial",
            EventClass::Harmful => "harmful",
            EventClass::Neutral => "neutral",
        })
    }
}

/// Beneficial below `-tol`, harmful above `+tol`, neutral in between.
pub fn classify_event(z: &ZEstimate, tol: f64) -> EventClass {
    let tol = tol.max(0.0);
    if z.value < -tol {
        EventClass::Beneficial
    } else if z.value > tol {
        EventClass::Harmful
    } else {
        EventClass::Neutral
    }
}

/// SplitMix64 finalizer applied to `seed + stream`; gives independent,
/// scheduling-free seed streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// Plug-in entropy of `n` sampled outcomes of `X_T`, with a bootstrap
/// standard error over `resamples` multinomial resamples of the counts.
pub fn mc_entropy_of_branch<M: SystemModel>(
    model: &M,
    event: Option<&Event>,
    horizon: &Horizon,
    n: usize,
    seed: u64,
    resamples: usize,
) -> Result<(EntropyBits, f64)> {
    if n < MIN_MC_SAMPLES {
        return Err(PotentialError::TooFewSamples(n));
    }
    if resamples < 2 {
        return Err(PotentialError::TooFewResamples(resamples));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = SampleCounts::new();
    for _ in 0..n {
        counts.add(model.sample_future_outcome(event, horizon, &mut rng)?);
    }
    let counts = counts.count_vector();
    let estimate = plugin_entropy_of_counts(&counts);
    let mut boot_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, BOOTSTRAP_STREAM));
    let se = bootstrap_std_error(&counts, resamples, &mut boot_rng);
    Ok((EntropyBits(estimate), se))
}

/// Standard deviation of the plug-in entropy over multinomial resamples of
/// `counts` (same total, empirical frequencies).
fn bootstrap_std_error<R: Rng + ?Sized>(counts: &[u64], resamples: usize, rng: &mut R) -> f64 {
    let total: u64 = counts.iter().sum();
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return 0.0;
    }
    let mut replicate = vec![0u64; counts.len()];
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        // sequential conditional binomials give an exact multinomial draw
        let mut remaining_n = total;
        let mut remaining_mass = total;
        for (slot, &c) in replicate.iter_mut().zip(counts) {
            if remaining_n == 0 || remaining_mass == 0 {
                *slot = 0;
                continue;
            }
            let p = (c as f64 / remaining_mass as f64).min(1.0);
            let draw = if p >= 1.0 {
                remaining_n
            } else {
                Binomial::new(remaining_n, p)
                    .map(|b| b.sample(rng))
                    .unwrap_or(0)
            };
            *slot = draw;
            remaining_n -= draw;
            remaining_mass -= c;
        }
        values.push(plugin_entropy_of_counts(&replicate));
    }
    sample_std(&values)
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

fn ensure_admissible<M: SystemModel>(model: &M, events: &[&Event]) -> Result<()> {
    let space = model.event_space();
    for e in events {
        if !space.iter().any(|s| s.id == e.id) {
            return Err(PotentialError::EventNotAdmissible(e.id.clone()));
        }
    }
    Ok(())
}

/// Entropy of one branch and its standard error.
fn branch_entropy<M: SystemModel>(
    model: &M,
    event: Option<&Event>,
    horizon: &Horizon,
    estimator: &EstimatorConfig,
    stream: u64,
) -> Result<(f64, f64)> {
    match estimator.backend {
        Backend::Exact => {
            let d = model.exact_future_distribution(event, horizon)?;
            Ok((shannon_entropy(&d).bits(), 0.0))
        }
        Backend::Mc => {
            let (h, se) = mc_entropy_of_branch(
                model,
                event,
                horizon,
                estimator.n_samples,
                derive_seed(estimator.seed, stream),
                estimator.bootstrap_resamples,
            )?;
            Ok((h.bits(), se))
        }
    }
}

fn estimate(
    value: f64,
    variance: f64,
    estimator: &EstimatorConfig,
    horizon: &Horizon,
    event: &Event,
    baseline: String,
) -> ZEstimate {
    let (method, n_samples) = match estimator.backend {
        Backend::Exact => (Method::Exact, 0),
        Backend::Mc => (Method::MonteCarlo, estimator.n_samples as u64),
    };
    ZEstimate {
        value,
        std_error: if method == Method::Exact {
            0.0
        } else {
            variance.sqrt()
        },
        method,
        n_samples,
        horizon: *horizon,
        event: event.id.clone(),
        baseline,
    }
}

/// Entropy of `X_T` with `event` applied at `t0` minus entropy of `X_T` with
/// nothing applied at `t0`.
pub fn z_pre_post<M: SystemModel>(
    model: &M,
    event: &Event,
    horizon: &Horizon,
    estimator: &EstimatorConfig,
) -> Result<ZEstimate> {
    ensure_admissible(model, &[event])?;
    let (h_after, se_after) = branch_entropy(model, Some(event), horizon, estimator, 0)?;
    let (h_before, se_before) = branch_entropy(model, None, horizon, estimator, 1)?;
    Ok(estimate(
        h_after - h_before,
        se_after.powi(2) + se_before.powi(2),
        estimator,
        horizon,
        event,
        Baseline::null().summary(),
    ))
}

/// Entropy of `X_T` given `event` minus the baseline-weighted average of the
/// entropies of `X_T` given each alternative.
pub fn z_counterfactual<M: SystemModel>(
    model: &M,
    event: &Event,
    baseline: &Baseline,
    horizon: &Horizon,
    estimator: &EstimatorConfig,
) -> Result<ZEstimate> {
    if baseline.is_null() {
        return z_pre_post(model, event, horizon, estimator);
    }
    if baseline.alternatives.is_empty() {
        return Err(PotentialError::EmptyBaseline);
    }
    if baseline.alternatives.iter().any(|a| a.id == event.id) {
        return Err(PotentialError::EventInBaseline(event.id.clone()));
    }
    let mut all: Vec<&Event> = vec![event];
    all.extend(baseline.alternatives.iter());
    ensure_admissible(model, &all)?;

    let (h_event, se_event) = branch_entropy(model, Some(event), horizon, estimator, 0)?;
    let mut h_baseline = 0.0;
    let mut variance = se_event.powi(2);
    for (i, (alt, &w)) in baseline
        .alternatives
        .iter()
        .zip(&baseline.weights)
        .enumerate()
    {
        let (h, se) = branch_entropy(model, Some(alt), horizon, estimator, i as u64 + 1)?;
        h_baseline += w * h;
        variance += (w * se).powi(2);
    }
    Ok(estimate(
        h_event - h_baseline,
        variance,
        estimator,
        horizon,
        event,
        baseline.summary(),
    ))
}

/// Which baseline each ranked event is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineRule {
    /// Each event against the uniform mixture of all the other ranked events.
    EachVsRest,
    Fixed(Baseline),
}

/// Sort key shared by every ranking: ascending value, then id.
pub(crate) fn by_value_then_id(a: (f64, &str), b: (f64, &str)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

/// Scores every event and sorts ascending by `Z` (most beneficial first),
/// breaking ties by event id. Monte Carlo seeds are derived per position in
/// `events`.
pub fn rank_events<M: SystemModel>(
    model: &M,
    events: &[Event],
    rule: &BaselineRule,
    horizon: &Horizon,
    estimator: &EstimatorConfig,
) -> Result<Vec<(Event, ZEstimate)>> {
    if events.is_empty() {
        return Err(PotentialError::NoEvents);
    }
    check_unique(events)?;
    let mut scored = Vec::with_capacity(events.len());
    for (i, event) in events.iter().enumerate() {
        let est = estimator.with_stream(i as u64);
        let z = match rule {
            BaselineRule::Fixed(baseline) => {
                z_counterfactual(model, event, baseline, horizon, &est)?
            }
            BaselineRule::EachVsRest => {
                let rest: Vec<Event> = events
                    .iter()
                    .filter(|e| e.id != event.id)
                    .cloned()
                    .collect();
                let baseline = Baseline::uniform(rest)?;
                z_counterfactual(model, event, &baseline, horizon, &est)?
            }
        };
        scored.push((event.clone(), z));
    }
    scored.sort_by(|a, b| by_value_then_id((a.1.value, &a.0.id), (b.1.value, &b.0.id)));
    Ok(scored)
}
