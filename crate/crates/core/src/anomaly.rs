//! Streaming anomaly detection on the entropic potential of incoming events.
//!
//! Each sensor value is binned and scored by the change it causes in the
//! entropy of a smoothed next-symbol predictive built from the last `W`
//! symbols. A score is flagged when it exceeds `mean + kappa * std` of the
//! previous (up to `W`) scores, once warm-up is over.
//!
//! Scoring order for one value: compute the predictive from the current
//! window, insert the value's bin (evicting the oldest symbol when the window
//! is full), compute the new predictive, report the entropy difference.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{entropy_bits, Distribution};
use crate::potential::{Horizon, ZEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnomalyError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, AnomalyError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Symbols kept in the sliding window, and scores kept for the threshold.
    pub window: usize,
    pub bins: usize,
    pub range_min: f64,
    pub range_max: f64,
    pub kappa: f64,
    /// Events scored before any flag may be raised.
    pub warmup: usize,
    /// Laplace pseudo-count per bin.
    pub smoothing: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            window: 64,
            bins: 4,
            range_min: 0.0,
            range_max: 4.0,
            kappa: 3.0,
            warmup: 64,
            smoothing: 1.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(AnomalyError::InvalidConfig(m));
        if self.window < 8 {
            return fail(format!("window {} < 8", self.window));
        }
        if self.bins == 0 {
            return fail("at least one bin is required".into());
        }
        if !(self.range_min.is_finite()
            && self.range_max.is_finite()
            && self.range_min < self.range_max)
        {
            return fail(format!(
                "range [{}, {}] is empty",
                self.range_min, self.range_max
            ));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return fail(format!("kappa {} must be positive", self.kappa));
        }
        if self.warmup < self.window {
            return fail(format!("warmup {} < window {}", self.warmup, self.window));
        }
        if !(self.smoothing.is_finite() && self.smoothing > 0.0) {
            return fail(format!("smoothing {} must be positive", self.smoothing));
        }
        Ok(())
    }

    /// Equal-width bin of `x`; values outside the range clamp to the edge bins.
    pub fn bin_of(&self, x: f64) -> usize {
        let width = (self.range_max - self.range_min) / self.bins as f64;
        let raw = ((x - self.range_min) / width).floor();
        if raw.is_nan() || raw < 0.0 {
            0
        } else {
            (raw as usize).min(self.bins - 1)
        }
    }

    fn smoothed(&self, counts: &[u64]) -> Vec<f64> {
        let n: u64 = counts.iter().sum();
        let denom = n as f64 + self.bins as f64 * self.smoothing;
        counts
            .iter()
            .map(|&c| (c as f64 + self.smoothing) / denom)
            .collect()
    }

    fn smoothed_entropy(&self, counts: &[u64]) -> f64 {
        entropy_bits(&self.smoothed(counts))
    }
}

/// Sliding window of binned symbols.
#[derive(Debug, Clone)]
pub struct StreamModel {
    config: DetectorConfig,
    window: VecDeque<usize>,
    counts: Vec<u64>,
}

impl StreamModel {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: VecDeque::with_capacity(config.window),
            counts: vec![0; config.bins],
            config,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Categorical `(count_b + s) / (n + B s)` over the bins.
    pub fn predictive(&self) -> Distribution<usize> {
        Distribution::new(
            (0..self.config.bins).collect(),
            self.config.smoothed(&self.counts),
        )
        .expect("smoothed counts form a distribution")
    }

    fn counts_after(&self, bin: usize) -> Vec<u64> {
        let mut after = self.counts.clone();
        after[bin] += 1;
        if self.window.len() == self.config.window {
            if let Some(&oldest) = self.window.front() {
                after[oldest] -= 1;
            }
        }
        after
    }

    /// Score of `x` against the current window, without advancing it.
    pub fn score(&self, x: f64) -> f64 {
        let bin = self.config.bin_of(x);
        self.config.smoothed_entropy(&self.counts_after(bin))
            - self.config.smoothed_entropy(&self.counts)
    }

    fn push(&mut self, bin: usize) {
        if self.window.len() == self.config.window {
            if let Some(oldest) = self.window.pop_front() {
                self.counts[oldest] -= 1;
            }
        }
        self.window.push_back(bin);
        self.counts[bin] += 1;
    }

    /// Scores `x` as event number `index`, then advances the window.
    pub fn event_potential(&mut self, x: f64, index: usize) -> ZEstimate {
        let value = self.score(x);
        self.push(self.config.bin_of(x));
        event_estimate(value, index)
    }
}

fn event_estimate(value: f64, index: usize) -> ZEstimate {
    let t0 = index as u64;
    ZEstimate::exact(
        value,
        Horizon::new(t0, t0 + 1).expect("t0 < t0 + 1"),
        format!("event-{index}"),
        "null",
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventScore {
    pub index: usize,
    pub value: f64,
    pub bin: usize,
    pub z: ZEstimate,
    pub flagged: bool,
    /// Mean of the previous (up to `window`) scores, the flag baseline.
    pub rolling_mean: f64,
    /// Population standard deviation of the same scores.
    pub rolling_std: f64,
}

/// Mean and population standard deviation, summed front to back.
fn mean_std<'a, I: Iterator<Item = &'a f64> + Clone>(values: I) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

/// Online detector for a single stream.
#[derive(Debug, Clone)]
pub struct Detector {
    model: StreamModel,
    recent: VecDeque<f64>,
    next_index: usize,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self> {
        Ok(Self {
            model: StreamModel::new(config)?,
            recent: VecDeque::with_capacity(config.window),
            next_index: 0,
        })
    }

    pub fn model(&self) -> &StreamModel {
        &self.model
    }

    pub fn ingest(&mut self, x: f64) -> EventScore {
        let cfg = *self.model.config();
        let index = self.next_index;
        let bin = cfg.bin_of(x);
        let z = self.model.event_potential(x, index);
        let (rolling_mean, rolling_std) = mean_std(self.recent.iter());
        let flagged = index >= cfg.warmup && z.value > rolling_mean + cfg.kappa * rolling_std;
        if self.recent.len() == cfg.window {
            self.recent.pop_front();
        }
        self.recent.push_back(z.value);
        self.next_index += 1;
        EventScore {
            index,
            value: x,
            bin,
            z,
            flagged,
            rolling_mean,
            rolling_std,
        }
    }
}

/// Batch scoring of a whole stream, recomputing every window from scratch.
/// Agrees exactly with feeding the values one by one to [`Detector::ingest`].
pub fn replay(values: &[f64], config: &DetectorConfig) -> Result<Vec<EventScore>> {
    config.validate()?;
    let w = config.window;
    let bins: Vec<usize> = values.iter().map(|&x| config.bin_of(x)).collect();
    let count = |slice: &[usize]| {
        let mut c = vec![0u64; config.bins];
        for &b in slice {
            c[b] += 1;
        }
        c
    };
    let mut zs = Vec::with_capacity(values.len());
    let mut out = Vec::with_capacity(values.len());
    for (i, (&x, &bin)) in values.iter().zip(&bins).enumerate() {
        let before = count(&bins[i.saturating_sub(w)..i]);
        let after = count(&bins[(i + 1).saturating_sub(w)..=i]);
        let value = config.smoothed_entropy(&after) - config.smoothed_entropy(&before);
        let (rolling_mean, rolling_std) = mean_std(zs[i.saturating_sub(w)..i].iter());
        let flagged = i >= config.warmup && value > rolling_mean + config.kappa * rolling_std;
        zs.push(value);
        out.push(EventScore {
            index: i,
            value: x,
            bin,
            z: event_estimate(value, i),
            flagged,
            rolling_mean,
            rolling_std,
        });
    }
    Ok(out)
}

/// `before` values uniform on the lower half of `[lo, hi)`, then `after`
/// values uniform on the upper half.
pub fn regime_shift_stream(seed: u64, before: usize, after: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mid = 0.5 * (lo + hi);
    (0..before + after)
        .map(|i| {
            let (a, b) = if i < before { (lo, mid) } else { (mid, hi) };
            rng.random_range(a..b)
        })
        .collect()
}

/// `n` values uniform on `[lo, hi)`.
pub fn uniform_stream(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}
