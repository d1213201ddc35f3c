//! Finite discrete distributions and entropy functionals.
//!
//! All entropies are reported in bits. The convention `0 · log 0 = 0` is used
//! throughout, so zero-probability outcomes never contribute.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on the probability sum accepted at construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("outcome list has {outcomes} entries but probability list has {probs}")]
    LengthMismatch { outcomes: usize, probs: usize },

    #[error("distribution has no outcomes")]
    EmptyDistribution,

    #[error("invalid probability {value} at position {index}")]
    InvalidProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, not 1 (tolerance {NORMALIZATION_TOLERANCE})")]
    NotNormalized { sum: f64 },

    #[error("duplicate outcome label at position {index}")]
    DuplicateOutcome { index: usize },

    #[error("Renyi order must be positive and different from 1, got {0}")]
    InvalidAlpha(f64),

    #[error("sample counts are empty")]
    EmptyCounts,
}

pub type Result<T> = std::result::Result<T, EntropyError>;

/// An entropy value in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntropyBits(pub f64);

impl EntropyBits {
    pub const ZERO: EntropyBits = EntropyBits(0.0);

    pub fn bits(self) -> f64 {
        self.0
    }
}

impl fmt::Display for EntropyBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// A probability vector over a finite, ordered list of unique outcome labels.
///
/// Probabilities are validated on construction: each must be finite and
/// non-negative and their sum must be within [`NORMALIZATION_TOLERANCE`] of 1.
/// Accepted inputs are renormalized once so the stored vector sums to 1 up to
/// rounding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution<O> {
    outcomes: Vec<O>,
    probs: Vec<f64>,
}

impl<O: Ord + Clone> Distribution<O> {
    pub fn new(outcomes: Vec<O>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.len() != probs.len() {
            return Err(EntropyError::LengthMismatch {
                outcomes: outcomes.len(),
                probs: probs.len(),
            });
        }
        let probs = validate_probs(&probs)?;
        let mut seen = BTreeSet::new();
        for (index, o) in outcomes.iter().enumerate() {
            if !seen.insert(o) {
                return Err(EntropyError::DuplicateOutcome { index });
            }
        }
        Ok(Self { outcomes, probs })
    }

    pub fn from_pairs<I: IntoIterator<Item = (O, f64)>>(pairs: I) -> Result<Self> {
        let (outcomes, probs) = pairs.into_iter().unzip();
        Self::new(outcomes, probs)
    }

    pub fn uniform(outcomes: Vec<O>) -> Result<Self> {
        let n = outcomes.len();
        if n == 0 {
            return Err(EntropyError::EmptyDistribution);
        }
        Self::new(outcomes, vec![1.0 / n as f64; n])
    }

    pub fn point(outcome: O) -> Self {
        Self {
            outcomes: vec![outcome],
            probs: vec![1.0],
        }
    }

    pub fn outcomes(&self) -> &[O] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of `outcome`, zero when the label is absent.
    pub fn prob(&self, outcome: &O) -> f64 {
        self.outcomes
            .iter()
            .position(|o| o == outcome)
            .map_or(0.0, |i| self.probs[i])
    }

    /// Number of outcomes carrying strictly positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&O, f64)> {
        self.outcomes.iter().zip(self.probs.iter().copied())
    }

    /// Relabels outcomes with `f`; labels must stay unique.
    pub fn map_outcomes<P: Ord + Clone, F: FnMut(&O) -> P>(&self, f: F) -> Result<Distribution<P>> {
        Distribution::new(self.outcomes.iter().map(f).collect(), self.probs.clone())
    }
}

fn validate_probs(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(EntropyError::EmptyDistribution);
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(EntropyError::InvalidProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(EntropyError::NotNormalized { sum });
    }
    Ok(probs.iter().map(|p| p / sum).collect())
}

/// Shannon entropy in bits of a raw probability vector, skipping zero entries.
///
/// No validation is performed; callers hand in vectors they already trust.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // a point mass can come out as -0.0
    h.max(0.0)
}

pub fn shannon_entropy<O>(d: &Distribution<O>) -> EntropyBits {
    EntropyBits(entropy_bits(&d.probs))
}

/// Validating variant of [`shannon_entropy`] for raw probability vectors.
pub fn shannon_entropy_of(probs: &[f64]) -> Result<EntropyBits> {
    validate_probs(probs).map(|p| EntropyBits(entropy_bits(&p)))
}

/// Rényi entropy of order `alpha` in bits, `(1/(1-alpha)) log2 sum p^alpha`.
pub fn renyi_entropy<O>(d: &Distribution<O>, alpha: f64) -> Result<EntropyBits> {
    if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
        return Err(EntropyError::InvalidAlpha(alpha));
    }
    let power_sum: f64 = d
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.powf(alpha))
        .sum();
    let h = power_sum.log2() / (1.0 - alpha);
    Ok(EntropyBits(h.max(0.0)))
}

/// Occurrence counts of sampled outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleCounts<O: Ord> {
    counts: BTreeMap<O, u64>,
    total: u64,
}

impl<O: Ord> Default for SampleCounts<O> {
    fn default() -> Self {
        Self {
            counts: BTreeMap::new(),
            total: 0,
        }
    }
}

impl<O: Ord> SampleCounts<O> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts<I: IntoIterator<Item = (O, u64)>>(counts: I) -> Self {
        let mut c = Self::new();
        for (o, n) in counts {
            c.add_n(o, n);
        }
        c
    }

    pub fn add(&mut self, outcome: O) {
        self.add_n(outcome, 1);
    }

    pub fn add_n(&mut self, outcome: O, n: u64) {
        *self.counts.entry(outcome).or_insert(0) += n;
        self.total += n;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, outcome: &O) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    /// Number of distinct outcomes observed at least once.
    pub fn observed_support(&self) -> usize {
        self.counts.values().filter(|&&n| n > 0).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&O, u64)> {
        self.counts.iter().map(|(o, &n)| (o, n))
    }

    /// Count vector in label order.
    pub fn count_vector(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }
}

impl<O: Ord> FromIterator<O> for SampleCounts<O> {
    fn from_iter<I: IntoIterator<Item = O>>(iter: I) -> Self {
        let mut c = Self::new();
        for o in iter {
            c.add(o);
        }
        c
    }
}

/// Shannon entropy in bits of the frequencies `counts / total`.
pub(crate) fn plugin_entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    h.max(0.0)
}

/// Maximum-likelihood (plug-in) entropy estimate.
pub fn plugin_entropy<O: Ord>(c: &SampleCounts<O>) -> Result<EntropyBits> {
    if c.total == 0 {
        return Err(EntropyError::EmptyCounts);
    }
    Ok(EntropyBits(plugin_entropy_of_counts(&c.count_vector())))
}

/// Plug-in estimate plus the Miller–Madow bias correction `(K-1)/(2 N ln 2)`.
///
/// The corrected value is reported as is, even when it exceeds `log2 K`.
pub fn miller_madow_entropy<O: Ord>(c: &SampleCounts<O>) -> Result<EntropyBits> {
    let plugin = plugin_entropy(c)?.0;
    let k = c.observed_support() as f64;
    let correction = (k - 1.0) / (2.0 * c.total as f64 * std::f64::consts::LN_2);
    Ok(EntropyBits(plugin + correction))
}

/// Product distribution over pairs, ordered row-major by the first factor.
pub fn joint_product<A: Ord + Clone, B: Ord + Clone>(
    d1: &Distribution<A>,
    d2: &Distribution<B>,
) -> Distribution<(A, B)> {
    let mut outcomes = Vec::with_capacity(d1.len() * d2.len());
    let mut probs = Vec::with_capacity(d1.len() * d2.len());
    for (a, p) in d1.iter() {
        for (b, q) in d2.iter() {
            outcomes.push((a.clone(), b.clone()));
            probs.push(p * q);
        }
    }
    // factors are valid and labels are pairwise distinct
    Distribution { outcomes, probs }
}
