//! Discretized Bayesian inference over a coin bias.
//!
//! Beliefs live on a finite grid of parameter values in `[0, 1]`, so every
//! entropy here is a plain Shannon entropy of a probability vector. The
//! entropic potential of a data event comes in two forms:
//!
//! * realized: entropy after the update minus entropy before it, for an
//!   outcome that actually arrived;
//! * expected: predictive-weighted posterior entropy minus prior entropy, for
//!   a query that has not been performed yet (null baseline: the belief stays
//!   put). This equals minus the mutual information between the parameter and
//!   the query outcome.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::{entropy_bits, Distribution, EntropyBits, EntropyError};
use crate::potential::{by_value_then_id, Horizon, ZEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BayesError {
    #[error("grid must be non-empty, strictly increasing and inside [0,1]")]
    InvalidGrid,

    #[error("outcome `{0}` has zero probability under every grid point")]
    ZeroEvidence(Outcome),

    #[error("invalid observation model: {0}")]
    InvalidModel(String),

    #[error("unknown outcome `{0}`")]
    UnknownOutcome(String),

    #[error("no query candidates")]
    NoCandidates,

    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

pub type Result<T> = std::result::Result<T, BayesError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Heads,
    Tails,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Heads, Outcome::Tails];
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Heads => "heads",
            Outcome::Tails => "tails",
        })
    }
}

impl FromStr for Outcome {
    type Err = BayesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heads" | "h" | "1" => Ok(Outcome::Heads),
            "tails" | "t" | "0" => Ok(Outcome::Tails),
            other => Err(BayesError::UnknownOutcome(other.to_string())),
        }
    }
}

/// Likelihood of a binary observation given the coin bias `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservationModel {
    /// Flip the coin: `P(heads | theta) = theta`.
    Coin,
    /// Flip the coin and report the result through a channel that inverts it
    /// with probability `flip`.
    NoisyCoin { flip: f64 },
    /// An observation that ignores the coin: `P(heads) = p_heads`.
    Uninformative { p_heads: f64 },
}

impl ObservationModel {
    pub fn validate(&self) -> Result<()> {
        let p = match *self {
            ObservationModel::Coin => 0.0,
            ObservationModel::NoisyCoin { flip } => flip,
            ObservationModel::Uninformative { p_heads } => p_heads,
        };
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(BayesError::InvalidModel(format!("{self:?}")))
        }
    }

    pub fn likelihood(&self, theta: f64, outcome: Outcome) -> f64 {
        let heads = match *self {
            ObservationModel::Coin => theta,
            ObservationModel::NoisyCoin { flip } => flip + (1.0 - 2.0 * flip) * theta,
            ObservationModel::Uninformative { p_heads } => p_heads,
        };
        match outcome {
            Outcome::Heads => heads,
            Outcome::Tails => 1.0 - heads,
        }
    }
}

/// A candidate data acquisition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryCandidate {
    pub id: String,
    pub model: ObservationModel,
}

impl QueryCandidate {
    pub fn new(id: impl Into<String>, model: ObservationModel) -> Self {
        Self {
            id: id.into(),
            model,
        }
    }
}

/// Belief over a grid of coin biases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPosterior {
    grid: Vec<f64>,
    belief: Vec<f64>,
}

impl GridPosterior {
    pub fn new(grid: Vec<f64>, belief: Vec<f64>) -> Result<Self> {
        let increasing = grid.windows(2).all(|w| w[0] < w[1]);
        let in_range = grid.iter().all(|t| (0.0..=1.0).contains(t));
        if grid.is_empty() || !increasing || !in_range {
            return Err(BayesError::InvalidGrid);
        }
        let d = Distribution::new((0..grid.len()).collect(), belief)?;
        Ok(Self {
            grid,
            belief: d.probs().to_vec(),
        })
    }

    /// `n` equally spaced points on `[0, 1]` (a single point sits at 0.5).
    pub fn equally_spaced(n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.5],
            _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(BayesError::InvalidGrid);
        }
        Self::new(Self::equally_spaced(n), vec![1.0 / n as f64; n])
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn belief(&self) -> &[f64] {
        &self.belief
    }

    pub fn entropy(&self) -> EntropyBits {
        EntropyBits(entropy_bits(&self.belief))
    }

    /// Probability of `outcome` before observing it.
    pub fn predictive(&self, m: &ObservationModel, outcome: Outcome) -> f64 {
        self.grid
            .iter()
            .zip(&self.belief)
            .map(|(&t, &b)| b * m.likelihood(t, outcome))
            .sum()
    }
}

/// Bayes rule on the grid.
pub fn posterior_update(
    p: &GridPosterior,
    m: &ObservationModel,
    outcome: Outcome,
) -> Result<GridPosterior> {
    m.validate()?;
    let unnormalized: Vec<f64> = p
        .grid
        .iter()
        .zip(&p.belief)
        .map(|(&t, &b)| b * m.likelihood(t, outcome))
        .collect();
    let evidence: f64 = unnormalized.iter().sum();
    if evidence <= 0.0 {
        return Err(BayesError::ZeroEvidence(outcome));
    }
    // a likelihood that is flat over the support leaves the belief untouched;
    // returning it as is keeps `Z` of uninformative data exactly zero
    let mut on_support = p.grid.iter().zip(&p.belief).filter(|&(_, &b)| b > 0.0);
    if let Some((&t0, _)) = on_support.next() {
        let l0 = m.likelihood(t0, outcome);
        if on_support.all(|(&t, _)| m.likelihood(t, outcome) == l0) {
            return Ok(p.clone());
        }
    }
    Ok(GridPosterior {
        grid: p.grid.clone(),
        belief: unnormalized.into_iter().map(|x| x / evidence).collect(),
    })
}

fn one_step() -> Horizon {
    Horizon::steps(1).expect("0 < 1")
}

/// Entropy change caused by actually observing `outcome`.
pub fn realized_event_potential(
    p: &GridPosterior,
    m: &ObservationModel,
    outcome: Outcome,
) -> Result<ZEstimate> {
    let post = posterior_update(p, m, outcome)?;
    Ok(ZEstimate::exact(
        post.entropy().bits() - p.entropy().bits(),
        one_step(),
        format!("observe {outcome}"),
        "null",
    ))
}

/// Predictive-weighted posterior entropy minus prior entropy of query `q`.
pub fn expected_event_potential(p: &GridPosterior, q: &QueryCandidate) -> Result<ZEstimate> {
    q.model.validate()?;
    let prior = p.entropy().bits();
    // weighting the per-outcome changes keeps an unchanged posterior at exactly 0
    let mut expected = 0.0;
    for outcome in Outcome::ALL {
        let weight = p.predictive(&q.model, outcome);
        if weight > 0.0 {
            expected += weight * (posterior_update(p, &q.model, outcome)?.entropy().bits() - prior);
        }
    }
    Ok(ZEstimate::exact(expected, one_step(), q.id.clone(), "null"))
}

/// `I(theta; outcome)` from the joint law by the double-sum definition.
pub fn mutual_information(p: &GridPosterior, q: &QueryCandidate) -> Result<EntropyBits> {
    q.model.validate()?;
    let mut mi = 0.0;
    for outcome in Outcome::ALL {
        let marginal = p.predictive(&q.model, outcome);
        for (&t, &b) in p.grid.iter().zip(&p.belief) {
            let joint = b * q.model.likelihood(t, outcome);
            if joint > 0.0 {
                mi += joint * (joint / (b * marginal)).log2();
            }
        }
    }
    Ok(EntropyBits(mi.max(0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedQuery {
    pub query: QueryCandidate,
    pub expected_z: ZEstimate,
    pub mutual_information: EntropyBits,
}

/// Candidates sorted by expected potential, most uncertainty-reducing first;
/// ties keep id order.
pub fn rank_queries(p: &GridPosterior, qs: &[QueryCandidate]) -> Result<Vec<RankedQuery>> {
    if qs.is_empty() {
        return Err(BayesError::NoCandidates);
    }
    let mut ranked = qs
        .iter()
        .map(|q| {
            Ok(RankedQuery {
                query: q.clone(),
                expected_z: expected_event_potential(p, q)?,
                mutual_information: mutual_information(p, q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        by_value_then_id(
            (a.expected_z.value, &a.query.id),
            (b.expected_z.value, &b.query.id),
        )
    });
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> QueryCandidate {
        QueryCandidate::new("flip", ObservationModel::Coin)
    }

    /// `log2 55 - (sum_{i=1..10} i log2 i) / 55`, the posterior entropy after
    /// one head under the 11-point uniform prior.
    fn eleven_point_posterior_entropy() -> f64 {
        let s: f64 = (1..=10).map(|i| i as f64 * (i as f64).log2()).sum();
        55f64.log2() - s / 55.0
    }

    #[test]
    fn update_examples() {
        let prior = GridPosterior::uniform(11).unwrap();
        let post = posterior_update(&prior, &ObservationModel::Coin, Outcome::Heads).unwrap();
        for (i, &b) in post.belief().iter().enumerate() {
            assert!((b - (i as f64 / 10.0) / 5.5).abs() < 1e-12);
        }

        let point = GridPosterior::new(vec![0.2, 0.7], vec![0.0, 1.0]).unwrap();
        let post = posterior_update(&point, &ObservationModel::Coin, Outcome::Tails).unwrap();
        assert_eq!(post.belief(), point.belief());

        let at_zero = GridPosterior::new(vec![0.0, 0.5], vec![1.0, 0.0]).unwrap();
        assert_eq!(
            posterior_update(&at_zero, &ObservationModel::Coin, Outcome::Heads),
            Err(BayesError::ZeroEvidence(Outcome::Heads))
        );
    }

    #[test]
    fn realized_examples() {
        let prior = GridPosterior::uniform(11).unwrap();
        let z = realized_event_potential(&prior, &ObservationModel::Coin, Outcome::Heads).unwrap();
        let expected = eleven_point_posterior_entropy() - 11f64.log2();
        assert!((z.value - expected).abs() < 1e-12);
        assert!((z.value + 0.3557).abs() < 1e-4);
        assert_eq!(z.horizon.lead(), 1);

        let tails =
            realized_event_potential(&prior, &ObservationModel::Coin, Outcome::Tails).unwrap();
        assert!((tails.value - z.value).abs() < 1e-12);

        let point = GridPosterior::new(vec![0.3, 0.6], vec![1.0, 0.0]).unwrap();
        let z = realized_event_potential(&point, &ObservationModel::Coin, Outcome::Heads).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn expected_examples() {
        let prior = GridPosterior::uniform(11).unwrap();
        let z = expected_event_potential(&prior, &coin()).unwrap();
        assert!((z.value + 0.3557).abs() < 1e-4);

        let point = GridPosterior::new(vec![0.5], vec![1.0]).unwrap();
        assert_eq!(
            expected_event_potential(&point, &coin()).unwrap().value,
            0.0
        );

        let null = QueryCandidate::new("noise", ObservationModel::Uninformative { p_heads: 0.3 });
        let z = expected_event_potential(&prior, &null).unwrap();
        assert!(z.value.abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let prior = GridPosterior::uniform(11).unwrap();
        let null = QueryCandidate::new("noise", ObservationModel::Uninformative { p_heads: 0.5 });
        assert!(mutual_information(&prior, &null).unwrap().bits().abs() < 1e-12);

        let mi = mutual_information(&prior, &coin()).unwrap().bits();
        assert!((mi - 0.3557).abs() < 1e-4);

        let reveal = GridPosterior::new(vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        let mi = mutual_information(&reveal, &coin()).unwrap().bits();
        assert!((mi - reveal.entropy().bits()).abs() < 1e-12);
    }

    #[test]
    fn realized_potential_can_be_positive() {
        // confident the coin always lands heads, then it lands tails
        let grid = GridPosterior::equally_spaced(11);
        let mut w = vec![0.0; 11];
        w[10] = 0.9;
        w[9] = 0.05;
        w[5] = 0.05;
        let prior = GridPosterior::new(grid, w).unwrap();
        let z = realized_event_potential(&prior, &ObservationModel::Coin, Outcome::Tails).unwrap();
        assert!(z.value > 0.0, "{}", z.value);
    }

    #[test]
    fn ranking() {
        let prior = GridPosterior::uniform(11).unwrap();
        let null = QueryCandidate::new("a-null", ObservationModel::Uninformative { p_heads: 0.5 });
        let noisy = QueryCandidate::new("noisy", ObservationModel::NoisyCoin { flip: 0.2 });
        let ranked = rank_queries(&prior, &[null.clone(), noisy, coin()]).unwrap();
        let ids: Vec<&str> = ranked.iter().map(|r| r.query.id.as_str()).collect();
        assert_eq!(ids, ["flip", "noisy", "a-null"]);

        let dup = rank_queries(
            &prior,
            &[
                QueryCandidate::new("b", ObservationModel::Coin),
                QueryCandidate::new("a", ObservationModel::Coin),
            ],
        )
        .unwrap();
        assert_eq!(dup[0].query.id, "a");

        let single = rank_queries(&prior, std::slice::from_ref(&null)).unwrap();
        assert_eq!(single[0].query, null);
        assert_eq!(rank_queries(&prior, &[]), Err(BayesError::NoCandidates));
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(
            GridPosterior::new(vec![0.5, 0.2], vec![0.5, 0.5]),
            Err(BayesError::InvalidGrid)
        );
        assert_eq!(
            GridPosterior::new(vec![0.5, 1.2], vec![0.5, 0.5]),
            Err(BayesError::InvalidGrid)
        );
        assert!(GridPosterior::new(vec![0.1, 0.2], vec![0.5, 0.6]).is_err());
        let bad = QueryCandidate::new("x", ObservationModel::NoisyCoin { flip: 1.5 });
        assert!(expected_event_potential(&GridPosterior::uniform(3).unwrap(), &bad).is_err());
        assert_eq!("heads".parse::<Outcome>().unwrap(), Outcome::Heads);
        assert!("edge".parse::<Outcome>().is_err());
    }
}
