//! Entropic potential of discrete events.
//!
//! The entropic potential `Z(T, A)` measures how an event `A` at time `t0`
//! shifts the entropy of a system's state at a later time `T`. Negative values
//! mark uncertainty-reducing (beneficial) events, positive values harmful ones.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`entropy`] | distributions, Shannon / Rényi entropy, plug-in and Miller–Madow estimators |
//! | [`potential`] | pre/post and counterfactual `Z`, exact and Monte Carlo back-ends, ranking |
//! | [`markov`] | finite Markov chains with interventions |
//! | [`mdp`] | stochastic grid-world, exact push-forward, trajectory sampling |
//! | [`rl`] | tabular Q-learning with entropic-potential reward shaping |
//! | [`bayes`] | grid posteriors, expected and realized `Z` of observations |
//! | [`anomaly`] | streaming detector scoring events by their `Z` |

pub mod anomaly;
pub mod bayes;
pub mod entropy;
pub mod markov;
pub mod mdp;
pub mod potential;
pub mod rl;

pub use entropy::{Distribution, EntropyBits, EntropyError, SampleCounts};
pub use potential::{
    Backend, Baseline, BaselineRule, EstimatorConfig, Event, EventClass, Horizon, Method,
    PotentialError, SystemModel, ZEstimate,
};
