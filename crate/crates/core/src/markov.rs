//! Finite Markov chains with interventions, a small [`SystemModel`] used as a
//! reference testbed.
//!
//! The chain sits in a (possibly uncertain) state at `t0`. An event is an
//! intervention on that state; afterwards the chain evolves freely for
//! `T - t0` steps.

use rand::Rng;

use crate::entropy::{Distribution, NORMALIZATION_TOLERANCE};
use crate::potential::{Event, Horizon, PotentialError, Result, SystemModel};

#[derive(Debug, Clone, PartialEq)]
pub enum Intervention {
    /// Put the chain in a known state.
    Clamp(usize),
    /// Replace the state by a uniform draw over all states.
    Randomize,
    /// Replace the state by a draw from the given law.
    Reset(Vec<f64>),
    /// Deterministically relabel the state, `s -> map[s]`.
    Remap(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct MarkovChain {
    transition: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    initial: Vec<f64>,
    initial_cdf: Vec<f64>,
    interventions: Vec<(Event, Intervention)>,
}

fn check_law(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n {
        return Err(PotentialError::Model(format!(
            "{what} has {} entries, expected {n}",
            p.len()
        )));
    }
    if p.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(PotentialError::Model(format!(
            "{what} has an invalid probability"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(PotentialError::Model(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl MarkovChain {
    pub fn new(
        transition: Vec<Vec<f64>>,
        initial: Vec<f64>,
        interventions: Vec<(Event, Intervention)>,
    ) -> Result<Self> {
        let n = transition.len();
        if n == 0 {
            return Err(PotentialError::Model("chain has no states".into()));
        }
        for (i, row) in transition.iter().enumerate() {
            check_law(row, n, &format!("transition row {i}"))?;
        }
        check_law(&initial, n, "initial law")?;
        for (event, iv) in &interventions {
            let ok = match iv {
                Intervention::Clamp(s) => *s < n,
                Intervention::Randomize => true,
                Intervention::Reset(p) => check_law(p, n, &event.id).is_ok(),
                Intervention::Remap(m) => m.len() == n && m.iter().all(|&s| s < n),
            };
            if !ok {
                return Err(PotentialError::Model(format!(
                    "intervention `{}` is malformed",
                    event.id
                )));
            }
        }
        let mut ids: Vec<&str> = interventions.iter().map(|(e, _)| e.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(PotentialError::DuplicateEvent(w[0].to_string()));
        }
        let rows = transition.iter().map(|r| cumulative(r)).collect();
        Ok(Self {
            transition,
            cumulative: rows,
            initial_cdf: cumulative(&initial),
            initial,
            interventions,
        })
    }

    /// Two states that swap with probability `flip` each step. Events:
    /// `clamp-0`, `clamp-1` and `randomize`.
    pub fn two_state_flip(flip: f64, initial: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip) {
            return Err(PotentialError::Model(format!(
                "flip probability {flip} outside [0,1]"
            )));
        }
        Self::new(
            vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]],
            initial,
            vec![
                (
                    Event::new("clamp-0", "set state to 0"),
                    Intervention::Clamp(0),
                ),
                (
                    Event::new("clamp-1", "set state to 1"),
                    Intervention::Clamp(1),
                ),
                (
                    Event::new("randomize", "redraw state uniformly"),
                    Intervention::Randomize,
                ),
            ],
        )
    }

    /// Deterministic successor map started from a known state, with one
    /// `clamp-<s>` event per state.
    pub fn deterministic(next: Vec<usize>, start: usize) -> Result<Self> {
        let n = next.len();
        if start >= n || next.iter().any(|&s| s >= n) {
            return Err(PotentialError::Model("successor out of range".into()));
        }
        let transition = next
            .iter()
            .map(|&s| {
                let mut row = vec![0.0; n];
                row[s] = 1.0;
                row
            })
            .collect();
        let mut initial = vec![0.0; n];
        initial[start] = 1.0;
        let interventions = (0..n)
            .map(|s| (Event::new(format!("clamp-{s}"), ""), Intervention::Clamp(s)))
            .collect();
        Self::new(transition, initial, interventions)
    }

    pub fn num_states(&self) -> usize {
        self.transition.len()
    }

    fn intervention(&self, event: &Event) -> Result<&Intervention> {
        self.interventions
            .iter()
            .find(|(e, _)| e.id == event.id)
            .map(|(_, iv)| iv)
            .ok_or_else(|| PotentialError::EventNotAdmissible(event.id.clone()))
    }

    /// Law of the state at `t0` right after `event` (or unchanged for `None`).
    pub fn state_after(&self, event: Option<&Event>) -> Result<Vec<f64>> {
        let n = self.num_states();
        let Some(event) = event else {
            return Ok(self.initial.clone());
        };
        Ok(match self.intervention(event)? {
            Intervention::Clamp(s) => {
                let mut p = vec![0.0; n];
                p[*s] = 1.0;
                p
            }
            Intervention::Randomize => vec![1.0 / n as f64; n],
            Intervention::Reset(p) => p.clone(),
            Intervention::Remap(m) => {
                let mut p = vec![0.0; n];
                for (s, &q) in self.initial.iter().enumerate() {
                    p[m[s]] += q;
                }
                p
            }
        })
    }

    /// One exact step of the chain.
    pub fn step(&self, p: &[f64]) -> Vec<f64> {
        let n = self.num_states();
        let mut next = vec![0.0; n];
        for (row, &mass) in self.transition.iter().zip(p) {
            if mass == 0.0 {
                continue;
            }
            for (slot, &q) in next.iter_mut().zip(row) {
                *slot += mass * q;
            }
        }
        next
    }
}

impl SystemModel for MarkovChain {
    type Outcome = usize;

    fn event_space(&self) -> Vec<Event> {
        self.interventions.iter().map(|(e, _)| e.clone()).collect()
    }

    fn exact_future_distribution(
        &self,
        event: Option<&Event>,
        horizon: &Horizon,
    ) -> Result<Distribution<usize>> {
        let mut p = self.state_after(event)?;
        for _ in 0..horizon.lead() {
            p = self.step(&p);
        }
        // the push-forward of a valid law stays normalized up to rounding
        let sum: f64 = p.iter().sum();
        let p = p.into_iter().map(|x| x / sum).collect();
        Ok(Distribution::new((0..self.num_states()).collect(), p)?)
    }

    fn sample_future_outcome<R: Rng + ?Sized>(
        &self,
        event: Option<&Event>,
        horizon: &Horizon,
        rng: &mut R,
    ) -> Result<usize> {
        let n = self.num_states();
        let mut state = match event {
            None => draw(&self.initial_cdf, rng),
            Some(e) => match self.intervention(e)? {
                Intervention::Clamp(s) => *s,
                Intervention::Randomize => rng.random_range(0..n),
                Intervention::Reset(p) => draw(&cumulative(p), rng),
                Intervention::Remap(m) => m[draw(&self.initial_cdf, rng)],
            },
        };
        for _ in 0..horizon.lead() {
            state = draw(&self.cumulative[state], rng);
        }
        Ok(state)
    }
}
