//! Exact posterior sampling.
//!
//! Variables are visited in topological order. A variable with no observed
//! descendant is drawn straight from its CPT row (its parents are already
//! fixed); any other is drawn from its exact posterior given everything
//! fixed so far, after which the drawn value joins the evidence. With empty
//! evidence this is plain ancestral sampling.

use rand::Rng;

use super::{Assignment, BayesianNetwork, BnError, Evidence};

/// Draws an index from a discrete distribution whose entries sum to ~1.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

impl BayesianNetwork {
    /// For each variable, whether some descendant (or itself) is observed.
    fn observed_below(&self, ev: &Evidence) -> Vec<bool> {
        let mut flag = vec![false; self.len()];
        for &v in self.order().iter().rev() {
            if ev.get(v).is_some() {
                flag[v] = true;
            }
            if flag[v] {
                for &p in self.parent_indices(v) {
                    flag[p] = true;
                }
            }
        }
        flag
    }

    /// Draws a full assignment from p(· | ev).
    pub fn sample_assignment<R: Rng + ?Sized>(
        &self,
        ev: &Evidence,
        rng: &mut R,
    ) -> Result<Assignment, BnError> {
        let below = self.observed_below(ev);
        if !ev.is_empty() && self.probability_of_evidence(ev) <= 0.0 {
            return Err(BnError::ImpossibleEvidence);
        }
        let mut acc = ev.clone();
        let mut states = vec![0usize; self.len()];
        for &v in self.order() {
            if let Some(s) = acc.get(v) {
                states[v] = s;
                continue;
            }
            let s = if below[v] {
                let dist = self.posterior_marginal_of(&acc, v)?;
                sample_index(&dist, rng)
            } else {
                let row = self.row_index(v, &states);
                sample_index(self.cpt_row(v, row), rng)
            };
            states[v] = s;
            acc.set_state(v, s);
        }
        Ok(Assignment(states))
    }

    /// Ancestral sample with no evidence.
    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        let mut states = vec![0usize; self.len()];
        for &v in self.order() {
            let row = self.row_index(v, &states);
            states[v] = sample_index(self.cpt_row(v, row), rng);
        }
        Assignment(states)
    }
}
