//! Exact inference by variable elimination, plus brute-force enumeration
//! of the joint distribution for small networks.

use super::factor::{advance, Factor};
use super::{Assignment, BayesianNetwork, BnError, Evidence, ZERO_SUPPORT_THRESHOLD};

/// Default cap on the number of joint states [`BayesianNetwork::enumerate_joint`] visits.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Normalized posterior over several variables.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    /// Variables in ascending index order.
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    /// Row-major probabilities, last variable fastest.
    pub probs: Vec<f64>,
    /// Probability of the evidence the table was conditioned on.
    pub evidence_probability: f64,
}

impl JointTable {
    /// Decodes flat entry `i` into one state per variable in `vars`.
    pub fn states_at(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.vars.len()];
        for k in (0..self.vars.len()).rev() {
            out[k] = i % self.cards[k];
            i /= self.cards[k];
        }
        out
    }

    /// Entries with nonzero probability, as (states, probability).
    pub fn support(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (self.states_at(i), p))
    }
}

impl BayesianNetwork {
    /// CPT of `var` as a factor over `var` and its parents.
    pub(crate) fn cpt_factor(&self, var: usize) -> Factor {
        let mut scope: Vec<usize> = self.parent_indices(var).to_vec();
        scope.push(var);
        let cards: Vec<usize> = scope.iter().map(|&v| self.cardinality(v)).collect();
        Factor::from_table(&scope, &cards, self.tables[var].clone())
    }

    /// Variables needed to answer a query over `keep` under `ev`: the
    /// ancestral closure of the query and evidence variables.
    fn relevant(&self, ev: &Evidence, keep: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack: Vec<usize> = keep.iter().copied().chain(ev.observed().map(|(v, _)| v)).collect();
        while let Some(v) = stack.pop() {
            if !mark[v] {
                mark[v] = true;
                stack.extend_from_slice(self.parent_indices(v));
            }
        }
        mark
    }

    /// Unnormalized factor over the unobserved members of `keep`, i.e.
    /// p(keep, ev) with every other variable summed out.
    fn eliminate(&self, ev: &Evidence, keep: &[usize]) -> Factor {
        let relevant = self.relevant(ev, keep);
        let mut factors: Vec<Factor> = Vec::new();
        for v in (0..self.len()).filter(|&v| relevant[v]) {
            let mut f = self.cpt_factor(v);
            for &u in f.vars().to_vec().iter() {
                if let Some(s) = ev.get(u) {
                    f = f.reduce(u, s);
                }
            }
            factors.push(f);
        }

        let mut hidden: Vec<usize> = (0..self.len())
            .filter(|&v| relevant[v] && ev.get(v).is_none() && !keep.contains(&v))
            .collect();

        while !hidden.is_empty() {
            // Min-degree heuristic: fewest neighbours in the current interaction graph.
            let (pos, &var) = hidden
                .iter()
                .enumerate()
                .min_by_key(|&(_, &h)| {
                    let mut nb: Vec<usize> = factors
                        .iter()
                        .filter(|f| f.contains(h))
                        .flat_map(|f| f.vars().iter().copied())
                        .filter(|&u| u != h)
                        .collect();
                    nb.sort_unstable();
                    nb.dedup();
                    (nb.len(), h)
                })
                .expect("non-empty");
            hidden.swap_remove(pos);

            let (with, without): (Vec<Factor>, Vec<Factor>) =
                factors.into_iter().partition(|f| f.contains(var));
            factors = without;
            if let Some(prod) = with.into_iter().reduce(|a, b| a.product(&b)) {
                factors.push(prod.marginalize(var));
            }
        }

        factors
            .into_iter()
            .reduce(|a, b| a.product(&b))
            .unwrap_or_else(|| Factor::scalar(1.0))
    }

    /// p(ev). Zero exactly when the evidence is inconsistent with the network.
    pub fn probability_of_evidence(&self, ev: &Evidence) -> f64 {
        if ev.is_empty() {
            return 1.0;
        }
        self.eliminate(ev, &[]).total()
    }

    /// p(target | ev) by name.
    pub fn posterior_marginal(&self, ev: &Evidence, target: &str) -> Result<Vec<f64>, BnError> {
        let var = self.require(target)?;
        self.posterior_marginal_of(ev, var)
    }

    /// p(var | ev) by index.
    pub fn posterior_marginal_of(&self, ev: &Evidence, var: usize) -> Result<Vec<f64>, BnError> {
        if let Some(s) = ev.get(var) {
            if self.probability_of_evidence(ev) <= 0.0 {
                return Err(BnError::ImpossibleEvidence);
            }
            let mut out = vec![0.0; self.cardinality(var)];
            out[s] = 1.0;
            return Ok(out);
        }
        let table = self.posterior_joint(ev, &[var])?;
        Ok(table.probs)
    }

    /// Joint posterior over the unobserved members of `targets`.
    pub fn posterior_joint(&self, ev: &Evidence, targets: &[usize]) -> Result<JointTable, BnError> {
        let f = self.eliminate(ev, targets);
        let z = f.total();
        if z <= 0.0 {
            return Err(BnError::ImpossibleEvidence);
        }
        let vars = f.vars().to_vec();
        let cards = f.cards().to_vec();
        let mut probs: Vec<f64> = f.into_values().into_iter().map(|x| x / z).collect();
        let mut dropped = false;
        for p in probs.iter_mut() {
            if *p < ZERO_SUPPORT_THRESHOLD && *p != 0.0 {
                *p = 0.0;
                dropped = true;
            }
        }
        if dropped {
            let z2: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= z2);
        }
        Ok(JointTable {
            vars,
            cards,
            probs,
            evidence_probability: z,
        })
    }

    /// Number of joint states, saturating at `u128::MAX`.
    pub fn state_count(&self) -> u128 {
        (0..self.len()).fold(1u128, |acc, v| acc.saturating_mul(self.cardinality(v) as u128))
    }

    /// Every full assignment with its joint probability, in odometer order
    /// (last variable fastest).
    pub fn enumerate_joint(&self, cap: u128) -> Result<Vec<(Assignment, f64)>, BnError> {
        let states = self.state_count();
        if states > cap {
            return Err(BnError::StateSpaceTooLarge { states, cap });
        }
        let cards: Vec<usize> = (0..self.len()).map(|v| self.cardinality(v)).collect();
        let mut idx = vec![0usize; self.len()];
        let mut out = Vec::with_capacity(states as usize);
        for _ in 0..states {
            let a = Assignment(idx.clone());
            let p = self.joint_probability(&a);
            out.push((a, p));
            advance(&mut idx, &cards);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use crate::fixtures::tiny;
    use super::super::Variable;
    use super::*;

    #[test]
    fn enumerate_tiny() {
        let table = tiny().enumerate_joint(DEFAULT_ENUMERATION_CAP).unwrap();
        let probs: Vec<f64> = table.iter().map(|(_, p)| *p).collect();
        for (p, e) in probs.iter().zip([0.42, 0.18, 0.08, 0.32]) {
            assert!((p - e).abs() < 1e-15);
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enumerate_degenerate_and_cap() {
        let one = BayesianNetwork::new(vec![Variable::root("x", &["x"], vec![1.0])]).unwrap();
        assert_eq!(one.enumerate_joint(DEFAULT_ENUMERATION_CAP).unwrap(), vec![(Assignment(vec![0]), 1.0)]);

        let wide = BayesianNetwork::new(
            (0..21)
                .map(|i| Variable::root(format!("v{i}"), &["0", "1"], vec![0.5, 0.5]))
                .collect(),
        )
        .unwrap();
        match wide.enumerate_joint(DEFAULT_ENUMERATION_CAP) {
            Err(BnError::StateSpaceTooLarge { states, .. }) => assert_eq!(states, 1 << 21),
            other => panic!("expected cap failure, got {other:?}"),
        }
    }

    #[test]
    fn tiny_posteriors() {
        let bn = tiny();
        let pb = bn.posterior_marginal(&bn.empty_evidence(), "B").unwrap();
        assert!((pb[0] - 0.5).abs() < 1e-12 && (pb[1] - 0.5).abs() < 1e-12);

        let ev = bn.evidence([("B", "1")]).unwrap();
        let pa = bn.posterior_marginal(&ev, "A").unwrap();
        assert!((pa[0] - 0.36).abs() < 1e-12 && (pa[1] - 0.64).abs() < 1e-12);

        let ev = bn.evidence([("A", "0")]).unwrap();
        assert_eq!(bn.posterior_marginal(&ev, "A").unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn probability_of_evidence_cases() {
        let bn = tiny();
        let ev = bn.evidence([("B", "1")]).unwrap();
        assert!((bn.probability_of_evidence(&ev) - 0.5).abs() < 1e-12);
        assert_eq!(bn.probability_of_evidence(&bn.empty_evidence()), 1.0);

        let zero = BayesianNetwork::new(vec![
            Variable::root("X", &["x", "y"], vec![0.0, 1.0]),
            Variable::new("Y", &["0", "1"], &["X"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        ])
        .unwrap();
        let ev = zero.evidence([("X", "x")]).unwrap();
        assert_eq!(zero.probability_of_evidence(&ev), 0.0);
        assert!(matches!(
            zero.posterior_marginal(&ev, "Y"),
            Err(BnError::ImpossibleEvidence)
        ));
        assert!(matches!(
            zero.posterior_marginal(&ev, "X"),
            Err(BnError::ImpossibleEvidence)
        ));
    }

    #[test]
    fn joint_posterior_over_two_variables() {
        // C is a noisy-AND of A and B; observing C=1 couples them.
        let bn = BayesianNetwork::new(vec![
            Variable::root("A", &["0", "1"], vec![0.5, 0.5]),
            Variable::root("B", &["0", "1"], vec![0.5, 0.5]),
            Variable::new(
                "C",
                &["0", "1"],
                &["A", "B"],
                vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            ),
        ])
        .unwrap();
        let ev = bn.evidence([("C", "1")]).unwrap();
        let t = bn.posterior_joint(&ev, &[1, 0]).unwrap();
        assert_eq!(t.vars, vec![0, 1]);
        assert_eq!(t.probs, vec![0.0, 0.0, 0.0, 1.0]);
        assert!((t.evidence_probability - 0.25).abs() < 1e-15);
        assert_eq!(t.support().collect::<Vec<_>>(), vec![(vec![1, 1], 1.0)]);
    }
}
