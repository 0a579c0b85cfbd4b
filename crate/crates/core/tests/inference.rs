use popweave_core::bn::inference::DEFAULT_ENUMERATION_CAP;
use popweave_core::bn::{BayesianNetwork, BnError, Evidence};
use popweave_core::fixtures::{random_consistent_evidence, random_network, tiny};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Posterior marginal of `var` by summing the full joint.
fn enumerated_marginal(bn: &BayesianNetwork, ev: &Evidence, var: usize) -> Option<Vec<f64>> {
    let mut m = vec![0.0; bn.cardinality(var)];
    for (a, p) in bn.enumerate_joint(DEFAULT_ENUMERATION_CAP).unwrap() {
        if ev.agrees_with(&a) {
            m[a.states()[var]] += p;
        }
    }
    let z: f64 = m.iter().sum();
    (z > 0.0).then(|| m.iter().map(|x| x / z).collect())
}

fn check_network(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bn = random_network(&mut rng, 8, 3, 2);
    let ev = random_consistent_evidence(&bn, &mut rng);
    for v in 0..bn.len() {
        let oracle = enumerated_marginal(&bn, &ev, v).expect("evidence is consistent");
        let got = bn.posterior_marginal_of(&ev, v).unwrap();
        for (g, o) in got.iter().zip(&oracle) {
            // Exact inference zeroes entries below 1e-12; allow for it.
            assert!((g - o).abs() < 1e-9, "seed {seed}, var {v}: {got:?} vs {oracle:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn elimination_matches_enumeration(seed in any::<u64>()) {
        check_network(seed);
    }

    #[test]
    fn evidence_probability_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bn = random_network(&mut rng, 6, 3, 2);
        let ev = random_consistent_evidence(&bn, &mut rng);
        let oracle: f64 = bn
            .enumerate_joint(DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .into_iter()
            .filter(|(a, _)| ev.agrees_with(a))
            .map(|(_, p)| p)
            .sum();
        prop_assert!((bn.probability_of_evidence(&ev) - oracle).abs() < 1e-12);
    }

    #[test]
    fn joint_probabilities_sum_to_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bn = random_network(&mut rng, 6, 3, 2);
        let total: f64 = bn.enumerate_joint(DEFAULT_ENUMERATION_CAP).unwrap().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn impossible_evidence_is_reported() {
    let mut ev = tiny().empty_evidence();
    let bn = popweave_core::BayesianNetwork::new(vec![
        popweave_core::Variable::root("A", &["0", "1"], vec![1.0, 0.0]),
        popweave_core::Variable::new("B", &["0", "1"], &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
    ])
    .unwrap();
    ev.set(&bn, "A", "1").unwrap();
    assert_eq!(bn.probability_of_evidence(&ev), 0.0);
    assert!(matches!(bn.posterior_marginal(&ev, "B"), Err(BnError::ImpossibleEvidence)));
}

#[test]
fn joint_posterior_is_normalized_and_consistent_with_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let bn = random_network(&mut rng, 6, 3, 2);
        let ev = random_consistent_evidence(&bn, &mut rng);
        let targets: Vec<usize> = (0..bn.len()).filter(|&v| ev.get(v).is_none()).take(3).collect();
        let table = bn.posterior_joint(&ev, &targets).unwrap();
        assert!((table.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (i, &t) in targets.iter().enumerate() {
            let mut m = vec![0.0; bn.cardinality(t)];
            for (states, p) in table.support() {
                m[states[i]] += p;
            }
            let direct = bn.posterior_marginal_of(&ev, t).unwrap();
            for (a, b) in m.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
