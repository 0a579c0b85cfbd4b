use popweave_core::fixtures::{bundled_scenario_path, tiny};
use popweave_core::load_scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

#[test]
fn tiny_network_sampling_converges() {
    let bn = tiny();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 200_000;
    let b1 = (0..n).filter(|_| bn.sample_prior(&mut rng).states()[1] == 1).count();
    let p_b = b1 as f64 / n as f64;
    assert!((p_b - 0.5).abs() <= 0.005, "p(B=1) = {p_b}");

    let ev = bn.evidence([("B", "1")]).unwrap();
    let a1 = (0..n)
        .filter(|_| bn.sample_assignment(&ev, &mut rng).unwrap().states()[0] == 1)
        .count();
    let p_a = a1 as f64 / n as f64;
    assert!((p_a - 0.64).abs() <= 0.005, "p(A=1 | B=1) = {p_a}");
}

#[test]
fn sampled_assignments_respect_evidence() {
    let bn = tiny();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ev = bn.evidence([("A", "0")]).unwrap();
    for _ in 0..1000 {
        assert!(ev.agrees_with(&bn.sample_assignment(&ev, &mut rng).unwrap()));
    }
}

/// Peer prototypes drawn from the cached posterior table follow the same
/// distribution as conditioned sampling of the full matching network.
#[test]
fn prototype_table_agrees_with_conditioned_sampling() {
    let scenario = load_scenario(&bundled_scenario_path()).unwrap();
    let t = scenario.link_type_index("friends").unwrap();
    let model = scenario.matching[t].as_ref().unwrap();
    let bn = &model.bn;
    // A 30-34 year old in the first location.
    let mut agent = vec![0; scenario.agent_bn.len()];
    let age = scenario.agent_bn.index_of("ageSlices").unwrap();
    agent[age] = scenario.agent_bn.state_of(age, "30-34").unwrap();
    let key = model.a1_key(&agent);
    let table = model.prototype_table(&key).unwrap();
    let ev = model.evidence_for(Some(&key), None);

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 20_000;
    let mut freq: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..n {
        let a = bn.sample_assignment(&ev, &mut rng).unwrap();
        let k: Vec<usize> = model.a2.iter().map(|&(m, _)| a.states()[m]).collect();
        *freq.entry(k).or_default() += 1;
    }
    let mut tv = 0.0;
    for (k, p) in table.keys.iter().zip(&table.probs) {
        tv += (p - *freq.get(k).unwrap_or(&0) as f64 / n as f64).abs();
    }
    let outside: usize = freq.iter().filter(|(k, _)| !table.keys.contains(k)).map(|(_, c)| c).sum();
    assert_eq!(outside, 0, "samples outside the posterior support");
    assert!(tv / 2.0 < 0.02, "total variation {}", tv / 2.0);
}
