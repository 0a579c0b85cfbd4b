use std::collections::BTreeSet;

use popweave_core::fixtures::{family_graph, family_rules, family_types};
use popweave_core::io::{Endpoint, Hop, Orientation, TransitiveRule};
use popweave_core::transitive::{apply_all_rules, apply_transitive_rule, path_matches};
use popweave_core::{Provenance, SocialGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairs(g: &SocialGraph, t: usize) -> BTreeSet<(usize, usize)> {
    g.links(t).map(|l| (l.a, l.b)).collect()
}

#[test]
fn family_fixture_matches_hand_enumeration() {
    let mut g = family_graph();
    let counts = apply_all_rules(&family_rules(), &mut g, 0).unwrap();
    assert_eq!(counts, vec![5, 4]);
    assert_eq!(pairs(&g, 2), [(0, 2), (0, 3), (0, 4), (0, 6), (0, 7)].into_iter().collect());
    assert_eq!(pairs(&g, 3), [(2, 3), (2, 4), (3, 4), (6, 7)].into_iter().collect());
    assert!(g.links(2).all(|l| l.provenance == Provenance::Transitive));
}

#[test]
fn closing_twice_adds_nothing() {
    let mut g = family_graph();
    apply_all_rules(&family_rules(), &mut g, 0).unwrap();
    let again = apply_all_rules(&family_rules(), &mut g, 1).unwrap();
    assert_eq!(again, vec![0, 0]);
}

#[test]
fn end_orientation_reverses_created_links() {
    let mut g = family_graph();
    let mut rule = family_rules().remove(0);
    rule.create_directed_from = Endpoint::End;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    apply_transitive_rule(&rule, &mut g, &mut rng).unwrap();
    assert!(pairs(&g, 2).iter().all(|&(a, b)| b == 0 && a != 0));
}

#[test]
fn half_probability_is_binomial() {
    // One mother of 50 children: 1225 sibling pairs, each tried once.
    let mut g = SocialGraph::new(51, family_types());
    for c in 1..=50 {
        g.insert(1, 0, c, Provenance::Sampled);
    }
    let rule = TransitiveRule {
        create: "siblings".into(),
        hop1: Hop::new("motherOf", Orientation::Backward),
        hop2: Hop::new("motherOf", Orientation::Forward),
        probability: 0.5,
        create_directed_from: Endpoint::Start,
    };
    assert_eq!(path_matches(&rule, &g).unwrap().len(), 50 * 49);
    let m = 1225.0;
    let sigma = (m * 0.25_f64).sqrt();
    for seed in 0..10 {
        let mut h = g.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = apply_transitive_rule(&rule, &mut h, &mut rng).unwrap().len() as f64;
        assert!((k - m / 2.0).abs() <= 4.0 * sigma, "seed {seed}: {k}");
    }
}
