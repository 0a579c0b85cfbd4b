use std::collections::BTreeMap;

use popweave_core::graph::LinkTypeInfo;
use popweave_core::io::LinkKind;
use popweave_core::metrics::{derive_interaction_network, graph_stats};
use popweave_core::{Provenance, SocialGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(seed: u64) -> SocialGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=200);
    let p = rng.random_range(0.0..(8.0 / n as f64).min(1.0));
    let types = vec![
        LinkTypeInfo { name: "u".into(), directed: false, kind: LinkKind::Matching },
        LinkTypeInfo { name: "d".into(), directed: true, kind: LinkKind::Matching },
    ];
    let mut g = SocialGraph::new(n, types);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(p / 2.0) {
                g.insert(rng.random_range(0..2), a, b, Provenance::Sampled);
            }
        }
    }
    g
}

/// All-pairs and all-triples statistics from an adjacency matrix.
fn brute_force(g: &SocialGraph) -> (f64, f64, f64) {
    let n = g.agent_count();
    let mut adj = vec![vec![false; n]; n];
    for l in g.all_links() {
        adj[l.a][l.b] = true;
        adj[l.b][l.a] = true;
    }
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| adj[i][j]).count();
    let (mut triangles, mut triples) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let e = [adj[i][j], adj[j][k], adj[i][k]].iter().filter(|&&x| x).count();
                if e == 3 {
                    triangles += 1;
                    triples += 3;
                } else if e == 2 {
                    triples += 1;
                }
            }
        }
    }
    // Floyd–Warshall; the largest component (ties: smallest member).
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let size = |i: usize| (0..n).filter(|&j| d[i][j] < INF).count();
    let best = (0..n).max_by(|&a, &b| size(a).cmp(&size(b)).then(b.cmp(&a))).unwrap();
    let comp: Vec<usize> = (0..n).filter(|&j| d[best][j] < INF).collect();
    let (mut sum, mut pairs) = (0u64, 0u64);
    for &i in &comp {
        for &j in &comp {
            if i != j {
                sum += d[i][j];
                pairs += 1;
            }
        }
    }
    let density = edges as f64 / (n as f64 * (n as f64 - 1.0) / 2.0);
    let transitivity = if triples == 0 { 0.0 } else { 3.0 * triangles as f64 / triples as f64 };
    let apl = if pairs == 0 { 0.0 } else { sum as f64 / pairs as f64 };
    (density, transitivity, apl)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stats_equal_brute_force(seed in any::<u64>()) {
        let g = random_graph(seed);
        let s = graph_stats(&g, usize::MAX, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let (density, transitivity, apl) = brute_force(&g);
        prop_assert_eq!(s.density, density);
        prop_assert_eq!(s.transitivity, transitivity);
        prop_assert_eq!(s.avg_path_length, apl);
    }

    #[test]
    fn adding_a_type_never_lowers_interaction_weight(seed in any::<u64>(), w in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        let g = random_graph(seed);
        let mut weights: BTreeMap<String, f64> = [("u".to_string(), w)].into_iter().collect();
        let before = derive_interaction_network(&g, &weights).unwrap();
        weights.insert("d".into(), v);
        let after = derive_interaction_network(&g, &weights).unwrap();
        for (pair, x) in &before {
            prop_assert!(after[pair] >= *x);
        }
    }
}

#[test]
fn sampled_sources_come_from_largest_component() {
    let g = random_graph(42);
    let s = graph_stats(&g, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(s.path_sources, 5.min(s.largest_component));
    assert_eq!(s.component_sizes.iter().sum::<usize>(), g.agent_count());
}
