//! Small networks, graphs and scenario paths shared by tests, benchmarks
//! and the demo.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bn::{BayesianNetwork, Evidence, Variable};
use crate::graph::{LinkTypeInfo, Provenance, SocialGraph};
use crate::io::{Endpoint, Hop, LinkKind, Orientation, TransitiveRule};

/// A ∈ {0,1} with prior [0.6, 0.4]; B | A with rows [0.7, 0.3] and [0.2, 0.8].
pub fn tiny_variables() -> Vec<Variable> {
    vec![
        Variable::root("A", &["0", "1"], vec![0.6, 0.4]),
        Variable::new("B", &["0", "1"], &["A"], vec![vec![0.7, 0.3], vec![0.2, 0.8]]),
    ]
}

pub fn tiny() -> BayesianNetwork {
    BayesianNetwork::new(tiny_variables()).expect("tiny network is valid")
}

/// Root directory of the example scenarios shipped with the workspace.
pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn bundled_scenario_path() -> PathBuf {
    scenarios_dir().join("kenya-style/kenya.scenario.json")
}

pub fn inconsistent_scenario_path() -> PathBuf {
    scenarios_dir().join("inconsistent/inconsistent.scenario.json")
}

/// A random valid network: variables are declared in topological order,
/// each with up to `max_parents` earlier parents and a domain of 1 to
/// `max_card` labels. Some CPT entries are zero so that evidence can be
/// impossible.
pub fn random_network<R: Rng + ?Sized>(
    rng: &mut R,
    max_vars: usize,
    max_card: usize,
    max_parents: usize,
) -> BayesianNetwork {
    let n = rng.random_range(1..=max_vars);
    let mut vars: Vec<Variable> = Vec::with_capacity(n);
    for i in 0..n {
        let card = rng.random_range(1..=max_card);
        let mut earlier: Vec<usize> = (0..i).collect();
        earlier.shuffle(rng);
        let k = rng.random_range(0..=max_parents.min(i));
        let parents: Vec<usize> = earlier.into_iter().take(k).collect();
        let rows: usize = parents.iter().map(|&p| vars[p].domain.len()).product();
        let cpt = (0..rows)
            .map(|_| {
                let mut row: Vec<f64> = (0..card)
                    .map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random::<f64>() + 0.01 })
                    .collect();
                if row.iter().all(|&x| x == 0.0) {
                    row[rng.random_range(0..card)] = 1.0;
                }
                let total: f64 = row.iter().sum();
                row.iter().map(|x| x / total).collect()
            })
            .collect();
        let domain: Vec<String> = (0..card).map(|s| format!("s{s}")).collect();
        vars.push(Variable {
            name: format!("v{i}"),
            domain,
            parents: parents.iter().map(|&p| format!("v{p}")).collect(),
            cpt,
        });
    }
    // Declaration order need not be topological.
    vars.shuffle(rng);
    BayesianNetwork::new(vars).expect("random network is valid")
}

/// Evidence on a random subset of variables, taken from one prior sample
/// so that it always has positive probability.
pub fn random_consistent_evidence<R: Rng + ?Sized>(bn: &BayesianNetwork, rng: &mut R) -> Evidence {
    let sample = bn.sample_prior(rng);
    let mut ev = bn.empty_evidence();
    for (v, &s) in sample.states().iter().enumerate() {
        if rng.random_bool(0.4) {
            ev.set_state(v, s);
        }
    }
    ev
}

/// Link types of the family fixture: spouses, motherOf, fatherOf, siblings.
pub fn family_types() -> Vec<LinkTypeInfo> {
    let info = |name: &str, directed, kind| LinkTypeInfo { name: name.into(), directed, kind };
    vec![
        info("spouses", false, LinkKind::Matching),
        info("motherOf", true, LinkKind::Matching),
        info("fatherOf", true, LinkKind::Transitive),
        info("siblings", false, LinkKind::Transitive),
    ]
}

/// Ten agents in two households. Agent 0 has two wives, 1 and 5; agent 1
/// is mother of 2, 3 and 4, agent 5 of 6 and 7; agents 8 and 9 are a
/// childless couple. Closing it gives 5 fatherOf links and 4 sibling pairs.
pub fn family_graph() -> SocialGraph {
    let mut g = SocialGraph::new(10, family_types());
    for (a, b) in [(0, 1), (0, 5), (8, 9)] {
        g.insert(0, a, b, Provenance::Sampled);
    }
    for (m, c) in [(1, 2), (1, 3), (1, 4), (5, 6), (5, 7)] {
        g.insert(1, m, c, Provenance::Sampled);
    }
    g
}

/// fatherOf from a spouse's children, then full siblings through a shared
/// mother.
pub fn family_rules() -> Vec<TransitiveRule> {
    vec![
        TransitiveRule {
            create: "fatherOf".into(),
            hop1: Hop::new("spouses", Orientation::Either),
            hop2: Hop::new("motherOf", Orientation::Forward),
            probability: 1.0,
            create_directed_from: Endpoint::Start,
        },
        TransitiveRule {
            create: "siblings".into(),
            hop1: Hop::new("motherOf", Orientation::Backward),
            hop2: Hop::new("motherOf", Orientation::Forward),
            probability: 1.0,
            create_directed_from: Endpoint::Start,
        },
    ]
}
