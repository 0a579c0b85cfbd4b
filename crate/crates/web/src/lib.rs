//! WebAssembly bindings for the browser demo. The example scenario is
//! compiled in; every export takes and returns JSON strings.

use std::cell::OnceCell;
use std::collections::{BTreeMap, BTreeSet};

use popweave_core::io::LoadError;
use popweave_core::metrics::graph_stats;
use popweave_core::rng::stage_stream;
use popweave_core::{generate, sweep, Scenario, SweepConfig};
use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const SCENARIO: &str = include_str!("../../../scenarios/kenya-style/kenya.scenario.json");
const FILES: [(&str, &str); 5] = [
    ("agents.bn.json", include_str!("../../../scenarios/kenya-style/agents.bn.json")),
    ("spouses.bn.json", include_str!("../../../scenarios/kenya-style/spouses.bn.json")),
    ("motherOf.bn.json", include_str!("../../../scenarios/kenya-style/motherOf.bn.json")),
    ("colleagues.bn.json", include_str!("../../../scenarios/kenya-style/colleagues.bn.json")),
    ("friends.bn.json", include_str!("../../../scenarios/kenya-style/friends.bn.json")),
];

/// Largest population the page may request.
pub const MAX_AGENTS: usize = 50_000;
/// Cap on nodes in the ego network sent back for drawing.
const EGO_LIMIT: usize = 80;

thread_local! {
    static BUNDLED: OnceCell<Scenario> = const { OnceCell::new() };
}

fn load_bundled() -> Scenario {
    Scenario::load_with(SCENARIO, "kenya.scenario.json", |name| {
        FILES
            .iter()
            .find(|(f, _)| *f == name)
            .map(|(_, text)| text.to_string())
            .ok_or_else(|| LoadError::Missing { path: name.into(), message: "not bundled".into() })
    })
    .expect("bundled scenario is valid")
}

fn with_scenario<T>(f: impl FnOnce(&Scenario) -> T) -> T {
    BUNDLED.with(|cell| f(cell.get_or_init(load_bundled)))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn error_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// Variables of the agent network: `[{name, domain, parents}]`.
pub fn variables_json() -> String {
    with_scenario(|s| {
        let vars: Vec<Value> = s
            .agent_bn
            .variables()
            .iter()
            .map(|v| json!({ "name": v.name, "domain": v.domain, "parents": v.parents }))
            .collect();
        to_json(&vars)
    })
}

/// Posterior marginals of every agent attribute given `{"name": "label"}`
/// evidence, plus p(evidence).
pub fn posterior_json(evidence: &str) -> String {
    let pairs: BTreeMap<String, String> = match serde_json::from_str(evidence) {
        Ok(p) => p,
        Err(e) => return error_json(format!("evidence must be an object of labels: {e}")),
    };
    with_scenario(|s| {
        let bn = &s.agent_bn;
        let ev = match bn.evidence(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))) {
            Ok(ev) => ev,
            Err(e) => return error_json(e),
        };
        let p = bn.probability_of_evidence(&ev);
        if p <= 0.0 {
            return error_json("the evidence is impossible under the agent network");
        }
        let mut marginals = BTreeMap::new();
        for v in 0..bn.len() {
            match bn.posterior_marginal_of(&ev, v) {
                Ok(m) => marginals.insert(bn.variable(v).name.clone(), m),
                Err(e) => return error_json(e),
            };
        }
        json!({ "evidence_probability": p, "marginals": marginals }).to_string()
    })
}

#[derive(Serialize)]
struct EgoNode {
    id: usize,
    hop: usize,
    label: String,
}

#[derive(Serialize)]
struct EgoEdge {
    a: usize,
    b: usize,
    link_type: String,
    directed: bool,
}

/// Runs the pipeline for `n` agents and reports statistics, matching errors
/// and the two-hop neighbourhood of `focus` (the best-connected agent
/// among the first hundred when `focus` is out of range).
pub fn generate_json(n: usize, seed: u64, focus: usize) -> String {
    if !(2..=MAX_AGENTS).contains(&n) {
        return error_json(format!("population size must be between 2 and {MAX_AGENTS}"));
    }
    with_scenario(|s| {
        let g = match generate(s, n, seed) {
            Ok(g) => g,
            Err(e) => return error_json(e),
        };
        let mut rng = stage_stream(seed, "stats");
        let stats = match graph_stats(&g.graph, 32, &mut rng) {
            Ok(st) => st,
            Err(e) => return error_json(e),
        };
        let adj = g.graph.projection();
        let focus = if focus < n {
            focus
        } else {
            (0..n.min(100)).max_by_key(|&a| (adj[a].len(), std::cmp::Reverse(a))).unwrap_or(0)
        };

        let mut hop = BTreeMap::from([(focus, 0usize)]);
        let mut frontier = vec![focus];
        for h in 1..=2 {
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in &adj[u] {
                    if hop.len() >= EGO_LIMIT {
                        break;
                    }
                    if let std::collections::btree_map::Entry::Vacant(e) = hop.entry(v) {
                        e.insert(h);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        let bn = &s.agent_bn;
        let attr = |a: usize, name: &str| {
            g.population.agents[a].attributes.label(bn, name).unwrap_or("?").to_string()
        };
        let nodes: Vec<EgoNode> = hop
            .iter()
            .map(|(&id, &h)| EgoNode {
                id,
                hop: h,
                label: format!("{} {} {}", attr(id, "gender"), attr(id, "ageDetail"), attr(id, "location")),
            })
            .collect();
        let inside: BTreeSet<usize> = hop.keys().copied().collect();
        let edges: Vec<EgoEdge> = g
            .graph
            .all_links()
            .filter(|l| inside.contains(&l.a) && inside.contains(&l.b))
            .map(|l| {
                let info = &g.graph.types()[l.link_type];
                EgoEdge { a: l.a, b: l.b, link_type: info.name.clone(), directed: info.directed }
            })
            .collect();
        json!({
            "n": n,
            "seed": seed,
            "focus": focus,
            "stats": stats,
            "matching": g.report.types,
            "rule_links": g.rule_counts,
            "ego": { "nodes": nodes, "edges": edges },
        })
        .to_string()
    })
}

/// Mean matching and distribution errors per size over `seeds` seeds.
pub fn error_curve_json(sizes: &[usize], seeds: usize) -> String {
    if sizes.is_empty() || seeds == 0 || sizes.iter().any(|&n| !(2..=MAX_AGENTS).contains(&n)) {
        return error_json(format!("sizes must lie in 2..={MAX_AGENTS} and seeds must be positive"));
    }
    with_scenario(|s| {
        let config = SweepConfig { sizes: sizes.to_vec(), seeds_per_size: seeds, path_sample_k: 16 };
        let rows = sweep(s, &config);
        let points: Vec<Value> = sizes
            .iter()
            .map(|&n| {
                let at: Vec<_> = rows.iter().filter(|r| r.n == n && r.error.is_none()).collect();
                let k = at.len().max(1) as f64;
                let mut per_type: BTreeMap<String, f64> = BTreeMap::new();
                for r in &at {
                    for (t, e) in &r.matching_errors {
                        *per_type.entry(t.clone()).or_default() += e / k;
                    }
                }
                json!({
                    "n": n,
                    "matching_error": at.iter().map(|r| r.mean_matching_error()).sum::<f64>() / k,
                    "distribution_error": at.iter().map(|r| r.distribution_error).sum::<f64>() / k,
                    "per_type": per_type,
                })
            })
            .collect();
        to_json(&points)
    })
}

#[wasm_bindgen]
pub fn variables() -> String {
    variables_json()
}

#[wasm_bindgen]
pub fn posterior(evidence: &str) -> String {
    posterior_json(evidence)
}

#[wasm_bindgen(js_name = generateNetwork)]
pub fn generate_network(n: usize, seed: u64, focus: usize) -> String {
    generate_json(n, seed, focus)
}

#[wasm_bindgen(js_name = errorCurve)]
pub fn error_curve(sizes: &[u32], seeds: usize) -> String {
    let sizes: Vec<usize> = sizes.iter().map(|&n| n as usize).collect();
    error_curve_json(&sizes, seeds)
}
