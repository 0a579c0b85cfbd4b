//! Graph statistics and the weighted interaction network.
//!
//! Density, transitivity and path lengths are measured on the simple
//! undirected projection of the typed graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::SocialGraph;

pub use crate::linker::matching_error;
pub use crate::population::distribution_error;

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("density is undefined for fewer than two agents (got {0})")]
    TooFewAgents(usize),
    #[error("interaction weight for `{name}` is {weight}, outside [0, 1]")]
    Weight { name: String, weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeDegreeStats {
    pub link_type: String,
    pub links: usize,
    /// Mean incident links of this type per agent.
    pub mean_degree: f64,
    /// `histogram[d]` agents have `d` incident links of this type.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub agents: usize,
    pub edges: usize,
    pub density: f64,
    pub transitivity: f64,
    pub triangles: u64,
    pub connected_triples: u64,
    pub avg_path_length: f64,
    /// BFS sources used for the path-length estimate.
    pub path_sources: usize,
    pub largest_component: usize,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
    pub mean_degree: f64,
    pub degree_histogram: Vec<usize>,
    pub per_type: Vec<TypeDegreeStats>,
}

fn histogram(degrees: &[usize]) -> Vec<usize> {
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut h = vec![0; max + 1];
    for &d in degrees {
        h[d] += 1;
    }
    h
}

/// Triangles and connected triples of a simple undirected graph given as
/// sorted adjacency lists.
pub fn triangles_and_triples(adj: &[Vec<usize>]) -> (u64, u64) {
    let count_at = |u: usize| -> u64 {
        let mut t = 0;
        for &v in adj[u].iter().filter(|&&v| v > u) {
            // |{w > v : w ∈ N(u) ∩ N(v)}| by merging sorted lists.
            let (a, b) = (&adj[u], &adj[v]);
            let (mut i, mut j) = (a.partition_point(|&w| w <= v), b.partition_point(|&w| w <= v));
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        t += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        t
    };
    #[cfg(feature = "parallel")]
    let triangles: u64 = (0..adj.len()).into_par_iter().map(count_at).sum();
    #[cfg(not(feature = "parallel"))]
    let triangles: u64 = (0..adj.len()).map(count_at).sum();
    let triples = adj
        .iter()
        .map(|l| {
            let d = l.len() as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    (triangles, triples)
}

/// Connected components as lists of nodes, largest first (ties by smallest member).
pub fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut comps = Vec::new();
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        comps.push(comp);
    }
    comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
    comps
}

/// Sum of BFS distances from `source` to every other reachable node, and
/// the number of such nodes.
fn bfs_distance_sum(adj: &[Vec<usize>], source: usize) -> (u64, u64) {
    let mut dist = vec![u32::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    let (mut sum, mut reached) = (0u64, 0u64);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                sum += dist[v] as u64;
                reached += 1;
                queue.push_back(v);
            }
        }
    }
    (sum, reached)
}

/// Mean shortest-path length from `sources` to the nodes they reach.
pub fn mean_path_length(adj: &[Vec<usize>], sources: &[usize]) -> f64 {
    #[cfg(feature = "parallel")]
    let parts: Vec<(u64, u64)> = sources.par_iter().map(|&s| bfs_distance_sum(adj, s)).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<(u64, u64)> = sources.iter().map(|&s| bfs_distance_sum(adj, s)).collect();
    let (sum, pairs) = parts
        .into_iter()
        .fold((0u64, 0u64), |(a, b), (s, r)| (a + s, b + r));
    if pairs == 0 {
        0.0
    } else {
        sum as f64 / pairs as f64
    }
}

/// Statistics of the undirected projection. The path length is averaged
/// over BFS runs from `path_sample_k` distinct sources drawn uniformly from
/// the largest component (all of it when `path_sample_k` covers it).
pub fn graph_stats<R: Rng + ?Sized>(
    graph: &SocialGraph,
    path_sample_k: usize,
    rng: &mut R,
) -> Result<GraphStats, MetricsError> {
    let n = graph.agent_count();
    if n < 2 {
        return Err(MetricsError::TooFewAgents(n));
    }
    let adj = graph.projection();
    let degrees: Vec<usize> = adj.iter().map(Vec::len).collect();
    let edges = degrees.iter().sum::<usize>() / 2;
    let (triangles, connected_triples) = triangles_and_triples(&adj);
    let comps = components(&adj);
    let largest = &comps[0];
    let sources: Vec<usize> = if path_sample_k >= largest.len() {
        largest.clone()
    } else {
        rand::seq::index::sample(rng, largest.len(), path_sample_k)
            .into_iter()
            .map(|i| largest[i])
            .collect()
    };
    let per_type = graph
        .types()
        .iter()
        .enumerate()
        .map(|(t, info)| {
            let d = graph.degrees(t);
            TypeDegreeStats {
                link_type: info.name.clone(),
                links: graph.edge_count(t),
                mean_degree: d.iter().sum::<usize>() as f64 / n as f64,
                histogram: histogram(&d),
            }
        })
        .collect();
    Ok(GraphStats {
        agents: n,
        edges,
        density: edges as f64 / (n as f64 * (n as f64 - 1.0) / 2.0),
        transitivity: if connected_triples == 0 {
            0.0
        } else {
            3.0 * triangles as f64 / connected_triples as f64
        },
        triangles,
        connected_triples,
        avg_path_length: mean_path_length(&adj, &sources),
        path_sources: sources.len(),
        largest_component: largest.len(),
        component_sizes: comps.iter().map(Vec::len).collect(),
        mean_degree: 2.0 * edges as f64 / n as f64,
        degree_histogram: histogram(&degrees),
        per_type,
    })
}

/// Undirected pair → probability that the two agents interact.
pub type InteractionNetwork = BTreeMap<(usize, usize), f64>;

/// Noisy-or of per-type interaction probabilities over the types linking
/// each pair. Types missing from `weights` count as 0; zero-weight pairs
/// are omitted.
pub fn derive_interaction_network(
    graph: &SocialGraph,
    weights: &BTreeMap<String, f64>,
) -> Result<InteractionNetwork, MetricsError> {
    for (name, &w) in weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(MetricsError::Weight {
                name: name.clone(),
                weight: w,
            });
        }
    }
    let mut types_of: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    for link in graph.all_links() {
        let key = (link.a.min(link.b), link.a.max(link.b));
        types_of.entry(key).or_default().insert(link.link_type);
    }
    let mut net = InteractionNetwork::new();
    for (pair, types) in types_of {
        let miss: f64 = types
            .iter()
            .map(|&t| 1.0 - weights.get(&graph.types()[t].name).copied().unwrap_or(0.0))
            .product();
        let w = 1.0 - miss;
        if w > 0.0 {
            net.insert(pair, w);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::{LinkTypeInfo, Provenance};
    use crate::io::LinkKind;

    fn typed(n: usize, names: &[&str]) -> SocialGraph {
        SocialGraph::new(
            n,
            names
                .iter()
                .map(|s| LinkTypeInfo { name: s.to_string(), directed: false, kind: LinkKind::Matching })
                .collect(),
        )
    }

    #[test]
    fn triangle_and_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut g = typed(3, &["t"]);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            g.insert(0, a, b, Provenance::Sampled);
        }
        let s = graph_stats(&g, 10, &mut rng).unwrap();
        assert_eq!((s.density, s.transitivity, s.avg_path_length), (1.0, 1.0, 1.0));
        assert_eq!(s.degree_histogram, vec![0, 0, 3]);

        let mut p = typed(3, &["t"]);
        p.insert(0, 0, 1, Provenance::Sampled);
        p.insert(0, 1, 2, Provenance::Sampled);
        let s = graph_stats(&p, 10, &mut rng).unwrap();
        assert_eq!(s.transitivity, 0.0);
        assert!((s.avg_path_length - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_agent_is_an_error() {
        let g = typed(1, &["t"]);
        assert!(matches!(
            graph_stats(&g, 1, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(MetricsError::TooFewAgents(1))
        ));
    }

    #[test]
    fn interaction_weights_combine_by_noisy_or() {
        let mut g = typed(3, &["siblings", "friends", "colleagues"]);
        g.insert(0, 0, 1, Provenance::Sampled);
        g.insert(1, 1, 0, Provenance::Sampled);
        g.insert(2, 1, 2, Provenance::Sampled);
        let w: BTreeMap<String, f64> = [("siblings", 0.5), ("friends", 0.5), ("colleagues", 0.3)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let net = derive_interaction_network(&g, &w).unwrap();
        assert!((net[&(0, 1)] - 0.75).abs() < 1e-15);
        assert!((net[&(1, 2)] - 0.3).abs() < 1e-15);

        let zeros: BTreeMap<String, f64> = w.keys().map(|k| (k.clone(), 0.0)).collect();
        assert!(derive_interaction_network(&g, &zeros).unwrap().is_empty());
        assert!(derive_interaction_network(&g, &BTreeMap::new()).unwrap().is_empty());

        let bad: BTreeMap<String, f64> = [("friends".to_string(), 1.5)].into_iter().collect();
        assert!(derive_interaction_network(&g, &bad).is_err());
    }
}
