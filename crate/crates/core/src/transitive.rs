//! Two-hop rules: x –hop1– y –hop2– z creates a link between x and z with
//! the rule's probability.

use std::collections::HashSet;

use rand::Rng;

use crate::graph::{Provenance, SocialGraph, TypedLink};
use crate::io::{Endpoint, Orientation, TransitiveRule};
use crate::rng::stage_stream;

#[derive(Debug, thiserror::Error)]
pub enum RuleError {
    #[error("rule references unknown link type `{0}`")]
    UnknownType(String),
}

/// A path x – y – z matching a rule's two hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathMatch {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

fn neighbours<'a>(
    adj: &'a (Vec<Vec<usize>>, Vec<Vec<usize>>),
    orientation: Orientation,
    directed: bool,
    node: usize,
) -> Box<dyn Iterator<Item = usize> + 'a> {
    let (out, inc) = adj;
    match (directed, orientation) {
        (false, _) | (true, Orientation::Forward) => Box::new(out[node].iter().copied()),
        (true, Orientation::Backward) => Box::new(inc[node].iter().copied()),
        (true, Orientation::Either) => {
            // Merge both lists, dropping nodes linked both ways.
            let mut all: Vec<usize> = out[node].iter().chain(&inc[node]).copied().collect();
            all.sort_unstable();
            all.dedup();
            Box::new(all.into_iter())
        }
    }
}

/// Every path matching the rule's hops, x ascending then by neighbour order.
pub fn path_matches(rule: &TransitiveRule, graph: &SocialGraph) -> Result<Vec<PathMatch>, RuleError> {
    let t1 = graph
        .type_index(&rule.hop1.link_type)
        .ok_or_else(|| RuleError::UnknownType(rule.hop1.link_type.clone()))?;
    let t2 = graph
        .type_index(&rule.hop2.link_type)
        .ok_or_else(|| RuleError::UnknownType(rule.hop2.link_type.clone()))?;
    let d1 = graph.types()[t1].directed;
    let d2 = graph.types()[t2].directed;
    let adj1 = graph.adjacency(t1);
    let adj2 = if t2 == t1 { adj1.clone() } else { graph.adjacency(t2) };
    let mut out = Vec::new();
    for x in 0..graph.agent_count() {
        for y in neighbours(&adj1, rule.hop1.orientation, d1, x) {
            for z in neighbours(&adj2, rule.hop2.orientation, d2, y) {
                if z != x {
                    out.push(PathMatch { x, y, z });
                }
            }
        }
    }
    Ok(out)
}

/// Applies one rule, inserting and returning the new links. Each candidate
/// pair gets at most one Bernoulli trial; existing links are skipped without
/// a draw.
pub fn apply_transitive_rule<R: Rng + ?Sized>(
    rule: &TransitiveRule,
    graph: &mut SocialGraph,
    rng: &mut R,
) -> Result<Vec<TypedLink>, RuleError> {
    let created = graph
        .type_index(&rule.create)
        .ok_or_else(|| RuleError::UnknownType(rule.create.clone()))?;
    let directed = graph.types()[created].directed;
    let paths = path_matches(rule, graph)?;
    let mut tried: HashSet<(usize, usize)> = HashSet::new();
    let mut new_links = Vec::new();
    for p in paths {
        let (a, b) = match rule.create_directed_from {
            Endpoint::Start => (p.x, p.z),
            Endpoint::End => (p.z, p.x),
        };
        let key = if directed || a < b { (a, b) } else { (b, a) };
        if !tried.insert(key) || graph.contains(created, a, b) {
            continue;
        }
        if rule.probability >= 1.0 || (rule.probability > 0.0 && rng.random_bool(rule.probability)) {
            graph.insert(created, a, b, Provenance::Transitive);
            new_links.push(TypedLink {
                link_type: created,
                a: key.0,
                b: key.1,
                provenance: Provenance::Transitive,
            });
        }
    }
    Ok(new_links)
}

/// Applies rules in order; later rules see earlier rules' links. Rule `i`
/// draws from its own stream derived from `seed`.
pub fn apply_all_rules(
    rules: &[TransitiveRule],
    graph: &mut SocialGraph,
    seed: u64,
) -> Result<Vec<usize>, RuleError> {
    let mut counts = Vec::with_capacity(rules.len());
    for (i, rule) in rules.iter().enumerate() {
        let mut rng = stage_stream(seed, &format!("rule:{i}:{}", rule.create));
        counts.push(apply_transitive_rule(rule, graph, &mut rng)?.len());
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::graph::LinkTypeInfo;
    use crate::io::{Hop, LinkKind};

    fn graph(n: usize) -> SocialGraph {
        SocialGraph::new(
            n,
            vec![
                LinkTypeInfo { name: "motherOf".into(), directed: true, kind: LinkKind::Matching },
                LinkTypeInfo { name: "siblings".into(), directed: false, kind: LinkKind::Transitive },
                LinkTypeInfo { name: "friends".into(), directed: false, kind: LinkKind::Matching },
                LinkTypeInfo { name: "fof".into(), directed: false, kind: LinkKind::Transitive },
            ],
        )
    }

    fn siblings_rule(p: f64) -> TransitiveRule {
        TransitiveRule {
            create: "siblings".into(),
            hop1: Hop::new("motherOf", Orientation::Backward),
            hop2: Hop::new("motherOf", Orientation::Forward),
            probability: p,
            create_directed_from: Endpoint::Start,
        }
    }

    #[test]
    fn three_children_give_three_sibling_pairs() {
        let mut g = graph(4);
        for c in 1..4 {
            g.insert(0, 0, c, Provenance::Sampled);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let links = apply_transitive_rule(&siblings_rule(1.0), &mut g, &mut rng).unwrap();
        assert_eq!(links.len(), 3);
        assert_eq!(g.edge_count(1), 3);
        // Re-applying adds nothing.
        assert!(apply_transitive_rule(&siblings_rule(1.0), &mut g, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn zero_probability_never_creates() {
        let mut g = graph(5);
        for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)] {
            g.insert(2, a, b, Provenance::Sampled);
        }
        let rule = TransitiveRule {
            create: "fof".into(),
            hop1: Hop::new("friends", Orientation::Either),
            hop2: Hop::new("friends", Orientation::Either),
            probability: 0.0,
            create_directed_from: Endpoint::Start,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(apply_transitive_rule(&rule, &mut g, &mut rng).unwrap().is_empty());
        assert_eq!(path_matches(&rule, &g).unwrap().len(), 10);
    }

    #[test]
    fn empty_rule_list_leaves_graph_unchanged() {
        let mut g = graph(3);
        g.insert(0, 0, 1, Provenance::Sampled);
        let before = g.clone();
        assert!(apply_all_rules(&[], &mut g, 1).unwrap().is_empty());
        assert_eq!(g, before);
    }
}
