//! Typed multigraph over a population: one edge set per link type.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::io::LinkKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Realized an exactly matching peer prototype.
    Sampled,
    /// Picked uniformly among compatible candidates after the prototype missed.
    Fallback,
    /// Created by a two-hop rule.
    Transitive,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Sampled => "sampled",
            Provenance::Fallback => "fallback",
            Provenance::Transitive => "transitive",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "sampled" => Some(Provenance::Sampled),
            "fallback" => Some(Provenance::Fallback),
            "transitive" => Some(Provenance::Transitive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypedLink {
    pub link_type: usize,
    pub a: usize,
    pub b: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkTypeInfo {
    pub name: String,
    pub directed: bool,
    pub kind: LinkKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    agent_count: usize,
    types: Vec<LinkTypeInfo>,
    // Per type, edges in insertion order; undirected pairs stored min-first.
    edges: Vec<IndexMap<(usize, usize), Provenance>>,
}

impl SocialGraph {
    pub fn new(agent_count: usize, types: Vec<LinkTypeInfo>) -> SocialGraph {
        let edges = types.iter().map(|_| IndexMap::new()).collect();
        SocialGraph {
            agent_count,
            types,
            edges,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agent_count
    }

    pub fn types(&self) -> &[LinkTypeInfo] {
        &self.types
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t.name == name)
    }

    fn key(&self, link_type: usize, a: usize, b: usize) -> (usize, usize) {
        if self.types[link_type].directed || a < b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn contains(&self, link_type: usize, a: usize, b: usize) -> bool {
        self.edges[link_type].contains_key(&self.key(link_type, a, b))
    }

    /// Adds a link; returns false for self-links and duplicates.
    pub fn insert(&mut self, link_type: usize, a: usize, b: usize, provenance: Provenance) -> bool {
        assert!(a < self.agent_count && b < self.agent_count, "endpoint out of range");
        if a == b {
            return false;
        }
        let key = self.key(link_type, a, b);
        if self.edges[link_type].contains_key(&key) {
            return false;
        }
        self.edges[link_type].insert(key, provenance);
        true
    }

    pub fn edge_count(&self, link_type: usize) -> usize {
        self.edges[link_type].len()
    }

    pub fn total_edges(&self) -> usize {
        self.edges.iter().map(IndexMap::len).sum()
    }

    /// Links of one type as stored (min-first for undirected types).
    pub fn links(&self, link_type: usize) -> impl Iterator<Item = TypedLink> + '_ {
        self.edges[link_type]
            .iter()
            .map(move |(&(a, b), &provenance)| TypedLink {
                link_type,
                a,
                b,
                provenance,
            })
    }

    pub fn all_links(&self) -> impl Iterator<Item = TypedLink> + '_ {
        (0..self.types.len()).flat_map(move |t| self.links(t))
    }

    /// Sorted out- and in-neighbour lists for one type. For undirected
    /// types both lists hold every neighbour.
    pub fn adjacency(&self, link_type: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut out = vec![Vec::new(); self.agent_count];
        let mut inc = vec![Vec::new(); self.agent_count];
        let directed = self.types[link_type].directed;
        for &(a, b) in self.edges[link_type].keys() {
            out[a].push(b);
            inc[b].push(a);
            if !directed {
                out[b].push(a);
                inc[a].push(b);
            }
        }
        for l in out.iter_mut().chain(inc.iter_mut()) {
            l.sort_unstable();
        }
        (out, inc)
    }

    /// Simple undirected projection: union of all types, directions dropped.
    pub fn projection(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.agent_count];
        for map in &self.edges {
            for &(a, b) in map.keys() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Per-agent count of incident links of one type.
    pub fn degrees(&self, link_type: usize) -> Vec<usize> {
        let mut d = vec![0; self.agent_count];
        for &(a, b) in self.edges[link_type].keys() {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }
}
