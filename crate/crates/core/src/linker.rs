//! Links agents through matching networks.
//!
//! A matching network holds two (possibly reduced) copies of the agent
//! attributes, prefixed `a1.` and `a2.`, plus constraint nodes feeding a link
//! node. Conditioning on `link = "yes"` zeroes out incompatible attribute
//! combinations; the remaining support decides who may be tied to whom.
//!
//! For each side-A agent, while it still needs links of the type, the linker
//! samples a peer prototype from p(a2.* | a1.* = Att(a1), link = yes) and
//! looks for an agent with exactly those attributes and spare capacity. If
//! none exists it falls back to a uniform pick among all agents in the
//! posterior support; failing that, the remaining stubs stay unmet.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::bn::{sampling::sample_index, BayesianNetwork, BnError, Evidence};
use crate::graph::{LinkTypeInfo, Provenance, SocialGraph};
use crate::io::{LinkKind, LinkTypeSpec, Scenario};
use crate::population::{Population, Side};
use crate::rng::stage_stream;

pub const LINK_YES: &str = "yes";

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error("unsatisfiable link type: p(link = yes) is zero")]
    Unsatisfiable,
    #[error("no prototype: agent attributes are incompatible with link creation")]
    NoPrototype,
    #[error(transparent)]
    Network(#[from] BnError),
}

/// A matching network bound to the agent network.
#[derive(Debug, Clone)]
pub struct MatchingModel {
    pub bn: BayesianNetwork,
    pub link_var: usize,
    pub yes_state: usize,
    /// (matching-network variable, agent-network variable) for the `a1.` copy.
    pub a1: Vec<(usize, usize)>,
    /// Same for the `a2.` copy.
    pub a2: Vec<(usize, usize)>,
}

impl MatchingModel {
    /// Checks the naming contract against the agent network and resolves
    /// variable bindings. Returns a human-readable message on violation.
    pub fn bind(bn: BayesianNetwork, link_variable: &str, agent_bn: &BayesianNetwork) -> Result<Self, String> {
        let link_var = bn
            .index_of(link_variable)
            .ok_or_else(|| format!("link variable `{link_variable}` not found"))?;
        let yes_state = bn.state_of(link_var, LINK_YES).ok_or_else(|| {
            format!(
                "link variable `{link_variable}` has domain {:?} without \"yes\"",
                bn.variable(link_var).domain
            )
        })?;
        let mut a1 = Vec::new();
        let mut a2 = Vec::new();
        for (i, v) in bn.variables().iter().enumerate() {
            let (side, attr) = match v.name.split_once('.') {
                Some(("a1", attr)) => (&mut a1, attr),
                Some(("a2", attr)) => (&mut a2, attr),
                _ => continue,
            };
            let agent_var = agent_bn
                .index_of(attr)
                .ok_or_else(|| format!("variable `{}`: `{attr}` is not an agent attribute", v.name))?;
            let expected = &agent_bn.variable(agent_var).domain;
            if &v.domain != expected {
                return Err(format!(
                    "variable `{}`: expected domain {expected:?}, found {:?}",
                    v.name, v.domain
                ));
            }
            side.push((i, agent_var));
        }
        Ok(MatchingModel {
            bn,
            link_var,
            yes_state,
            a1,
            a2,
        })
    }

    fn link_evidence(&self) -> Evidence {
        let mut ev = self.bn.empty_evidence();
        ev.set_state(self.link_var, self.yes_state);
        ev
    }

    pub fn a1_key(&self, agent_states: &[usize]) -> Vec<usize> {
        self.a1.iter().map(|&(_, av)| agent_states[av]).collect()
    }

    pub fn a2_key(&self, agent_states: &[usize]) -> Vec<usize> {
        self.a2.iter().map(|&(_, av)| agent_states[av]).collect()
    }

    /// Link evidence plus optional attribute keys for either side.
    pub fn evidence_for(&self, a1_key: Option<&[usize]>, a2_key: Option<&[usize]>) -> Evidence {
        let mut ev = self.link_evidence();
        if let Some(k) = a1_key {
            for (&(mv, _), &s) in self.a1.iter().zip(k) {
                ev.set_state(mv, s);
            }
        }
        if let Some(k) = a2_key {
            for (&(mv, _), &s) in self.a2.iter().zip(k) {
                ev.set_state(mv, s);
            }
        }
        ev
    }

    /// p(link = yes).
    pub fn link_probability(&self) -> f64 {
        self.bn.probability_of_evidence(&self.link_evidence())
    }

    /// Whether an (a1, a2) attribute pair may be linked.
    pub fn compatible(&self, a1_states: &[usize], a2_states: &[usize]) -> bool {
        let ev = self.evidence_for(Some(&self.a1_key(a1_states)), Some(&self.a2_key(a2_states)));
        self.bn.probability_of_evidence(&ev) > 0.0
    }

    /// Exact posterior over a2 keys given an a1 key and link evidence.
    pub fn prototype_table(&self, a1_key: &[usize]) -> Result<PrototypeTable, LinkError> {
        let ev = self.evidence_for(Some(a1_key), None);
        let targets: Vec<usize> = self.a2.iter().map(|&(mv, _)| mv).collect();
        let joint = match self.bn.posterior_joint(&ev, &targets) {
            Ok(j) => j,
            Err(BnError::ImpossibleEvidence) => return Err(LinkError::NoPrototype),
            Err(e) => return Err(e.into()),
        };
        // The table orders variables by index; map back to a2 order.
        let order: Vec<usize> = targets
            .iter()
            .map(|t| joint.vars.iter().position(|v| v == t).expect("target in table"))
            .collect();
        let mut keys = Vec::new();
        let mut probs = Vec::new();
        for (states, p) in joint.support() {
            keys.push(order.iter().map(|&k| states[k]).collect());
            probs.push(p);
        }
        Ok(PrototypeTable { keys, probs })
    }
}

/// Distribution over peer attribute keys; `keys` is the posterior support.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeTable {
    pub keys: Vec<Vec<usize>>,
    pub probs: Vec<f64>,
}

impl PrototypeTable {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &[usize] {
        &self.keys[sample_index(&self.probs, rng)]
    }
}

/// Draws a peer prototype (a2 key, in `model.a2` order) for an agent.
pub fn sample_peer_prototype<R: Rng + ?Sized>(
    model: &MatchingModel,
    a1_states: &[usize],
    rng: &mut R,
) -> Result<Vec<usize>, LinkError> {
    let table = model.prototype_table(&model.a1_key(a1_states))?;
    Ok(table.sample(rng).to_vec())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSets {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
}

/// Agents whose a1 (resp. a2) attributes are jointly possible with link
/// evidence. Membership is decided once per distinct attribute key.
pub fn derive_candidate_sets(model: &MatchingModel, pop: &Population) -> Result<CandidateSets, LinkError> {
    if model.link_probability() <= 0.0 {
        return Err(LinkError::Unsatisfiable);
    }
    let mut ok_a: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut ok_b: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut sets = CandidateSets::default();
    for agent in &pop.agents {
        let s = agent.attributes.states();
        let ka = model.a1_key(s);
        let in_a = *ok_a.entry(ka).or_insert_with_key(|k| {
            model.bn.probability_of_evidence(&model.evidence_for(Some(k), None)) > 0.0
        });
        if in_a {
            sets.side_a.push(agent.id);
        }
        let kb = model.a2_key(s);
        let in_b = *ok_b.entry(kb).or_insert_with_key(|k| {
            model.bn.probability_of_evidence(&model.evidence_for(None, Some(k))) > 0.0
        });
        if in_b {
            sets.side_b.push(agent.id);
        }
    }
    Ok(sets)
}

/// A link as produced by the matcher, oriented side A → side B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchedLink {
    pub a1: usize,
    pub a2: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TypeReport {
    pub link_type: String,
    /// Sum of side-A (or pool) capacities over the candidates.
    pub required_stubs: u64,
    /// Stubs filled by created links (two per link for single-pool types).
    pub satisfied_stubs: u64,
    pub created_links: u64,
    pub fallback_links: u64,
    /// Required stubs left unmet.
    pub orphan_stubs: u64,
    pub side_a: usize,
    pub side_b: usize,
    pub unsatisfiable: bool,
}

impl TypeReport {
    /// 1 − satisfied / required, or 0 when nothing is required.
    pub fn matching_error(&self) -> f64 {
        if self.required_stubs == 0 {
            0.0
        } else {
            1.0 - self.satisfied_stubs as f64 / self.required_stubs as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchingReport {
    pub types: Vec<TypeReport>,
}

impl MatchingReport {
    pub fn get(&self, name: &str) -> Option<&TypeReport> {
        self.types.iter().find(|t| t.link_type == name)
    }

    /// Per-type matching error rates, in declaration order.
    pub fn matching_errors(&self) -> Vec<(String, f64)> {
        self.types
            .iter()
            .map(|t| (t.link_type.clone(), t.matching_error()))
            .collect()
    }
}

/// Per-type rate 1 − created/required.
pub fn matching_error(report: &MatchingReport) -> Vec<(String, f64)> {
    report.matching_errors()
}

const ABSENT: usize = usize::MAX;

/// Side-B agents with spare capacity, bucketed by a2 key.
struct Buckets {
    map: HashMap<Arc<[usize]>, Vec<usize>>,
    key_of: Vec<Option<Arc<[usize]>>>,
    pos: Vec<usize>,
}

impl Buckets {
    fn new(n: usize) -> Self {
        Buckets {
            map: HashMap::new(),
            key_of: vec![None; n],
            pos: vec![ABSENT; n],
        }
    }

    fn insert(&mut self, agent: usize, key: Vec<usize>) {
        let key: Arc<[usize]> = match self.map.get_key_value(key.as_slice()) {
            Some((k, _)) => k.clone(),
            None => key.into(),
        };
        let bucket = self.map.entry(key.clone()).or_default();
        self.pos[agent] = bucket.len();
        bucket.push(agent);
        self.key_of[agent] = Some(key);
    }

    fn remove(&mut self, agent: usize) {
        if self.pos[agent] == ABSENT {
            return;
        }
        let key = self.key_of[agent].as_ref().expect("bucketed agent has key");
        let bucket = self.map.get_mut(key).expect("bucket exists");
        let p = self.pos[agent];
        bucket.swap_remove(p);
        if p < bucket.len() {
            self.pos[bucket[p]] = p;
        }
        self.pos[agent] = ABSENT;
    }

    fn in_bucket(&self, agent: usize, key: &[usize]) -> bool {
        self.pos[agent] != ABSENT && self.key_of[agent].as_deref() == Some(key)
    }

    fn members(&self, key: &[usize]) -> &[usize] {
        self.map.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn eligible_count(&self, key: &[usize], excluded: &[usize]) -> usize {
        let members = self.members(key).len();
        members - excluded.iter().filter(|&&e| self.in_bucket(e, key)).count()
    }

    /// Uniform pick among bucket members not in `excluded`.
    fn pick<R: Rng + ?Sized>(&self, key: &[usize], excluded: &[usize], rng: &mut R) -> Option<usize> {
        let members = self.members(key);
        let eligible = self.eligible_count(key, excluded);
        if eligible == 0 {
            return None;
        }
        Some(nth_eligible(members, excluded, rng.random_range(0..eligible)))
    }
}

fn nth_eligible(members: &[usize], excluded: &[usize], n: usize) -> usize {
    members
        .iter()
        .copied()
        .filter(|m| !excluded.contains(m))
        .nth(n)
        .expect("n < eligible count")
}

/// Result of linking one matching type.
#[derive(Debug, Clone, Default)]
pub struct TypeOutcome {
    pub links: Vec<MatchedLink>,
    pub report: TypeReport,
}

/// Creates every link of one matching type, mutating capacities in `pop`.
pub fn create_links_for_type<R: Rng + ?Sized>(
    spec: &LinkTypeSpec,
    model: &MatchingModel,
    pop: &mut Population,
    rng: &mut R,
) -> Result<TypeOutcome, LinkError> {
    let (slot_a, slot_b) = if spec.same {
        let s = pop.slot(&spec.name, Side::Pool).expect("capacities assigned");
        (s, s)
    } else {
        (
            pop.slot(&spec.name, Side::A).expect("capacities assigned"),
            pop.slot(&spec.name, Side::B).expect("capacities assigned"),
        )
    };
    let mut report = TypeReport {
        link_type: spec.name.clone(),
        ..TypeReport::default()
    };

    let sets = match derive_candidate_sets(model, pop) {
        Ok(s) => s,
        Err(LinkError::Unsatisfiable) => {
            report.unsatisfiable = true;
            report.required_stubs = pop
                .agents
                .iter()
                .map(|a| a.remaining_capacity[slot_a] as u64)
                .sum();
            report.orphan_stubs = report.required_stubs;
            return Ok(TypeOutcome { links: Vec::new(), report });
        }
        Err(e) => return Err(e),
    };
    let (mut side_a, side_b) = if spec.same {
        // One pool: agents acceptable in both roles.
        let mut in_b = vec![false; pop.len()];
        sets.side_b.iter().for_each(|&b| in_b[b] = true);
        let pool: Vec<usize> = sets.side_a.iter().copied().filter(|&a| in_b[a]).collect();
        (pool.clone(), pool)
    } else {
        (sets.side_a, sets.side_b)
    };
    report.side_a = side_a.len();
    report.side_b = side_b.len();
    report.required_stubs = side_a
        .iter()
        .map(|&a| pop.agents[a].remaining_capacity[slot_a] as u64)
        .sum();

    let mut buckets = Buckets::new(pop.len());
    for &b in &side_b {
        if pop.agents[b].remaining_capacity[slot_b] > 0 {
            buckets.insert(b, model.a2_key(pop.agents[b].attributes.states()));
        }
    }

    let mut tables: HashMap<Vec<usize>, Arc<PrototypeTable>> = HashMap::new();
    let mut neighbours: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut links = Vec::new();
    side_a.shuffle(rng);

    for &a1 in &side_a {
        if pop.agents[a1].remaining_capacity[slot_a] == 0 {
            continue;
        }
        let key = model.a1_key(pop.agents[a1].attributes.states());
        let table = match tables.get(&key) {
            Some(t) => t.clone(),
            None => {
                let t = Arc::new(model.prototype_table(&key)?);
                tables.insert(key, t.clone());
                t
            }
        };
        while pop.agents[a1].remaining_capacity[slot_a] > 0 {
            let mut excluded = neighbours.get(&a1).cloned().unwrap_or_default();
            excluded.push(a1);

            let prototype = table.sample(rng);
            let (a2, provenance) = match buckets.pick(prototype, &excluded, rng) {
                Some(a2) => (a2, Provenance::Sampled),
                None => {
                    let counts: Vec<usize> = table
                        .keys
                        .iter()
                        .map(|k| buckets.eligible_count(k, &excluded))
                        .collect();
                    let total: usize = counts.iter().sum();
                    if total == 0 {
                        break;
                    }
                    let mut r = rng.random_range(0..total);
                    let (k, _) = counts
                        .iter()
                        .enumerate()
                        .find(|&(_, &c)| {
                            if r < c {
                                true
                            } else {
                                r -= c;
                                false
                            }
                        })
                        .expect("r < total");
                    let a2 = nth_eligible(buckets.members(&table.keys[k]), &excluded, r);
                    (a2, Provenance::Fallback)
                }
            };

            pop.agents[a1].remaining_capacity[slot_a] -= 1;
            pop.agents[a2].remaining_capacity[slot_b] -= 1;
            if pop.agents[a2].remaining_capacity[slot_b] == 0 {
                buckets.remove(a2);
            }
            if spec.same && pop.agents[a1].remaining_capacity[slot_a] == 0 {
                buckets.remove(a1);
            }
            neighbours.entry(a1).or_default().push(a2);
            neighbours.entry(a2).or_default().push(a1);
            if provenance == Provenance::Fallback {
                report.fallback_links += 1;
            }
            links.push(MatchedLink { a1, a2, provenance });
        }
    }

    report.created_links = links.len() as u64;
    report.satisfied_stubs = if spec.same {
        2 * report.created_links
    } else {
        report.created_links
    };
    report.orphan_stubs = side_a
        .iter()
        .map(|&a| pop.agents[a].remaining_capacity[slot_a] as u64)
        .sum();
    Ok(TypeOutcome { links, report })
}

/// Output of the matching phase.
#[derive(Debug, Clone)]
pub struct MatchingOutcome {
    pub graph: SocialGraph,
    pub report: MatchingReport,
    /// Matched links per link type (empty for transitive types), oriented a1 → a2.
    pub links: Vec<Vec<MatchedLink>>,
}

/// Empty graph with one edge set per scenario link type.
pub fn empty_graph(scenario: &Scenario, agent_count: usize) -> SocialGraph {
    SocialGraph::new(
        agent_count,
        scenario
            .link_types()
            .iter()
            .map(|t| LinkTypeInfo {
                name: t.name.clone(),
                directed: t.directed,
                kind: t.kind,
            })
            .collect(),
    )
}

/// Runs every matching type in declaration order. Each type draws from its
/// own stream derived from `seed` and the type name.
pub fn run_all_matching(scenario: &Scenario, pop: &mut Population, seed: u64) -> Result<MatchingOutcome, LinkError> {
    let mut graph = empty_graph(scenario, pop.len());
    let mut report = MatchingReport::default();
    let mut all_links = vec![Vec::new(); scenario.link_types().len()];
    for (t, spec) in scenario.link_types().iter().enumerate() {
        if spec.kind != LinkKind::Matching {
            continue;
        }
        let model = scenario.matching[t].as_ref().expect("matching model loaded");
        let mut rng = stage_stream(seed, &format!("match:{}", spec.name));
        let outcome = create_links_for_type(spec, model, pop, &mut rng)?;
        for l in &outcome.links {
            let inserted = graph.insert(t, l.a1, l.a2, l.provenance);
            debug_assert!(inserted, "matcher produced a duplicate or self link");
        }
        report.types.push(outcome.report);
        all_links[t] = outcome.links;
    }
    Ok(MatchingOutcome {
        graph,
        report,
        links: all_links,
    })
}
