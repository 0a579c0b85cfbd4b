//! Agent populations sampled from the agent network.

use std::collections::HashMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bn::{Assignment, BayesianNetwork};
use crate::io::{Capacity, LinkKind, LinkTypeSpec};
use crate::rng::substream;

/// Agents per generation shard. Each shard owns a substream, so output does
/// not depend on how many workers run.
const SHARD: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum PopulationError {
    #[error("agent {agent}: capacity attribute `{attribute}` has non-integer value `{value}`")]
    Capacity {
        agent: usize,
        attribute: String,
        value: String,
    },
    #[error("capacity attribute `{0}` is not an agent attribute")]
    UnknownAttribute(String),
    #[error("agent {agent} has {found} attributes, the network has {expected}")]
    Structure {
        agent: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
    /// Single-pool types: one counter for both roles.
    Pool,
}

/// Identifies one capacity counter: a link type and the side it governs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CapacitySlot {
    pub link_type: String,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub attributes: Assignment,
    /// Required degree per capacity slot, read from the RC attributes.
    pub capacity: Vec<u32>,
    /// Links still to create per capacity slot.
    pub remaining_capacity: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<Agent>,
    slots: Vec<CapacitySlot>,
}

/// Draws `n` independent agents from the joint distribution of `bn`.
pub fn generate_population(bn: &BayesianNetwork, n: usize, seed: u64) -> Population {
    let shards: Vec<usize> = (0..n.div_ceil(SHARD)).collect();
    let make_shard = |&shard: &usize| {
        let mut rng = substream(seed, shard as u64);
        let start = shard * SHARD;
        let end = (start + SHARD).min(n);
        (start..end)
            .map(|id| Agent {
                id,
                attributes: bn.sample_prior(&mut rng),
                capacity: Vec::new(),
                remaining_capacity: Vec::new(),
            })
            .collect::<Vec<_>>()
    };
    #[cfg(feature = "parallel")]
    let chunks: Vec<Vec<Agent>> = shards.par_iter().map(make_shard).collect();
    #[cfg(not(feature = "parallel"))]
    let chunks: Vec<Vec<Agent>> = shards.iter().map(make_shard).collect();
    Population {
        agents: chunks.into_iter().flatten().collect(),
        slots: Vec::new(),
    }
}

impl Population {
    pub fn from_agents(agents: Vec<Assignment>) -> Population {
        Population {
            agents: agents
                .into_iter()
                .enumerate()
                .map(|(id, attributes)| Agent {
                    id,
                    attributes,
                    capacity: Vec::new(),
                    remaining_capacity: Vec::new(),
                })
                .collect(),
            slots: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn slots(&self) -> &[CapacitySlot] {
        &self.slots
    }

    pub fn slot(&self, link_type: &str, side: Side) -> Option<usize> {
        self.slots
            .iter()
            .position(|s| s.link_type == link_type && s.side == side)
    }

    /// Initializes capacity counters of every matching link type from the
    /// agents' RC attributes.
    pub fn assign_capacities(
        &mut self,
        bn: &BayesianNetwork,
        link_types: &[LinkTypeSpec],
    ) -> Result<(), PopulationError> {
        enum Source {
            Attr(usize, String),
            Const(u32),
        }
        let attr = |name: &str| {
            bn.index_of(name)
                .map(|v| Source::Attr(v, name.to_string()))
                .ok_or_else(|| PopulationError::UnknownAttribute(name.to_string()))
        };
        let mut slots = Vec::new();
        let mut sources = Vec::new();
        for t in link_types.iter().filter(|t| t.kind == LinkKind::Matching) {
            let Some(rc_a) = t.rc_a.as_deref() else { continue };
            if t.same {
                slots.push(CapacitySlot { link_type: t.name.clone(), side: Side::Pool });
                sources.push(attr(rc_a)?);
                continue;
            }
            slots.push(CapacitySlot { link_type: t.name.clone(), side: Side::A });
            sources.push(attr(rc_a)?);
            slots.push(CapacitySlot { link_type: t.name.clone(), side: Side::B });
            sources.push(match &t.rc_b {
                Some(Capacity::Attribute(a)) => attr(a)?,
                Some(Capacity::Constant(c)) => Source::Const(*c),
                None => Source::Const(0),
            });
        }
        for agent in &mut self.agents {
            let mut caps = Vec::with_capacity(sources.len());
            for src in &sources {
                caps.push(match src {
                    Source::Const(c) => *c,
                    Source::Attr(v, name) => {
                        let label = bn.label(*v, agent.attributes.states()[*v]);
                        label.parse().map_err(|_| PopulationError::Capacity {
                            agent: agent.id,
                            attribute: name.clone(),
                            value: label.to_string(),
                        })?
                    }
                });
            }
            agent.remaining_capacity = caps.clone();
            agent.capacity = caps;
        }
        self.slots = slots;
        Ok(())
    }

    /// Groups agent ids by their states on `vars`, in first-seen order.
    pub fn group_by(&self, vars: &[usize]) -> AttributeIndex {
        let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for a in &self.agents {
            let key = vars.iter().map(|&v| a.attributes.states()[v]).collect();
            groups.entry(key).or_default().push(a.id);
        }
        AttributeIndex {
            vars: vars.to_vec(),
            groups,
        }
    }
}

/// Agent ids grouped by their states on a fixed attribute subset.
#[derive(Debug, Clone)]
pub struct AttributeIndex {
    pub vars: Vec<usize>,
    pub groups: HashMap<Vec<usize>, Vec<usize>>,
}

impl AttributeIndex {
    pub fn get(&self, key: &[usize]) -> &[usize] {
        self.groups.get(key).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Observed conditional frequencies for one parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRow {
    pub count: usize,
    pub frequencies: Vec<f64>,
}

/// Observed counterpart of one variable's CPT. Rows never observed are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTable {
    pub variable: String,
    pub rows: Vec<Option<EmpiricalRow>>,
}

pub fn empirical_conditionals(
    bn: &BayesianNetwork,
    pop: &Population,
) -> Result<Vec<EmpiricalTable>, PopulationError> {
    let mut counts: Vec<Vec<usize>> = (0..bn.len())
        .map(|v| vec![0; bn.row_count(v) * bn.cardinality(v)])
        .collect();
    for a in &pop.agents {
        let s = a.attributes.states();
        if s.len() != bn.len() {
            return Err(PopulationError::Structure {
                agent: a.id,
                expected: bn.len(),
                found: s.len(),
            });
        }
        for (v, c) in counts.iter_mut().enumerate() {
            c[bn.row_index(v, s) * bn.cardinality(v) + s[v]] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(v, c)| {
            let k = bn.cardinality(v);
            let rows = c
                .chunks(k)
                .map(|row| {
                    let total: usize = row.iter().sum();
                    (total > 0).then(|| EmpiricalRow {
                        count: total,
                        frequencies: row.iter().map(|&x| x as f64 / total as f64).collect(),
                    })
                })
                .collect();
            EmpiricalTable {
                variable: bn.variable(v).name.clone(),
                rows,
            }
        })
        .collect())
}

/// Mean over variables of the count-weighted mean absolute gap between
/// observed and tabulated conditional probabilities.
pub fn distribution_error(bn: &BayesianNetwork, pop: &Population) -> Result<f64, PopulationError> {
    let tables = empirical_conditionals(bn, pop)?;
    if tables.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (v, t) in tables.iter().enumerate() {
        let (mut weighted, mut weight) = (0.0, 0.0);
        for (r, row) in t.rows.iter().enumerate() {
            let Some(row) = row else { continue };
            let cpt = bn.cpt_row(v, r);
            let gap: f64 = row
                .frequencies
                .iter()
                .zip(cpt)
                .map(|(f, p)| (f - p).abs())
                .sum::<f64>()
                / cpt.len() as f64;
            weighted += gap * row.count as f64;
            weight += row.count as f64;
        }
        if weight > 0.0 {
            total += weighted / weight;
        }
    }
    Ok(total / tables.len() as f64)
}
