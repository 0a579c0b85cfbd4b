//! Network documents (`*.bn.json`) and scenario documents (`*.scenario.json`).
//!
//! A network document is a JSON object:
//!
//! ```json
//! { "format_version": 1,
//!   "variables": [
//!     { "name": "A", "domain": ["0", "1"], "parents": [], "cpt": [[0.6, 0.4]] },
//!     { "name": "B", "domain": ["0", "1"], "parents": ["A"],
//!       "cpt": [[0.7, 0.3], [0.2, 0.8]] } ] }
//! ```
//!
//! CPT rows run over parent configurations with the last-listed parent
//! varying fastest. Variables may be listed in any order.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bn::{BayesianNetwork, BnError, Variable};
use crate::linker::MatchingModel;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{origin}: line {line}, column {column}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: unsupported format_version {found} (expected {FORMAT_VERSION})")]
    Version { origin: String, found: u32 },
    #[error("{origin}: {source}")]
    Network {
        origin: String,
        #[source]
        source: BnError,
    },
    #[error("cannot read {path}: {message}")]
    Missing { path: String, message: String },
    #[error("{origin}: {message}")]
    Contract { origin: String, message: String },
}

impl LoadError {
    fn contract(origin: &str, message: impl Into<String>) -> Self {
        LoadError::Contract {
            origin: origin.to_string(),
            message: message.into(),
        }
    }
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDocument {
    #[serde(default = "default_version")]
    format_version: u32,
    variables: Vec<Variable>,
}

fn syntax_error(origin: &str, e: serde_json::Error) -> LoadError {
    LoadError::Syntax {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses a network document; the result is validated.
pub fn parse_bn(text: &str) -> Result<BayesianNetwork, LoadError> {
    parse_bn_named(text, "<network>")
}

fn parse_bn_named(text: &str, origin: &str) -> Result<BayesianNetwork, LoadError> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| syntax_error(origin, e))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(LoadError::Version {
            origin: origin.to_string(),
            found: doc.format_version,
        });
    }
    BayesianNetwork::new(doc.variables).map_err(|source| LoadError::Network {
        origin: origin.to_string(),
        source,
    })
}

/// Serializes a network; entries are written verbatim.
pub fn serialize_bn(bn: &BayesianNetwork) -> String {
    let doc = NetworkDocument {
        format_version: FORMAT_VERSION,
        variables: bn.variables().to_vec(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("network serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Matching,
    Transitive,
}

/// Side-B capacity: an agent attribute or a constant count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Capacity {
    Constant(u32),
    Attribute(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkTypeSpec {
    pub name: String,
    pub kind: LinkKind,
    #[serde(default)]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bn: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_variable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rc_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rc_b: Option<Capacity>,
    /// Both endpoints come from one pool and share one capacity attribute.
    #[serde(default)]
    pub same: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Forward,
    Backward,
    #[default]
    Either,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    #[default]
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hop {
    #[serde(rename = "type")]
    pub link_type: String,
    #[serde(default)]
    pub orientation: Orientation,
}

impl Hop {
    pub fn new(link_type: &str, orientation: Orientation) -> Self {
        Hop {
            link_type: link_type.to_string(),
            orientation,
        }
    }
}

/// Creates `create` links along two-hop paths x –hop1– y –hop2– z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitiveRule {
    pub create: String,
    pub hop1: Hop,
    pub hop2: Hop,
    pub probability: f64,
    /// Which end of the path becomes the source of a directed link.
    #[serde(default)]
    pub create_directed_from: Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub agent_bn: String,
    pub population_size: usize,
    pub seed: u64,
    pub link_types: Vec<LinkTypeSpec>,
    #[serde(default)]
    pub transitive_rules: Vec<TransitiveRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_weights: Option<BTreeMap<String, f64>>,
}

/// A scenario with every referenced network loaded and bound.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub agent_bn: BayesianNetwork,
    /// One entry per link type, `Some` for matching types.
    pub matching: Vec<Option<MatchingModel>>,
}

impl Scenario {
    pub fn link_types(&self) -> &[LinkTypeSpec] {
        &self.config.link_types
    }

    pub fn link_type_index(&self, name: &str) -> Option<usize> {
        self.config.link_types.iter().position(|t| t.name == name)
    }

    /// Loads a scenario, fetching referenced documents through `read`.
    pub fn load_with<F>(text: &str, origin: &str, mut read: F) -> Result<Scenario, LoadError>
    where
        F: FnMut(&str) -> Result<String, LoadError>,
    {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| syntax_error(origin, e))?;
        if config.format_version != FORMAT_VERSION {
            return Err(LoadError::Version {
                origin: origin.to_string(),
                found: config.format_version,
            });
        }
        check_config(&config, origin)?;
        let agent_text = read(&config.agent_bn)?;
        let agent_bn = parse_bn_named(&agent_text, &config.agent_bn)?;

        for t in &config.link_types {
            for attr in [t.rc_a.as_deref(), rc_b_attribute(t)].into_iter().flatten() {
                check_capacity_attribute(&agent_bn, attr, origin, &t.name)?;
            }
        }

        let mut matching = Vec::with_capacity(config.link_types.len());
        for t in &config.link_types {
            if t.kind != LinkKind::Matching {
                matching.push(None);
                continue;
            }
            let path = t.bn.as_deref().expect("checked");
            let bn = parse_bn_named(&read(path)?, path)?;
            let link_var = t.link_variable.as_deref().expect("checked");
            let model = MatchingModel::bind(bn, link_var, &agent_bn)
                .map_err(|message| LoadError::contract(path, message))?;
            matching.push(Some(model));
        }
        Ok(Scenario {
            config,
            agent_bn,
            matching,
        })
    }

    /// Serializes the configuration part of the scenario.
    pub fn config_json(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("config serializes")
    }
}

fn rc_b_attribute(t: &LinkTypeSpec) -> Option<&str> {
    match &t.rc_b {
        Some(Capacity::Attribute(a)) => Some(a),
        _ => None,
    }
}

fn check_capacity_attribute(
    agent_bn: &BayesianNetwork,
    attr: &str,
    origin: &str,
    link_type: &str,
) -> Result<(), LoadError> {
    let Some(v) = agent_bn.index_of(attr) else {
        return Err(LoadError::contract(
            origin,
            format!("link type `{link_type}`: capacity attribute `{attr}` is not in the agent network"),
        ));
    };
    if let Some(bad) = agent_bn.variable(v).domain.iter().find(|l| l.parse::<u32>().is_err()) {
        return Err(LoadError::contract(
            origin,
            format!(
                "link type `{link_type}`: capacity attribute `{attr}` has non-integer value `{bad}`"
            ),
        ));
    }
    Ok(())
}

fn check_config(config: &ScenarioConfig, origin: &str) -> Result<(), LoadError> {
    let err = |m: String| Err(LoadError::contract(origin, m));
    if config.population_size == 0 {
        return err("population_size must be positive".into());
    }
    let mut names = HashSet::new();
    for t in &config.link_types {
        if !names.insert(t.name.as_str()) {
            return err(format!("duplicate link type `{}`", t.name));
        }
        match t.kind {
            LinkKind::Matching => {
                if t.bn.is_none() || t.link_variable.is_none() || t.rc_a.is_none() {
                    return err(format!(
                        "matching link type `{}` needs bn, link_variable and rc_a",
                        t.name
                    ));
                }
                if t.same {
                    if let Some(rc_b) = &t.rc_b {
                        if rc_b != &Capacity::Attribute(t.rc_a.clone().unwrap()) {
                            return err(format!(
                                "link type `{}`: a single-pool type uses rc_a on both sides",
                                t.name
                            ));
                        }
                    }
                } else if t.rc_b.is_none() {
                    return err(format!("matching link type `{}` needs rc_b", t.name));
                }
            }
            LinkKind::Transitive => {
                if t.bn.is_some() || t.link_variable.is_some() || t.rc_a.is_some() || t.rc_b.is_some() {
                    return err(format!(
                        "transitive link type `{}` takes no bn, link_variable or capacities",
                        t.name
                    ));
                }
            }
        }
    }

    let kind_of = |name: &str| {
        config
            .link_types
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.kind)
    };
    let mut produced: HashSet<&str> = HashSet::new();
    for (i, r) in config.transitive_rules.iter().enumerate() {
        if !(0.0..=1.0).contains(&r.probability) {
            return err(format!("rule {i}: probability {} outside [0, 1]", r.probability));
        }
        if kind_of(&r.create) != Some(LinkKind::Transitive) {
            return err(format!(
                "rule {i}: `{}` is not a declared transitive link type",
                r.create
            ));
        }
        for hop in [&r.hop1, &r.hop2] {
            match kind_of(&hop.link_type) {
                Some(LinkKind::Matching) => {}
                Some(LinkKind::Transitive) if produced.contains(hop.link_type.as_str()) => {}
                _ => {
                    return err(format!(
                        "rule {i}: hop type `{}` is neither a matching type nor produced by an earlier rule",
                        hop.link_type
                    ))
                }
            }
        }
        produced.insert(r.create.as_str());
    }

    if let Some(w) = &config.interaction_weights {
        for (name, &p) in w {
            if kind_of(name).is_none() {
                return err(format!("interaction weight for unknown link type `{name}`"));
            }
            if !(0.0..=1.0).contains(&p) {
                return err(format!("interaction weight for `{name}` is {p}, outside [0, 1]"));
            }
        }
    }
    Ok(())
}

/// Loads a scenario file, resolving referenced files against `base_dir`.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario, LoadError> {
    Scenario::load_with(text, "<scenario>", |rel| read_file(&base_dir.join(rel)))
}

/// Reads and loads a scenario file from disk.
pub fn load_scenario(path: &Path) -> Result<Scenario, LoadError> {
    let text = read_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Scenario::load_with(&text, &path.display().to_string(), |rel| {
        read_file(&base.join(rel))
    })
}

fn read_file(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::Missing {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
      "variables": [
        {"name": "A", "domain": ["0", "1"], "cpt": [[0.6, 0.4]]},
        {"name": "B", "domain": ["0", "1"], "parents": ["A"], "cpt": [[0.7, 0.3], [0.2, 0.8]]}
      ]
    }"#;

    #[test]
    fn parses_tiny_document() {
        let bn = parse_bn(TINY).unwrap();
        assert_eq!(bn.len(), 2);
        assert_eq!(bn.topological_order(), ["A", "B"]);
    }

    #[test]
    fn wrong_row_length_names_variable() {
        let doc = TINY.replace("[0.2, 0.8]", "[0.2, 0.3, 0.5]");
        let e = parse_bn(&doc).unwrap_err().to_string();
        assert!(e.contains("B: cpt shape mismatch"), "{e}");
    }

    #[test]
    fn parent_defined_later_in_file() {
        let doc = r#"{"variables": [
          {"name": "married", "domain": ["yes", "no"], "parents": ["ageSlices"],
           "cpt": [[0.1, 0.9], [0.7, 0.3]]},
          {"name": "ageSlices", "domain": ["young", "old"], "cpt": [[0.5, 0.5]]}
        ]}"#;
        let bn = parse_bn(doc).unwrap();
        assert_eq!(bn.topological_order(), ["ageSlices", "married"]);
    }

    #[test]
    fn rejects_unknown_fields_duplicates_and_bad_json() {
        let unknown = TINY.replace("\"cpt\": [[0.6, 0.4]]", "\"cpt\": [[0.6, 0.4]], \"colour\": 1");
        assert!(matches!(parse_bn(&unknown), Err(LoadError::Syntax { .. })));

        let dup = TINY.replace("\"name\": \"B\"", "\"name\": \"A\"");
        assert!(parse_bn(&dup).unwrap_err().to_string().contains("duplicate variable name"));

        match parse_bn("{\n \"variables\": [\n oops") {
            Err(LoadError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialize_round_trip_keeps_zero_entries_and_single_rows() {
        let bn = BayesianNetwork::new(vec![
            Variable::root("R", &["a", "b", "c"], vec![0.0, 0.25, 0.75]),
            Variable::new("S", &["x", "y"], &["R"], vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]),
        ])
        .unwrap();
        let text = serialize_bn(&bn);
        let back = parse_bn(&text).unwrap();
        assert_eq!(back.variables(), bn.variables());
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["variables"][0]["cpt"].as_array().unwrap().len(), 1);
        assert_eq!(doc["variables"][0]["cpt"][0][0].as_f64(), Some(0.0));
    }
}
