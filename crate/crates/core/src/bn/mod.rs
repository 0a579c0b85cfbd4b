//! Discrete Bayesian networks.
//!
//! A network is a list of categorical [`Variable`]s, each carrying a
//! conditional probability table indexed by the joint state of its parents.
//! Rows are laid out row-major over parent assignments with the last-listed
//! parent varying fastest.
//!
//! [`BayesianNetwork::new`] validates and freezes a variable list; once built,
//! a network is immutable and can be shared between threads. Exact queries go
//! through variable elimination (see [`inference`]); sampling under evidence
//! is in [`sampling`].

mod factor;
pub mod inference;
pub mod sampling;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use factor::Factor;
pub use inference::{JointTable, DEFAULT_ENUMERATION_CAP};

/// Absolute tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Normalized posterior entries below this value are reported as zero.
pub const ZERO_SUPPORT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum BnError {
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("cycle through variable `{0}`")]
    Cycle(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("value `{value}` is not in the domain of `{variable}`")]
    UnknownValue { variable: String, value: String },
    #[error("impossible evidence: probability of evidence is zero")]
    ImpossibleEvidence,
    #[error("joint state space has {states} states, above the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u128 },
}

/// One categorical random variable and its conditional probability table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<f64>>,
}

impl Variable {
    pub fn new(
        name: impl Into<String>,
        domain: &[&str],
        parents: &[&str],
        cpt: Vec<Vec<f64>>,
    ) -> Self {
        Variable {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            cpt,
        }
    }

    pub fn root(name: impl Into<String>, domain: &[&str], prior: Vec<f64>) -> Self {
        Variable::new(name, domain, &[], vec![prior])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    DuplicateName,
    EmptyDomain,
    DuplicateLabel(String),
    DanglingParent(String),
    SelfParent,
    Cycle,
    RowCount { expected: usize, found: usize },
    RowLength { row: usize, expected: usize, found: usize },
    RowSum { row: usize, sum: f64 },
    EntryOutOfRange { row: usize, column: usize, value: f64 },
}

/// A single validation failure, attributed to a variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub variable: String,
    pub kind: ProblemKind,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.variable)?;
        match &self.kind {
            ProblemKind::DuplicateName => write!(f, "duplicate variable name"),
            ProblemKind::EmptyDomain => write!(f, "empty domain"),
            ProblemKind::DuplicateLabel(l) => write!(f, "duplicate domain label `{l}`"),
            ProblemKind::DanglingParent(p) => write!(f, "dangling parent `{p}`"),
            ProblemKind::SelfParent => write!(f, "variable is its own parent"),
            ProblemKind::Cycle => write!(f, "cycle"),
            ProblemKind::RowCount { expected, found } => {
                write!(f, "cpt shape mismatch: expected {expected} rows, found {found}")
            }
            ProblemKind::RowLength { row, expected, found } => write!(
                f,
                "cpt shape mismatch: row {row} has {found} entries, expected {expected}"
            ),
            ProblemKind::RowSum { row, sum } => write!(f, "row {row}: row sum {sum} ≠ 1"),
            ProblemKind::EntryOutOfRange { row, column, value } => {
                write!(f, "row {row}, column {column}: entry {value} outside [0, 1]")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub problems: Vec<Problem>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.problems.is_empty() {
            return write!(f, "no problems");
        }
        for (i, p) in self.problems.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Checks every structural and numeric invariant of a variable list.
///
/// Never fails: all problems are collected in the report.
pub fn validate_network(variables: &[Variable]) -> ValidationReport {
    let mut problems = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, v) in variables.iter().enumerate() {
        if index.insert(v.name.as_str(), i).is_some() {
            problems.push(Problem {
                variable: v.name.clone(),
                kind: ProblemKind::DuplicateName,
            });
        }
    }

    let mut structurally_sound = true;
    for v in variables {
        let mut problem = |kind| {
            problems.push(Problem {
                variable: v.name.clone(),
                kind,
            })
        };
        if v.domain.is_empty() {
            problem(ProblemKind::EmptyDomain);
        }
        for (i, label) in v.domain.iter().enumerate() {
            if v.domain[..i].contains(label) {
                problem(ProblemKind::DuplicateLabel(label.clone()));
            }
        }
        let mut rows: usize = 1;
        let mut parents_known = true;
        for p in &v.parents {
            if p == &v.name {
                problem(ProblemKind::SelfParent);
                parents_known = false;
                structurally_sound = false;
            } else if let Some(&pi) = index.get(p.as_str()) {
                rows = rows.saturating_mul(variables[pi].domain.len());
            } else {
                problem(ProblemKind::DanglingParent(p.clone()));
                parents_known = false;
                structurally_sound = false;
            }
        }
        if parents_known && v.cpt.len() != rows {
            problem(ProblemKind::RowCount {
                expected: rows,
                found: v.cpt.len(),
            });
        }
        for (r, row) in v.cpt.iter().enumerate() {
            if row.len() != v.domain.len() {
                problem(ProblemKind::RowLength {
                    row: r,
                    expected: v.domain.len(),
                    found: row.len(),
                });
                continue;
            }
            let mut in_range = true;
            for (c, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) || x.is_nan() {
                    in_range = false;
                    problem(ProblemKind::EntryOutOfRange {
                        row: r,
                        column: c,
                        value: x,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if in_range && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                problem(ProblemKind::RowSum {
                    row: r,
                    sum: (sum * 1e12).round() / 1e12,
                });
            }
        }
    }

    if structurally_sound {
        if let Err(member) = order_indices(variables, &index) {
            problems.push(Problem {
                variable: variables[member].name.clone(),
                kind: ProblemKind::Cycle,
            });
        }
    }
    ValidationReport { problems }
}

/// Topological order by name, ties broken by declaration order.
pub fn topological_order(variables: &[Variable]) -> Result<Vec<String>, BnError> {
    let index: HashMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    for v in variables {
        for p in &v.parents {
            if !index.contains_key(p.as_str()) {
                return Err(BnError::UnknownVariable(p.clone()));
            }
        }
    }
    order_indices(variables, &index)
        .map(|order| order.into_iter().map(|i| variables[i].name.clone()).collect())
        .map_err(|member| BnError::Cycle(variables[member].name.clone()))
}

/// Kahn's algorithm, always emitting the lowest declaration index that is
/// ready. On failure returns the index of a variable lying on a cycle.
fn order_indices(variables: &[Variable], index: &HashMap<&str, usize>) -> Result<Vec<usize>, usize> {
    let n = variables.len();
    let parents: Vec<Vec<usize>> = variables
        .iter()
        .map(|v| v.parents.iter().filter_map(|p| index.get(p.as_str()).copied()).collect())
        .collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n).find(|&i| !placed[i] && parents[i].iter().all(|&p| placed[p]));
        match next {
            Some(i) => {
                placed[i] = true;
                order.push(i);
            }
            None => {
                // Walk unplaced parents until a variable repeats; it lies on a cycle.
                let mut seen = vec![false; n];
                let mut cur = (0..n).find(|&i| !placed[i]).expect("unplaced variable");
                while !seen[cur] {
                    seen[cur] = true;
                    cur = *parents[cur]
                        .iter()
                        .find(|&&p| !placed[p])
                        .expect("unplaced parent");
                }
                return Err(cur);
            }
        }
    }
    Ok(order)
}

/// A validated, immutable discrete Bayesian network.
#[derive(Debug, Clone)]
pub struct BayesianNetwork {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    cards: Vec<usize>,
    // Flattened CPTs, row stride = own cardinality.
    tables: Vec<Vec<f64>>,
    order: Vec<usize>,
}

impl BayesianNetwork {
    /// Validates `variables` and builds the network. Rows whose sums are
    /// within tolerance of 1 are renormalized for computation; the declared
    /// tables are kept verbatim.
    pub fn new(variables: Vec<Variable>) -> Result<Self, BnError> {
        let report = validate_network(&variables);
        if !report.is_ok() {
            return Err(BnError::Invalid(report));
        }
        let index: HashMap<String, usize> = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let parents: Vec<Vec<usize>> = variables
            .iter()
            .map(|v| v.parents.iter().map(|p| index[p]).collect())
            .collect();
        let cards = variables.iter().map(|v| v.domain.len()).collect();
        let tables = variables
            .iter()
            .map(|v| {
                v.cpt
                    .iter()
                    .flat_map(|row| {
                        let sum: f64 = row.iter().sum();
                        row.iter().map(move |x| if sum == 1.0 { *x } else { x / sum })
                    })
                    .collect()
            })
            .collect();
        let order = {
            let by_ref: HashMap<&str, usize> =
                index.iter().map(|(k, &v)| (k.as_str(), v)).collect();
            order_indices(&variables, &by_ref).expect("validated network is acyclic")
        };
        Ok(BayesianNetwork {
            variables,
            index,
            parents,
            cards,
            tables,
            order,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, BnError> {
        self.index_of(name)
            .ok_or_else(|| BnError::UnknownVariable(name.to_string()))
    }

    pub fn state_of(&self, var: usize, label: &str) -> Option<usize> {
        self.variables[var].domain.iter().position(|l| l == label)
    }

    pub fn label(&self, var: usize, state: usize) -> &str {
        &self.variables[var].domain[state]
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.cards[var]
    }

    pub fn parent_indices(&self, var: usize) -> &[usize] {
        &self.parents[var]
    }

    /// Variable indices in topological order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_order(&self) -> Vec<String> {
        self.order
            .iter()
            .map(|&i| self.variables[i].name.clone())
            .collect()
    }

    /// Number of CPT rows (parent configurations) of `var`.
    pub fn row_count(&self, var: usize) -> usize {
        self.parents[var].iter().map(|&p| self.cards[p]).product()
    }

    /// Row index of the parent configuration read from `states`.
    pub fn row_index(&self, var: usize, states: &[usize]) -> usize {
        self.parents[var]
            .iter()
            .fold(0, |acc, &p| acc * self.cards[p] + states[p])
    }

    pub fn cpt_row(&self, var: usize, row: usize) -> &[f64] {
        let k = self.cards[var];
        &self.tables[var][row * k..(row + 1) * k]
    }

    /// Product of CPT entries along a full assignment.
    pub fn joint_probability(&self, a: &Assignment) -> f64 {
        assert_eq!(a.len(), self.len(), "assignment does not cover the network");
        let s = a.states();
        let mut p = 1.0;
        for v in 0..self.len() {
            p *= self.cpt_row(v, self.row_index(v, s))[s[v]];
            if p == 0.0 {
                break;
            }
        }
        p
    }

    pub fn empty_evidence(&self) -> Evidence {
        Evidence {
            states: vec![None; self.len()],
        }
    }

    /// Builds evidence from `(variable, label)` pairs.
    pub fn evidence<'a, I>(&self, pairs: I) -> Result<Evidence, BnError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut ev = self.empty_evidence();
        for (name, label) in pairs {
            ev.set(self, name, label)?;
        }
        Ok(ev)
    }

    /// Builds a full assignment from labels, one per variable.
    pub fn assignment<'a, I>(&self, pairs: I) -> Result<Assignment, BnError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let ev = self.evidence(pairs)?;
        let mut states = Vec::with_capacity(self.len());
        for (v, s) in ev.states.iter().enumerate() {
            match s {
                Some(s) => states.push(*s),
                None => return Err(BnError::UnknownVariable(self.variables[v].name.clone())),
            }
        }
        Ok(Assignment(states))
    }
}

/// Partial assignment of observed states, one slot per network variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Evidence {
    states: Vec<Option<usize>>,
}

impl Evidence {
    pub fn set(&mut self, bn: &BayesianNetwork, name: &str, label: &str) -> Result<(), BnError> {
        let var = bn.require(name)?;
        let state = bn.state_of(var, label).ok_or_else(|| BnError::UnknownValue {
            variable: name.to_string(),
            value: label.to_string(),
        })?;
        self.states[var] = Some(state);
        Ok(())
    }

    pub fn set_state(&mut self, var: usize, state: usize) {
        self.states[var] = Some(state);
    }

    pub fn clear(&mut self, var: usize) {
        self.states[var] = None;
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.states[var]
    }

    pub fn states(&self) -> &[Option<usize>] {
        &self.states
    }

    pub fn is_empty(&self) -> bool {
        self.states.iter().all(Option::is_none)
    }

    pub fn observed(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter_map(|(v, s)| s.map(|s| (v, s)))
    }

    /// True when every observed variable takes the same state in `a`.
    pub fn agrees_with(&self, a: &Assignment) -> bool {
        self.observed().all(|(v, s)| a.0[v] == s)
    }
}

/// One state index per network variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn label<'a>(&self, bn: &'a BayesianNetwork, name: &str) -> Option<&'a str> {
        bn.index_of(name).map(|v| bn.label(v, self.0[v]))
    }

    pub fn labels<'a>(&self, bn: &'a BayesianNetwork) -> Vec<&'a str> {
        self.0
            .iter()
            .enumerate()
            .map(|(v, &s)| bn.label(v, s))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use crate::fixtures::{tiny, tiny_variables};
    use super::*;

    #[test]
    fn tiny_network_is_valid() {
        assert!(validate_network(&tiny_variables()).is_ok());
    }

    #[test]
    fn bad_row_sum_is_one_problem() {
        let mut vars = tiny_variables();
        vars[1].cpt[0] = vec![0.7, 0.4];
        let report = validate_network(&vars);
        assert_eq!(report.problems.len(), 1);
        assert_eq!(report.problems[0].variable, "B");
        match report.problems[0].kind {
            ProblemKind::RowSum { row, sum } => {
                assert_eq!(row, 0);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            ref k => panic!("unexpected problem {k:?}"),
        }
        assert!(report.problems[0].to_string().contains("row sum 1.1 ≠ 1"));
    }

    #[test]
    fn mutual_parents_is_one_cycle_problem() {
        let vars = vec![
            Variable::new("X", &["0", "1"], &["Y"], vec![vec![0.5, 0.5]; 2]),
            Variable::new("Y", &["0", "1"], &["X"], vec![vec![0.5, 0.5]; 2]),
        ];
        let report = validate_network(&vars);
        assert_eq!(report.problems.len(), 1);
        assert_eq!(report.problems[0].kind, ProblemKind::Cycle);
        assert!(matches!(
            topological_order(&vars),
            Err(BnError::Cycle(ref n)) if n == "X" || n == "Y"
        ));
    }

    #[test]
    fn shape_dangling_and_self_parent_are_reported() {
        let vars = vec![
            Variable::root("A", &["0", "1"], vec![0.5, 0.5]),
            Variable::new("B", &["0", "1"], &["A"], vec![vec![0.5, 0.5]]),
            Variable::new("C", &["0", "1"], &["ghost"], vec![vec![0.5, 0.5]]),
            Variable::new("D", &["0", "1"], &["D"], vec![vec![0.5, 0.5]]),
            Variable::root("E", &["x", "y"], vec![0.5, 0.2, 0.3]),
        ];
        let kinds: Vec<_> = validate_network(&vars)
            .problems
            .into_iter()
            .map(|p| (p.variable, p.kind))
            .collect();
        assert!(kinds.contains(&("B".into(), ProblemKind::RowCount { expected: 2, found: 1 })));
        assert!(kinds.contains(&("C".into(), ProblemKind::DanglingParent("ghost".into()))));
        assert!(kinds.contains(&("D".into(), ProblemKind::SelfParent)));
        assert!(kinds.contains(&(
            "E".into(),
            ProblemKind::RowLength { row: 0, expected: 2, found: 3 }
        )));
    }

    #[test]
    fn duplicate_names_and_out_of_range_entries() {
        let vars = vec![
            Variable::root("A", &["0", "1"], vec![1.5, -0.5]),
            Variable::root("A", &["0"], vec![1.0]),
        ];
        let report = validate_network(&vars);
        assert!(report
            .problems
            .iter()
            .any(|p| p.kind == ProblemKind::DuplicateName));
        assert_eq!(
            report
                .problems
                .iter()
                .filter(|p| matches!(p.kind, ProblemKind::EntryOutOfRange { .. }))
                .count(),
            2
        );
    }

    #[test]
    fn topological_orders() {
        assert_eq!(topological_order(&tiny_variables()).unwrap(), ["A", "B"]);

        let roots = vec![
            Variable::root("X", &["0"], vec![1.0]),
            Variable::root("Y", &["0"], vec![1.0]),
            Variable::root("Z", &["0"], vec![1.0]),
        ];
        assert_eq!(topological_order(&roots).unwrap(), ["X", "Y", "Z"]);

        let chain = vec![
            Variable::new("A", &["0"], &["B"], vec![vec![1.0]]),
            Variable::new("B", &["0"], &["C"], vec![vec![1.0]]),
            Variable::root("C", &["0"], vec![1.0]),
        ];
        assert_eq!(topological_order(&chain).unwrap(), ["C", "B", "A"]);
        assert_eq!(BayesianNetwork::new(chain).unwrap().topological_order(), ["C", "B", "A"]);
    }

    #[test]
    fn joint_probability_is_product_of_cpt_entries() {
        let bn = tiny();
        let a11 = bn.assignment([("A", "1"), ("B", "1")]).unwrap();
        let a00 = bn.assignment([("A", "0"), ("B", "0")]).unwrap();
        assert!((bn.joint_probability(&a11) - 0.32).abs() < 1e-15);
        assert!((bn.joint_probability(&a00) - 0.42).abs() < 1e-15);

        let zero = BayesianNetwork::new(vec![
            Variable::root("A", &["0", "1"], vec![1.0, 0.0]),
            Variable::new("B", &["0", "1"], &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        ])
        .unwrap();
        let a = zero.assignment([("A", "1"), ("B", "0")]).unwrap();
        assert_eq!(zero.joint_probability(&a), 0.0);
    }

    #[test]
    fn rows_within_tolerance_are_renormalized() {
        let bn = BayesianNetwork::new(vec![Variable::root(
            "A",
            &["0", "1"],
            vec![0.6 + 4e-10, 0.4],
        )])
        .unwrap();
        let sum: f64 = bn.cpt_row(0, 0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evidence_rejects_unknown_names_and_labels() {
        let bn = tiny();
        assert!(matches!(
            bn.evidence([("C", "0")]),
            Err(BnError::UnknownVariable(_))
        ));
        assert!(matches!(
            bn.evidence([("A", "7")]),
            Err(BnError::UnknownValue { .. })
        ));
    }
}
