//! End-to-end generation: population, matching, transitive rules, and the
//! population-size sweep.

use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::SocialGraph;
use crate::io::Scenario;
use crate::linker::{run_all_matching, LinkError, MatchedLink, MatchingReport};
use crate::metrics::{graph_stats, GraphStats, MetricsError};
use crate::population::{distribution_error, generate_population, Population, PopulationError};
use crate::rng::stage_stream;
use crate::transitive::{apply_all_rules, RuleError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Population(#[from] PopulationError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub population_ms: f64,
    pub matching_ms: f64,
    pub transitive_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub population: Population,
    pub graph: SocialGraph,
    pub report: MatchingReport,
    /// Matched links per link type, oriented side A → side B.
    pub matched: Vec<Vec<MatchedLink>>,
    /// Links created by each transitive rule.
    pub rule_counts: Vec<usize>,
    pub timings: StageTimings,
}

// The browser target has no monotonic clock through std; stage timings
// are reported as zero there.
#[cfg(not(target_arch = "wasm32"))]
fn now() -> Option<Instant> {
    Some(Instant::now())
}

#[cfg(target_arch = "wasm32")]
fn now() -> Option<Instant> {
    None
}

fn ms(from: Option<Instant>, to: Option<Instant>) -> f64 {
    match (from, to) {
        (Some(a), Some(b)) => (b - a).as_secs_f64() * 1e3,
        _ => 0.0,
    }
}

/// Generates the population and the full typed graph for `n` agents.
pub fn generate(scenario: &Scenario, n: usize, seed: u64) -> Result<Generated, PipelineError> {
    let t0 = now();
    let mut population = generate_population(&scenario.agent_bn, n, seed);
    population.assign_capacities(&scenario.agent_bn, scenario.link_types())?;
    let t1 = now();
    let outcome = run_all_matching(scenario, &mut population, seed)?;
    let t2 = now();
    let mut graph = outcome.graph;
    let rule_counts = apply_all_rules(&scenario.config.transitive_rules, &mut graph, seed)?;
    let t3 = now();
    Ok(Generated {
        population,
        graph,
        report: outcome.report,
        matched: outcome.links,
        rule_counts,
        timings: StageTimings {
            population_ms: ms(t0, t1),
            matching_ms: ms(t1, t2),
            transitive_ms: ms(t2, t3),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    pub distribution_error: f64,
    /// Per matching type, in declaration order.
    pub matching_errors: Vec<(String, f64)>,
    pub stats: Option<GraphStats>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn mean_matching_error(&self) -> f64 {
        if self.matching_errors.is_empty() {
            return 0.0;
        }
        self.matching_errors.iter().map(|(_, e)| e).sum::<f64>() / self.matching_errors.len() as f64
    }
}

/// Settings for [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub seeds_per_size: usize,
    /// BFS sources for the path-length estimate.
    pub path_sample_k: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sizes: vec![500, 1000, 2000, 5000, 10_000, 20_000],
            seeds_per_size: 5,
            path_sample_k: 64,
        }
    }
}

/// Runs one pipeline row and its measurements.
pub fn sweep_row(scenario: &Scenario, n: usize, seed: u64, path_sample_k: usize) -> SweepRow {
    let run = || -> Result<SweepRow, PipelineError> {
        let g = generate(scenario, n, seed)?;
        let dist = distribution_error(&scenario.agent_bn, &g.population)?;
        let stats = if n >= 2 {
            let mut rng = stage_stream(seed, "stats");
            Some(graph_stats(&g.graph, path_sample_k, &mut rng)?)
        } else {
            None
        };
        Ok(SweepRow {
            n,
            seed,
            distribution_error: dist,
            matching_errors: g.report.matching_errors(),
            stats,
            error: None,
        })
    };
    run().unwrap_or_else(|e| SweepRow {
        n,
        seed,
        distribution_error: f64::NAN,
        matching_errors: Vec::new(),
        stats: None,
        error: Some(e.to_string()),
    })
}

/// One row per (size, seed); seeds are `scenario.seed + j` for
/// `j < seeds_per_size`. Rows run concurrently but come back in
/// (size, seed) order.
pub fn sweep(scenario: &Scenario, config: &SweepConfig) -> Vec<SweepRow> {
    let jobs: Vec<(usize, u64)> = config
        .sizes
        .iter()
        .flat_map(|&n| (0..config.seeds_per_size as u64).map(move |j| (n, j)))
        .map(|(n, j)| (n, scenario.config.seed.wrapping_add(j)))
        .collect();
    let row = |&(n, seed): &(usize, u64)| sweep_row(scenario, n, seed, config.path_sample_k);
    #[cfg(feature = "parallel")]
    let rows = jobs.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows = jobs.iter().map(row).collect();
    rows
}

/// Column order of the sweep table: fixed columns, then one
/// `matching_error:<type>` column per matching type, then `error`.
pub fn sweep_header(scenario: &Scenario) -> Vec<String> {
    let mut h: Vec<String> = [
        "n",
        "seed",
        "distribution_error",
        "matching_error_mean",
        "density",
        "transitivity",
        "avg_path_length",
        "path_sources",
        "mean_degree",
        "largest_component",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for t in scenario.link_types() {
        if t.kind == crate::io::LinkKind::Matching {
            h.push(format!("matching_error:{}", t.name));
        }
    }
    h.push("error".into());
    h
}

/// Renders sweep rows as CSV with [`sweep_header`] columns.
pub fn sweep_csv(scenario: &Scenario, rows: &[SweepRow]) -> String {
    let header = sweep_header(scenario);
    let mut out = header.join(",");
    out.push('\n');
    let matching: Vec<&str> = scenario
        .link_types()
        .iter()
        .filter(|t| t.kind == crate::io::LinkKind::Matching)
        .map(|t| t.name.as_str())
        .collect();
    for r in rows {
        let mut cells = vec![r.n.to_string(), r.seed.to_string()];
        let num = |x: f64| if x.is_nan() { String::new() } else { format!("{x}") };
        cells.push(num(r.distribution_error));
        cells.push(if r.error.is_some() { String::new() } else { num(r.mean_matching_error()) });
        match &r.stats {
            Some(s) => {
                cells.push(num(s.density));
                cells.push(num(s.transitivity));
                cells.push(num(s.avg_path_length));
                cells.push(s.path_sources.to_string());
                cells.push(num(s.mean_degree));
                cells.push(s.largest_component.to_string());
            }
            None => cells.extend(std::iter::repeat_n(String::new(), 6)),
        }
        for name in &matching {
            cells.push(
                r.matching_errors
                    .iter()
                    .find(|(t, _)| t == name)
                    .map(|(_, e)| num(*e))
                    .unwrap_or_default(),
            );
        }
        cells.push(r.error.clone().unwrap_or_default().replace([',', '\n'], ";"));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
