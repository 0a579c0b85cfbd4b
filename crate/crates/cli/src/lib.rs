//! Command implementations behind the `popweave` binary.
//!
//! Every command returns an [`Outcome`] carrying the text to print and the
//! process exit status, so the commands can be driven from tests without
//! spawning a process.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use popweave_core::export::{self, read_agent_count, read_graph};
use popweave_core::io::LinkKind;
use popweave_core::metrics::{graph_stats, GraphStats};
use popweave_core::pipeline::{generate, sweep_csv, StageTimings};
use popweave_core::rng::stage_stream;
use popweave_core::{load_scenario, sweep, Scenario, SweepConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Warnings = 1,
    InputError = 2,
    RuntimeFailure = 3,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    /// Text for standard output.
    pub stdout: String,
    /// Text for standard error.
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { status: Status::Ok, stdout, stderr: String::new() }
    }

    fn fail(status: Status, message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { status, stdout: String::new(), stderr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum GraphFormat {
    #[default]
    Graphml,
    Csv,
    Dot,
}

// ---------------------------------------------------------------- validate

/// Structural warnings that do not prevent a run.
pub fn scenario_warnings(scenario: &Scenario) -> Vec<String> {
    let mut warnings = Vec::new();
    for (t, spec) in scenario.link_types().iter().enumerate() {
        if let Some(model) = &scenario.matching[t] {
            if model.link_probability() <= 0.0 {
                warnings.push(format!(
                    "unsatisfiable link type `{}`: `{}` is never \"yes\", so no agent can be linked",
                    spec.name,
                    model.bn.variable(model.link_var).name
                ));
            }
        }
    }
    let produced: Vec<&str> = scenario.config.transitive_rules.iter().map(|r| r.create.as_str()).collect();
    for spec in scenario.link_types() {
        if spec.kind == LinkKind::Transitive && !produced.contains(&spec.name.as_str()) {
            warnings.push(format!("transitive link type `{}` is not created by any rule", spec.name));
        }
    }
    for (i, r) in scenario.config.transitive_rules.iter().enumerate() {
        if r.probability == 0.0 {
            warnings.push(format!("rule {i} (`{}`) has probability 0 and never fires", r.create));
        }
    }
    warnings
}

pub fn cmd_validate(path: &Path, strict: bool) -> Outcome {
    let scenario = match load_scenario(path) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(Status::InputError, format!("error: {e}")),
    };
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", path.display());
    let _ = writeln!(out, "agent network: {} variables", scenario.agent_bn.len());
    for (t, spec) in scenario.link_types().iter().enumerate() {
        let detail = match &scenario.matching[t] {
            Some(m) => format!(
                "matching, {} network variables, p(link) = {:.4}",
                m.bn.len(),
                m.link_probability()
            ),
            None => "transitive".to_string(),
        };
        let dir = if spec.directed { "directed" } else { "undirected" };
        let _ = writeln!(out, "link type {}: {dir}, {detail}", spec.name);
    }
    let _ = writeln!(out, "transitive rules: {}", scenario.config.transitive_rules.len());
    let warnings = scenario_warnings(&scenario);
    for w in &warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let status = if warnings.is_empty() {
        let _ = writeln!(out, "ok");
        Status::Ok
    } else if strict {
        Status::Warnings
    } else {
        let _ = writeln!(out, "ok ({} warnings)", warnings.len());
        Status::Ok
    };
    Outcome { status, stdout: out, stderr: String::new() }
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub scenario: PathBuf,
    pub size: Option<usize>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: GraphFormat,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one `generate` run.
#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario: String,
    pub size: usize,
    pub seed: u64,
    pub format: String,
    pub timings_ms: BTreeMap<String, f64>,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files written so far; removed again unless the run completes.
struct Staged {
    root: PathBuf,
    files: Vec<(String, PathBuf, FileDigest)>,
    created_dirs: Vec<PathBuf>,
    committed: bool,
}

impl Staged {
    fn new(root: &Path) -> std::io::Result<Staged> {
        let mut created_dirs = Vec::new();
        if !root.exists() {
            fs::create_dir_all(root)?;
            created_dirs.push(root.to_path_buf());
        }
        Ok(Staged { root: root.to_path_buf(), files: Vec::new(), created_dirs, committed: false })
    }

    fn write(&mut self, rel: &str, contents: &[u8]) -> std::io::Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            if !dir.exists() {
                fs::create_dir_all(dir)?;
                self.created_dirs.push(dir.to_path_buf());
            }
        }
        fs::write(&path, contents)?;
        let digest = FileDigest {
            path: rel.to_string(),
            bytes: contents.len() as u64,
            sha256: sha256_hex(contents),
        };
        self.files.push((rel.to_string(), path, digest));
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for (_, path, _) in &self.files {
            let _ = fs::remove_file(path);
        }
        for dir in self.created_dirs.iter().rev() {
            let _ = fs::remove_dir(dir);
        }
    }
}

fn timings_map(t: &StageTimings) -> BTreeMap<String, f64> {
    [
        ("population", t.population_ms),
        ("matching", t.matching_ms),
        ("transitive", t.transitive_ms),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Link type names are used as file names; keep them portable.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn cmd_generate(args: &GenerateArgs) -> Outcome {
    let scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(Status::InputError, format!("error: {e}")),
    };
    let n = args.size.unwrap_or(scenario.config.population_size);
    let seed = args.seed.unwrap_or(scenario.config.seed);
    let g = match generate(&scenario, n, seed) {
        Ok(g) => g,
        Err(e) => return Outcome::fail(Status::RuntimeFailure, format!("error: generation failed: {e}")),
    };

    let io_fail = |e: std::io::Error| {
        Outcome::fail(
            Status::RuntimeFailure,
            format!("error: cannot write to {}: {e}", args.out.display()),
        )
    };
    let mut staged = match Staged::new(&args.out) {
        Ok(s) => s,
        Err(e) => return io_fail(e),
    };
    let bn = &scenario.agent_bn;
    let mut files: Vec<(String, Vec<u8>)> = vec![(
        "population.csv".into(),
        export::population_csv(bn, &g.population).into_bytes(),
    )];
    for (t, info) in g.graph.types().iter().enumerate() {
        files.push((
            format!("edges/{}.csv", file_stem(&info.name)),
            export::type_edges_csv(&g.graph, t).into_bytes(),
        ));
    }
    match args.format {
        GraphFormat::Graphml => files.push(("graph.graphml".into(), export::graphml(bn, &g.population, &g.graph).into_bytes())),
        GraphFormat::Dot => files.push(("graph.dot".into(), export::dot(bn, &g.population, &g.graph).into_bytes())),
        GraphFormat::Csv => {
            files.push(("nodes.csv".into(), export::population_csv(bn, &g.population).into_bytes()));
            files.push(("edges.csv".into(), export::edges_csv(&g.graph).into_bytes()));
        }
    }
    let mut report = serde_json::to_string_pretty(&g.report).expect("report serializes");
    report.push('\n');
    files.push(("matching_report.json".into(), report.into_bytes()));
    for (rel, bytes) in &files {
        if let Err(e) = staged.write(rel, bytes) {
            return io_fail(e);
        }
    }

    let manifest = RunManifest {
        tool_version: VERSION.to_string(),
        scenario: args.scenario.display().to_string(),
        size: n,
        seed,
        format: format!("{:?}", args.format).to_lowercase(),
        timings_ms: timings_map(&g.timings),
        files: staged.files.iter().map(|(_, _, d)| d.clone()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    if let Err(e) = staged.write("manifest.json", text.as_bytes()) {
        return io_fail(e);
    }
    staged.committed = true;

    let mut out = String::new();
    let _ = writeln!(out, "generated {n} agents (seed {seed}) into {}", args.out.display());
    for (t, info) in g.graph.types().iter().enumerate() {
        let _ = write!(out, "  {:<20} {:>8} links", info.name, g.graph.edge_count(t));
        if let Some(r) = g.report.get(&info.name) {
            let _ = write!(out, "  matching error {:.4}", r.matching_error());
        }
        out.push('\n');
    }
    Outcome::ok(out)
}

// ------------------------------------------------------------------- stats

#[derive(Debug, Clone, Default)]
pub struct StatsArgs {
    /// A directory written by `generate`.
    pub dir: Option<PathBuf>,
    pub nodes: Option<PathBuf>,
    pub edges: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub path_sources: usize,
    pub seed: u64,
}

/// Node and edge files of a generated directory: `nodes.csv` or
/// `population.csv`, and `edges.csv` or every file under `edges/`.
fn discover(dir: &Path) -> Result<(PathBuf, Vec<PathBuf>), String> {
    let nodes = ["nodes.csv", "population.csv"]
        .iter()
        .map(|f| dir.join(f))
        .find(|p| p.is_file())
        .ok_or_else(|| format!("{}: no nodes.csv or population.csv", dir.display()))?;
    let merged = dir.join("edges.csv");
    if merged.is_file() {
        return Ok((nodes, vec![merged]));
    }
    let edge_dir = dir.join("edges");
    let mut edges: Vec<PathBuf> = fs::read_dir(&edge_dir)
        .map_err(|e| format!("{}: {e}", edge_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    edges.sort();
    Ok((nodes, edges))
}

/// `metric,value` rows for a stats file.
pub fn stats_csv(s: &GraphStats) -> String {
    let mut out = String::from("metric,value\n");
    let mut row = |k: &str, v: String| {
        let _ = writeln!(out, "{k},{v}");
    };
    row("agents", s.agents.to_string());
    row("edges", s.edges.to_string());
    row("density", s.density.to_string());
    row("transitivity", s.transitivity.to_string());
    row("triangles", s.triangles.to_string());
    row("connected_triples", s.connected_triples.to_string());
    row("avg_path_length", s.avg_path_length.to_string());
    row("path_sources", s.path_sources.to_string());
    row("largest_component", s.largest_component.to_string());
    row("components", s.component_sizes.len().to_string());
    row("mean_degree", s.mean_degree.to_string());
    for t in &s.per_type {
        row(&format!("links:{}", t.link_type), t.links.to_string());
        row(&format!("mean_degree:{}", t.link_type), t.mean_degree.to_string());
    }
    out
}

pub fn stats_summary(s: &GraphStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "agents              {}", s.agents);
    let _ = writeln!(out, "edges               {}", s.edges);
    let _ = writeln!(out, "density             {:.6}", s.density);
    let _ = writeln!(out, "transitivity        {:.4}", s.transitivity);
    let _ = writeln!(out, "avg path length     {:.3} ({} sources)", s.avg_path_length, s.path_sources);
    let _ = writeln!(out, "largest component   {}", s.largest_component);
    let _ = writeln!(out, "mean degree         {:.3}", s.mean_degree);
    for t in &s.per_type {
        let _ = writeln!(out, "  {:<18} {:>8} links  mean degree {:.3}", t.link_type, t.links, t.mean_degree);
    }
    out
}

pub fn cmd_stats(args: &StatsArgs) -> Outcome {
    let (nodes, edges) = match (&args.dir, &args.nodes) {
        (Some(dir), None) => match discover(dir) {
            Ok(x) => x,
            Err(e) => return Outcome::fail(Status::InputError, format!("error: {e}")),
        },
        (None, Some(nodes)) => (nodes.clone(), args.edges.clone()),
        _ => return Outcome::fail(Status::InputError, "error: give a directory or --nodes with --edges"),
    };
    let open = |p: &Path| fs::File::open(p).map_err(|e| format!("{}: {e}", p.display()));
    let result = (|| -> Result<GraphStats, String> {
        let n = read_agent_count(open(&nodes)?).map_err(|e| format!("{}: {e}", nodes.display()))?;
        let readers = edges.iter().map(|p| open(p)).collect::<Result<Vec<_>, _>>()?;
        let graph = read_graph(n, readers).map_err(|e| format!("edges: {e}"))?;
        let mut rng = stage_stream(args.seed, "stats");
        graph_stats(&graph, args.path_sources, &mut rng).map_err(|e| e.to_string())
    })();
    let stats = match result {
        Ok(s) => s,
        Err(e) => return Outcome::fail(Status::InputError, format!("error: {e}")),
    };
    let out_path = args
        .out
        .clone()
        .or_else(|| args.dir.as_ref().map(|d| d.join("stats.csv")));
    if let Some(p) = &out_path {
        if let Err(e) = fs::write(p, stats_csv(&stats)) {
            return Outcome::fail(Status::RuntimeFailure, format!("error: cannot write {}: {e}", p.display()));
        }
    }
    let mut text = stats_summary(&stats);
    if out_path.is_none() {
        text.push('\n');
        text.push_str(&stats_csv(&stats));
    }
    Outcome::ok(text)
}

// ------------------------------------------------------------------- sweep

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    pub sizes: Vec<usize>,
    pub seeds: usize,
    pub out: PathBuf,
    pub path_sources: usize,
}

pub fn cmd_sweep(args: &SweepArgs) -> Outcome {
    if args.sizes.is_empty() || args.sizes.contains(&0) || args.seeds == 0 {
        return Outcome::fail(Status::InputError, "error: sizes and seeds must be positive");
    }
    let scenario = match load_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(Status::InputError, format!("error: {e}")),
    };
    let config = SweepConfig {
        sizes: args.sizes.clone(),
        seeds_per_size: args.seeds,
        path_sample_k: args.path_sources,
    };
    let rows = sweep(&scenario, &config);
    if let Err(e) = fs::write(&args.out, sweep_csv(&scenario, &rows)) {
        return Outcome::fail(Status::RuntimeFailure, format!("error: cannot write {}: {e}", args.out.display()));
    }
    let mut out = String::from("       n  matching_error  distribution_error  failed\n");
    for &n in &args.sizes {
        let at: Vec<_> = rows.iter().filter(|r| r.n == n).collect();
        let ok: Vec<_> = at.iter().filter(|r| r.error.is_none()).collect();
        let mean = |f: &dyn Fn(&popweave_core::SweepRow) -> f64| {
            if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
            }
        };
        let _ = writeln!(
            out,
            "{n:>8}  {:>14.5}  {:>18.5}  {:>6}",
            mean(&|r| r.mean_matching_error()),
            mean(&|r| r.distribution_error),
            at.len() - ok.len()
        );
    }
    let _ = writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display());
    Outcome::ok(out)
}

// ----------------------------------------------------------------- threads

/// Reads `POPWEAVE_THREADS`: unset or empty means no cap.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, String> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("POPWEAVE_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_cap_parsing() {
        assert_eq!(thread_cap(None), Ok(None));
        assert_eq!(thread_cap(Some(" ")), Ok(None));
        assert_eq!(thread_cap(Some("4")), Ok(Some(4)));
        assert!(thread_cap(Some("0")).is_err());
        assert!(thread_cap(Some("four")).is_err());
    }

    #[test]
    fn file_stems_are_portable() {
        assert_eq!(file_stem("motherOf"), "motherOf");
        assert_eq!(file_stem("friends of/friends"), "friends_of_friends");
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn staged_files_are_removed_unless_committed() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("out");
        {
            let mut s = Staged::new(&root).unwrap();
            s.write("edges/a.csv", b"x").unwrap();
            s.write("b.csv", b"y").unwrap();
        }
        assert!(!root.exists());
        {
            let mut s = Staged::new(&root).unwrap();
            s.write("edges/a.csv", b"x").unwrap();
            s.committed = true;
        }
        assert!(root.join("edges/a.csv").is_file());
    }
}
