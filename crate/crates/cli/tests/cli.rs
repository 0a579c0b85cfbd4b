use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use popweave::RunManifest;
use popweave_core::fixtures::{bundled_scenario_path, inconsistent_scenario_path};

fn popweave(args: &[&str]) -> Output {
    popweave_env(args, &[])
}

fn popweave_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_popweave"));
    cmd.args(args).env_remove("POPWEAVE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn bundled() -> PathBuf {
    bundled_scenario_path()
}

#[test]
fn validate_bundled_scenario() {
    let out = popweave(&["validate", path_str(&bundled())]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("ok"));
}

#[test]
fn validate_missing_file_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(bundled()).unwrap().replace("friends.bn.json", "missing-friends.bn.json");
    let base = bundled().parent().unwrap().to_path_buf();
    for f in ["agents", "spouses", "motherOf", "colleagues", "friends"] {
        let name = format!("{f}.bn.json");
        fs::copy(base.join(&name), dir.path().join(&name)).unwrap();
    }
    let scenario = dir.path().join("s.scenario.json");
    fs::write(&scenario, src).unwrap();
    let out = popweave(&["validate", path_str(&scenario)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("missing-friends.bn.json"), "{}", text(&out.stderr));
}

fn never_yes_scenario(dir: &Path) -> PathBuf {
    let inc = inconsistent_scenario_path();
    let base = inc.parent().unwrap();
    fs::copy(base.join("agents.bn.json"), dir.join("agents.bn.json")).unwrap();
    let link = fs::read_to_string(base.join("link.bn.json"))
        .unwrap()
        .replace("[[1, 0], [0, 1], [0, 1], [1, 0]]", "[[0, 1], [0, 1], [0, 1], [0, 1]]");
    fs::write(dir.join("link.bn.json"), link).unwrap();
    let scenario = dir.join("never.scenario.json");
    fs::copy(&inc, &scenario).unwrap();
    scenario
}

#[test]
fn never_yes_link_warns_and_strict_fails() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = never_yes_scenario(dir.path());
    let out = popweave(&["validate", path_str(&scenario)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("unsatisfiable link type"));
    let strict = popweave(&["validate", "--strict", path_str(&scenario)]);
    assert_eq!(strict.status.code(), Some(1));
}

fn digests(dir: &Path) -> Vec<(String, String)> {
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for f in &m.files {
        let bytes = fs::read(dir.join(&f.path)).unwrap();
        assert_eq!(popweave::sha256_hex(&bytes), f.sha256, "{}", f.path);
    }
    m.files.into_iter().map(|f| (f.path, f.sha256)).collect()
}

#[test]
fn generate_is_deterministic_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = bundled();
    let run = |name: &str, threads: Option<&str>| {
        let out_dir = dir.path().join(name);
        let args = ["generate", path_str(&scenario), "--size", "3000", "--seed", "17", "--out", path_str(&out_dir)];
        let out = match threads {
            Some(t) => popweave_env(&args, &[("POPWEAVE_THREADS", t)]),
            None => popweave(&args),
        };
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        digests(&out_dir)
    };
    let a = run("a", None);
    let b = run("b", None);
    let c = run("c", Some("1"));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let names: Vec<&str> = a.iter().map(|(p, _)| p.as_str()).collect();
    for t in ["spouses", "motherOf", "colleagues", "friends", "fatherOf", "siblings", "friendsOfFriends"] {
        assert!(names.contains(&format!("edges/{t}.csv").as_str()), "{names:?}");
    }
    assert!(names.contains(&"graph.graphml") && names.contains(&"matching_report.json"));
}

#[test]
fn generate_formats() {
    let dir = tempfile::tempdir().unwrap();
    for (format, files) in [("csv", vec!["nodes.csv", "edges.csv"]), ("dot", vec!["graph.dot"])] {
        let out_dir = dir.path().join(format);
        let out = popweave(&["generate", path_str(&bundled()), "--size", "200", "--out", path_str(&out_dir), "--format", format]);
        assert_eq!(out.status.code(), Some(0));
        for f in files {
            assert!(out_dir.join(f).is_file(), "{format}: {f}");
        }
    }
}

#[test]
fn generate_single_agent() {
    let dir = tempfile::tempdir().unwrap();
    let out = popweave(&["generate", path_str(&inconsistent_scenario_path()), "--size", "1", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("matching_report.json")).unwrap()).unwrap();
    let t = &report["types"][0];
    assert_eq!(t["created_links"], 0);
    assert_eq!(t["required_stubs"], 2);
    assert_eq!(fs::read_to_string(dir.path().join("edges/mentorOf.csv")).unwrap().lines().count(), 1);
}

#[test]
fn unwritable_output_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = popweave(&["generate", path_str(&bundled()), "--size", "50", "--out", path_str(&blocker.join("out"))]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn stats_on_triangle_files() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let edges = dir.path().join("edges.csv");
    fs::write(&nodes, "id,kind\n0,a\n1,a\n2,b\n").unwrap();
    fs::write(
        &edges,
        "source,target,type,directed,provenance\n0,1,t,false,sampled\n1,2,t,false,sampled\n0,2,t,false,fallback\n",
    )
    .unwrap();
    let csv = dir.path().join("stats.csv");
    let out = popweave(&["stats", "--nodes", path_str(&nodes), "--edges", path_str(&edges), "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("density             1.000000"));
    let stats = fs::read_to_string(&csv).unwrap();
    assert!(stats.contains("density,1\n") && stats.contains("transitivity,1\n") && stats.contains("mean_degree:t,2\n"));
}

#[test]
fn stats_rejects_malformed_edges() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let edges = dir.path().join("edges.csv");
    fs::write(&nodes, "id\n0\n1\n").unwrap();
    fs::write(&edges, "source,target,type,directed,provenance\n0,9,t,false,sampled\n").unwrap();
    let out = popweave(&["stats", "--nodes", path_str(&nodes), "--edges", path_str(&edges)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_reads_a_generated_directory() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g");
    assert_eq!(popweave(&["generate", path_str(&bundled()), "--size", "400", "--out", path_str(&g)]).status.code(), Some(0));
    let out = popweave(&["stats", path_str(&g)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stats = fs::read_to_string(g.join("stats.csv")).unwrap();
    assert!(stats.starts_with("metric,value\nagents,400\n"));
    assert!(stats.contains("mean_degree:siblings,"));
}

#[test]
fn sweep_single_size_and_inconsistent_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = popweave(&["sweep", path_str(&bundled()), "--sizes", "100", "--seeds", "1", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 2);

    let out = popweave(&[
        "sweep", path_str(&inconsistent_scenario_path()), "--sizes", "100,500,2000", "--seeds", "2", "--out", path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "matching_error_mean").unwrap();
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|&e| e > 0.2), "{rows:?}");
}

#[test]
fn bad_arguments_are_input_errors() {
    assert_eq!(popweave(&["generate"]).status.code(), Some(2));
    assert_eq!(popweave(&["sweep", path_str(&bundled()), "--sizes", "0", "--out", "/dev/null"]).status.code(), Some(2));
    let out = popweave_env(&["validate", path_str(&bundled())], &[("POPWEAVE_THREADS", "0")]);
    assert_eq!(out.status.code(), Some(2));
}
