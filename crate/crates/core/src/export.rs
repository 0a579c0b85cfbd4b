//! File writers and readers for populations and graphs.
//!
//! * population CSV: `id` then one column per agent attribute (declaration
//!   order), values are category labels verbatim;
//! * edge CSV: `source,target,type,directed,provenance`, used both for the
//!   per-type lists and for the merged edge file;
//! * GraphML: attributes as node data keys, link type as an edge key;
//! * DOT: one colour per link type, for eyeballing small graphs.

use std::fmt::Write as _;
use std::io::Read;

use crate::bn::BayesianNetwork;
use crate::graph::{LinkTypeInfo, Provenance, SocialGraph};
use crate::io::LinkKind;
use crate::population::Population;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Malformed(String),
}

pub const EDGE_HEADER: [&str; 5] = ["source", "target", "type", "directed", "provenance"];

pub fn population_csv(bn: &BayesianNetwork, pop: &Population) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    header.extend(bn.variables().iter().map(|v| v.name.clone()));
    w.write_record(&header).expect("in-memory write");
    for a in &pop.agents {
        let mut rec = vec![a.id.to_string()];
        rec.extend(a.attributes.labels(bn).into_iter().map(str::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 labels")
}

fn edge_rows<'a>(
    graph: &'a SocialGraph,
    types: impl Iterator<Item = usize> + 'a,
) -> impl Iterator<Item = [String; 5]> + 'a {
    types.flat_map(move |t| {
        let info = &graph.types()[t];
        graph.links(t).map(move |l| {
            [
                l.a.to_string(),
                l.b.to_string(),
                info.name.clone(),
                info.directed.to_string(),
                l.provenance.as_str().to_string(),
            ]
        })
    })
}

fn edges_to_csv(rows: impl Iterator<Item = [String; 5]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EDGE_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Edge list of a single link type.
pub fn type_edges_csv(graph: &SocialGraph, link_type: usize) -> String {
    edges_to_csv(edge_rows(graph, std::iter::once(link_type)))
}

/// Edge list of every link type, in declaration order.
pub fn edges_csv(graph: &SocialGraph) -> String {
    edges_to_csv(edge_rows(graph, 0..graph.types().len()))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn graphml(bn: &BayesianNetwork, pop: &Population, graph: &SocialGraph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (i, v) in bn.variables().iter().enumerate() {
        let _ = writeln!(
            s,
            "  <key id=\"n{i}\" for=\"node\" attr.name=\"{}\" attr.type=\"string\"/>",
            xml_escape(&v.name)
        );
    }
    s.push_str("  <key id=\"type\" for=\"edge\" attr.name=\"type\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"provenance\" for=\"edge\" attr.name=\"provenance\" attr.type=\"string\"/>\n");
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for a in &pop.agents {
        let _ = writeln!(s, "    <node id=\"a{}\">", a.id);
        for (i, label) in a.attributes.labels(bn).iter().enumerate() {
            let _ = writeln!(s, "      <data key=\"n{i}\">{}</data>", xml_escape(label));
        }
        s.push_str("    </node>\n");
    }
    for (e, l) in graph.all_links().enumerate() {
        let info = &graph.types()[l.link_type];
        let _ = writeln!(
            s,
            "    <edge id=\"e{e}\" source=\"a{}\" target=\"a{}\" directed=\"{}\">",
            l.a, l.b, info.directed
        );
        let _ = writeln!(s, "      <data key=\"type\">{}</data>", xml_escape(&info.name));
        let _ = writeln!(s, "      <data key=\"provenance\">{}</data>", l.provenance.as_str());
        s.push_str("    </edge>\n");
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn dot(bn: &BayesianNetwork, pop: &Population, graph: &SocialGraph) -> String {
    let mut s = String::from("digraph population {\n  node [shape=circle, fontsize=9];\n");
    for a in &pop.agents {
        let label = a.attributes.labels(bn).join("\\n");
        let _ = writeln!(s, "  a{} [label=\"{}\\n{}\"];", a.id, a.id, label.replace('"', "\\\""));
    }
    for l in graph.all_links() {
        let info = &graph.types()[l.link_type];
        let colour = PALETTE[l.link_type % PALETTE.len()];
        let dir = if info.directed { "" } else { ", dir=none" };
        let _ = writeln!(
            s,
            "  a{} -> a{} [color=\"{colour}\", label=\"{}\"{dir}];",
            l.a, l.b, info.name
        );
    }
    s.push_str("}\n");
    s
}

/// Counts agent rows in a population (or nodes) CSV.
pub fn read_agent_count<R: Read>(reader: R) -> Result<usize, ExportError> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("id") {
        return Err(ExportError::Malformed("node file must start with an `id` column".into()));
    }
    let mut count = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let id: usize = rec[0]
            .parse()
            .map_err(|_| ExportError::Malformed(format!("row {}: bad id `{}`", i + 1, &rec[0])))?;
        if id != i {
            return Err(ExportError::Malformed(format!("row {}: ids must be 0..n-1 in order", i + 1)));
        }
        count += 1;
    }
    Ok(count)
}

/// Reads edge CSV files into a graph over `agent_count` agents. Link types
/// are registered in order of first appearance.
pub fn read_graph<R: Read>(agent_count: usize, edge_files: Vec<R>) -> Result<SocialGraph, ExportError> {
    let mut types: Vec<LinkTypeInfo> = Vec::new();
    let mut rows: Vec<(usize, usize, usize, Provenance)> = Vec::new();
    for file in edge_files {
        let mut r = csv::Reader::from_reader(file);
        if r.headers()?.iter().collect::<Vec<_>>() != EDGE_HEADER {
            return Err(ExportError::Malformed(format!(
                "edge file header must be {}",
                EDGE_HEADER.join(",")
            )));
        }
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| ExportError::Malformed(format!("edge row {}: bad {what}", i + 1));
            let a: usize = rec[0].parse().map_err(|_| bad("source"))?;
            let b: usize = rec[1].parse().map_err(|_| bad("target"))?;
            if a >= agent_count || b >= agent_count {
                return Err(bad("endpoint (out of range)"));
            }
            let directed: bool = rec[3].parse().map_err(|_| bad("directed flag"))?;
            let provenance = Provenance::parse(&rec[4]).ok_or_else(|| bad("provenance"))?;
            let t = match types.iter().position(|t| t.name == rec[2]) {
                Some(t) => {
                    if types[t].directed != directed {
                        return Err(bad("directed flag (inconsistent for type)"));
                    }
                    t
                }
                None => {
                    types.push(LinkTypeInfo {
                        name: rec[2].to_string(),
                        directed,
                        kind: if provenance == Provenance::Transitive {
                            LinkKind::Transitive
                        } else {
                            LinkKind::Matching
                        },
                    });
                    types.len() - 1
                }
            };
            rows.push((t, a, b, provenance));
        }
    }
    let mut g = SocialGraph::new(agent_count, types);
    for (t, a, b, p) in rows {
        g.insert(t, a, b, p);
    }
    Ok(g)
}
