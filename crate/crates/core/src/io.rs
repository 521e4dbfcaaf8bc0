//! Graph file formats: DIMACS `.col` and plain edge lists.
//!
//! DIMACS files carry `c` comment lines, a single `p edge N M` header and
//! `e U V` lines with 1-based endpoints. Edge lists hold one `U V` pair of
//! 0-based ids per line; `#` starts a comment, and the optional header
//! `# nodes N` fixes the node count (needed for isolated nodes).

use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    DimacsCol,
    EdgeList,
}

impl GraphFormat {
    /// `.col` selects DIMACS, anything else the edge-list format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("col") => GraphFormat::DimacsCol,
            _ => GraphFormat::EdgeList,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            GraphFormat::DimacsCol => "col",
            GraphFormat::EdgeList => "edgelist",
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::DimacsCol => parse_dimacs(text),
        GraphFormat::EdgeList => parse_edge_list(text),
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text, GraphFormat::from_path(path))
}

fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("c") => {}
            Some("p") => {
                if n.is_some() {
                    return Err(parse_err(line_no, "duplicate `p` line"));
                }
                match toks.next() {
                    Some("edge") | Some("edges") | Some("col") => {}
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("unsupported problem type {other:?}"),
                        ))
                    }
                }
                n = Some(parse_usize(toks.next(), line_no, "node count")?);
                parse_usize(toks.next(), line_no, "edge count")?;
            }
            Some("e") => {
                let nodes = n.ok_or_else(|| parse_err(line_no, "`e` line before `p` line"))?;
                let u = parse_usize(toks.next(), line_no, "endpoint")?;
                let v = parse_usize(toks.next(), line_no, "endpoint")?;
                if u == 0 || v == 0 || u > nodes || v > nodes {
                    return Err(parse_err(
                        line_no,
                        format!("endpoint out of range 1..={nodes}: ({u}, {v})"),
                    ));
                }
                if u == v {
                    return Err(parse_err(line_no, format!("self-loop on node {u}")));
                }
                edges.push((u - 1, v - 1));
            }
            Some(tag) => return Err(parse_err(line_no, format!("unknown line type `{tag}`"))),
            None => {}
        }
    }
    let n = n.ok_or_else(|| parse_err(text.lines().count(), "missing `p edge N M` line"))?;
    Graph::from_edges(n, edges).map_err(|e| parse_err(0, e.to_string()))
}

fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut toks = comment.split_whitespace();
            if toks.next() == Some("nodes") {
                declared = Some(parse_usize(toks.next(), line_no, "node count")?);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let u = parse_usize(toks.next(), line_no, "endpoint")?;
        let v = parse_usize(toks.next(), line_no, "endpoint")?;
        if u == v {
            return Err(parse_err(line_no, format!("self-loop on node {u}")));
        }
        if let Some(n) = declared {
            if u >= n || v >= n {
                return Err(parse_err(
                    line_no,
                    format!("endpoint out of range 0..{n}: ({u}, {v})"),
                ));
            }
        }
        edges.push((u, v));
    }
    match declared {
        Some(n) => Graph::from_edges(n, edges).map_err(|e| parse_err(0, e.to_string())),
        None => {
            // distinct ids, remapped in ascending order
            let mut ids: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
            ids.sort_unstable();
            ids.dedup();
            let remap = |x: usize| ids.binary_search(&x).expect("id collected above");
            let mapped: Vec<_> = edges.iter().map(|&(u, v)| (remap(u), remap(v))).collect();
            Graph::from_edges(ids.len(), mapped).map_err(|e| parse_err(0, e.to_string()))
        }
    }
}

pub fn write_graph(g: &Graph, format: GraphFormat) -> String {
    let mut out = String::new();
    match format {
        GraphFormat::DimacsCol => {
            let _ = writeln!(out, "p edge {} {}", g.node_count(), g.edge_count());
            for (u, v) in g.edges() {
                let _ = writeln!(out, "e {} {}", u + 1, v + 1);
            }
        }
        GraphFormat::EdgeList => {
            let _ = writeln!(out, "# nodes {}", g.node_count());
            for (u, v) in g.edges() {
                let _ = writeln!(out, "{u} {v}");
            }
        }
    }
    out
}
