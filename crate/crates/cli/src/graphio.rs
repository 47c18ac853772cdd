//! Graph ingestion: whitespace edge lists with `#` comments, or JSON
//! `{"vertices": [...], "edges": [[u, v], ...]}`. Text diagnostics carry
//! line numbers.

use edge_spectra::graph::{Graph, GraphError};
use serde_json::Value;
use std::collections::HashSet;
use std::fmt;

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Parse { line: usize, msg: String },
    Graph(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(msg) => write!(f, "{msg}"),
            LoadError::Parse { line, msg } => write!(f, "line {line}: {msg}"),
            LoadError::Graph(msg) => write!(f, "{msg}"),
        }
    }
}

fn from_graph_error(e: GraphError) -> LoadError {
    LoadError::Graph(e.to_string())
}

pub fn parse_edge_list(content: &str) -> Result<Graph, LoadError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = tokens.as_slice() else {
            return Err(LoadError::Parse {
                line: line_no,
                msg: format!("expected two vertex labels, got {}", tokens.len()),
            });
        };
        if a == b {
            return Err(LoadError::Parse {
                line: line_no,
                msg: format!("loop edge at vertex {a:?}"),
            });
        }
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        if !seen.insert(key) {
            return Err(LoadError::Parse {
                line: line_no,
                msg: format!("duplicate undirected edge {a:?} -- {b:?}"),
            });
        }
        pairs.push((a.to_string(), b.to_string()));
    }
    Graph::build(&pairs).map_err(from_graph_error)
}

pub fn parse_graph_json(content: &str) -> Result<Graph, LoadError> {
    let value: Value =
        serde_json::from_str(content).map_err(|e| LoadError::Graph(format!("bad JSON: {e}")))?;
    let label_of = |v: &Value| -> Option<String> {
        match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        }
    };
    let edges = value
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| LoadError::Graph("missing \"edges\" array".into()))?;
    let mut pairs = Vec::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        let pair = e.as_array().filter(|a| a.len() == 2);
        let (a, b) = pair
            .and_then(|a| Some((label_of(&a[0])?, label_of(&a[1])?)))
            .ok_or_else(|| LoadError::Graph(format!("edge {i} is not a pair of labels")))?;
        pairs.push((a, b));
    }
    let g = Graph::build(&pairs).map_err(from_graph_error)?;
    if let Some(vertices) = value.get("vertices").and_then(Value::as_array) {
        for v in vertices {
            let label = label_of(v)
                .ok_or_else(|| LoadError::Graph("vertex entry is not a label".into()))?;
            if g.vertex_by_label(&label).is_none() {
                return Err(LoadError::Graph(format!(
                    "vertex {label:?} appears in no edge (graph is not connected)"
                )));
            }
        }
    }
    Ok(g)
}

pub fn load_graph(path: &str) -> Result<Graph, LoadError> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io(format!("cannot read {path}: {e}")))?;
    if content.trim_start().starts_with('{') {
        parse_graph_json(&content)
    } else {
        parse_edge_list(&content)
    }
}
