//! Graph corpora on disk, synthetic generators and persisted artifacts.
//!
//! Graph files are JSON Lines, one record per line:
//! `{"nodes":[{"label":"a"},...],"edges":[{"u":0,"v":1,"label":"x"},...]}`
//! with optional `"directed"`, `"id"` and `"target"` keys. A missing edge
//! label becomes [`EMPTY_EDGE_LABEL`].

mod gen;
mod model;
mod streams;

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::graph::{Edge, Label, LabeledGraph, EMPTY_EDGE_LABEL};

pub use gen::{gen_molecule_like, gen_random_graph, gen_random_multigraph, synthetic_molecules};
pub use model::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use streams::{
    read_sequences, read_tokens, write_sequences, write_tokens, SequenceRecord, TokenRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: field {field:?}: {message}")]
    SchemaError {
        line: usize,
        field: String,
        message: String,
    },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("model format version {found} is newer than supported version {supported}")]
    VersionMismatch { found: u64, supported: u64 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
}

impl CorpusError {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by the file system rather than content.
    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::Io { .. })
    }
}

/// One graph of a corpus file.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphRecord {
    pub graph: LabeledGraph,
    pub id: Option<String>,
    /// Passed through untouched.
    pub target: Option<Value>,
}

impl GraphRecord {
    pub fn new(graph: LabeledGraph) -> Self {
        GraphRecord {
            graph,
            id: None,
            target: None,
        }
    }
}

fn schema(line: usize, field: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::SchemaError {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn label_of(v: &Value, line: usize, field: &str) -> Result<Label, CorpusError> {
    match v {
        Value::String(s) if !s.is_empty() => Ok(Label::new(s)),
        Value::String(_) => Err(schema(line, field, "empty label")),
        _ => Err(schema(line, field, "label must be a string")),
    }
}

/// Parses one record line. `line` is 1-based and only used in errors.
pub fn parse_graph_line(text: &str, line: usize) -> Result<GraphRecord, CorpusError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CorpusError::ParseError {
        line,
        message: e.to_string(),
    })?;
    let obj = v
        .as_object()
        .ok_or_else(|| schema(line, "<record>", "expected a JSON object"))?;

    let nodes = obj
        .get("nodes")
        .ok_or_else(|| schema(line, "nodes", "missing"))?
        .as_array()
        .ok_or_else(|| schema(line, "nodes", "expected an array"))?;
    let mut labels = Vec::with_capacity(nodes.len());
    for (i, n) in nodes.iter().enumerate() {
        let field = format!("nodes[{i}].label");
        let l = n
            .as_object()
            .and_then(|o| o.get("label"))
            .ok_or_else(|| schema(line, &field, "missing"))?;
        labels.push(label_of(l, line, &field)?);
    }

    let mut edges = Vec::new();
    if let Some(es) = obj.get("edges") {
        let es = es
            .as_array()
            .ok_or_else(|| schema(line, "edges", "expected an array"))?;
        edges.reserve(es.len());
        for (i, e) in es.iter().enumerate() {
            let o = e
                .as_object()
                .ok_or_else(|| schema(line, &format!("edges[{i}]"), "expected an object"))?;
            let end = |key: &str| -> Result<usize, CorpusError> {
                let field = format!("edges[{i}].{key}");
                let x = o
                    .get(key)
                    .ok_or_else(|| schema(line, &field, "missing"))?
                    .as_u64()
                    .ok_or_else(|| schema(line, &field, "expected a non-negative integer"))?;
                if x >= labels.len() as u64 {
                    return Err(CorpusError::ParseError {
                        line,
                        message: format!(
                            "{field} = {x} is out of range for {} nodes",
                            labels.len()
                        ),
                    });
                }
                Ok(x as usize)
            };
            let (u, v) = (end("u")?, end("v")?);
            let label = match o.get("label") {
                None | Some(Value::Null) => Label::new(EMPTY_EDGE_LABEL),
                Some(l) => label_of(l, line, &format!("edges[{i}].label"))?,
            };
            edges.push(Edge { u, v, label });
        }
    }

    let directed = match obj.get("directed") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(schema(line, "directed", "expected a boolean")),
    };
    let id = match obj.get("id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(schema(line, "id", "expected a string")),
    };
    let target = obj.get("target").filter(|t| !t.is_null()).cloned();
    let graph = LabeledGraph::from_parts(labels, edges, directed).map_err(|e| CorpusError::ParseError {
        line,
        message: e.to_string(),
    })?;
    Ok(GraphRecord { graph, id, target })
}

/// Streaming reader over a graph JSONL source. Blank lines are skipped.
pub struct GraphReader<R> {
    lines: io::Lines<R>,
    line: usize,
    path: String,
    seen: HashSet<String>,
}

impl<R: BufRead> Iterator for GraphReader<R> {
    type Item = Result<GraphRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => {
                    self.line += 1;
                    let err = if e.kind() == io::ErrorKind::InvalidData {
                        CorpusError::ParseError {
                            line: self.line,
                            message: "invalid UTF-8".into(),
                        }
                    } else {
                        CorpusError::io(&self.path, e)
                    };
                    return Some(Err(err));
                }
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let rec = parse_graph_line(&text, self.line);
            if let Ok(GraphRecord { id: Some(id), .. }) = &rec {
                if !self.seen.insert(id.clone()) {
                    return Some(Err(CorpusError::DuplicateId {
                        line: self.line,
                        id: id.clone(),
                    }));
                }
            }
            return Some(rec);
        }
    }
}

pub fn read_graphs<R: BufRead>(reader: R) -> GraphReader<R> {
    GraphReader {
        lines: reader.lines(),
        line: 0,
        path: "<input>".into(),
        seen: HashSet::new(),
    }
}

/// Opens `path` for streaming.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<GraphReader<BufReader<File>>, CorpusError> {
    let p = path.as_ref();
    let f = File::open(p).map_err(|e| CorpusError::io(p, e))?;
    let mut r = read_graphs(BufReader::new(f));
    r.path = p.display().to_string();
    Ok(r)
}

/// Reads a whole file into memory.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<GraphRecord>, CorpusError> {
    load_jsonl(path)?.collect()
}

#[derive(Serialize)]
struct NodeOut<'a> {
    label: &'a str,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    u: usize,
    v: usize,
    label: &'a str,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    directed: bool,
    nodes: Vec<NodeOut<'a>>,
    edges: Vec<EdgeOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<&'a Value>,
}

/// One record as a single JSON line (no trailing newline).
pub fn graph_to_line(rec: &GraphRecord) -> String {
    let g = &rec.graph;
    let out = RecordOut {
        id: rec.id.as_deref(),
        directed: g.is_directed(),
        nodes: g
            .node_labels()
            .iter()
            .map(|l| NodeOut { label: l.as_str() })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeOut {
                u: e.u,
                v: e.v,
                label: e.label.as_str(),
            })
            .collect(),
        target: rec.target.as_ref(),
    };
    serde_json::to_string(&out).expect("graph records always serialize")
}

pub fn write_graphs<'a, W: Write>(
    mut w: W,
    records: impl IntoIterator<Item = &'a GraphRecord>,
) -> io::Result<()> {
    for r in records {
        w.write_all(graph_to_line(r).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_corpus(path: impl AsRef<Path>, records: &[GraphRecord]) -> Result<(), CorpusError> {
    let p = path.as_ref();
    let f = File::create(p).map_err(|e| CorpusError::io(p, e))?;
    write_graphs(io::BufWriter::new(f), records).map_err(|e| CorpusError::io(p, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn single_edge_line() {
        let r = parse_graph_line(
            r#"{"nodes":[{"label":"a"},{"label":"b"}],"edges":[{"u":0,"v":1,"label":"x"}]}"#,
            1,
        )
        .unwrap();
        assert_eq!(r.graph, build_graph(&["a", "b"], &[(0, 1, "x")], false).unwrap());
        assert_eq!(r.id, None);
    }

    #[test]
    fn empty_file_is_empty_stream() {
        assert_eq!(read_graphs(&b""[..]).count(), 0);
        assert_eq!(read_graphs(&b"\n\n"[..]).count(), 0);
    }

    #[test]
    fn bad_index_reports_line() {
        let text = "{\"nodes\":[{\"label\":\"a\"}]}\n{\"nodes\":[{\"label\":\"a\"},{\"label\":\"b\"}],\"edges\":[{\"u\":5,\"v\":1}]}\n";
        let out: Vec<_> = read_graphs(text.as_bytes()).collect();
        assert!(out[0].is_ok());
        match &out[1] {
            Err(CorpusError::ParseError { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn schema_errors_name_the_field() {
        match parse_graph_line(r#"{"nodes":[{"lbl":"a"}]}"#, 3) {
            Err(CorpusError::SchemaError { line: 3, field, .. }) => assert_eq!(field, "nodes[0].label"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_graph_line("{", 1), Err(CorpusError::ParseError { .. })));
        assert!(matches!(parse_graph_line("[]", 1), Err(CorpusError::SchemaError { .. })));
    }

    #[test]
    fn missing_edge_label_is_reserved_label() {
        let r = parse_graph_line(r#"{"nodes":[{"label":"a"},{"label":"a"}],"edges":[{"u":0,"v":1}]}"#, 1).unwrap();
        assert_eq!(r.graph.edges()[0].label.as_str(), EMPTY_EDGE_LABEL);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = "{\"id\":\"g\",\"nodes\":[]}\n{\"id\":\"g\",\"nodes\":[]}\n";
        let out: Vec<_> = read_graphs(text.as_bytes()).collect();
        assert!(matches!(out[1], Err(CorpusError::DuplicateId { line: 2, .. })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let recs = vec![
            GraphRecord {
                graph: build_graph(&["a", "b", "b"], &[(0, 1, "x"), (1, 1, "y"), (1, 2, "x")], true).unwrap(),
                id: Some("m1".into()),
                target: Some(serde_json::json!([1.5, 2])),
            },
            GraphRecord::new(LabeledGraph::empty(false)),
        ];
        let mut buf = Vec::new();
        write_graphs(&mut buf, &recs).unwrap();
        let back: Vec<GraphRecord> = read_graphs(&buf[..]).collect::<Result<_, _>>().unwrap();
        assert_eq!(back, recs);
        let mut again = Vec::new();
        write_graphs(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }
}
