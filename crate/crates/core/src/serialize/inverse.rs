use std::collections::HashMap;

use crate::graph::{Edge, Label, LabeledGraph};
use crate::symbol::{EdgeDir, Symbol};

use super::{split_segments, SerializeError, SerializedSequence};

fn malformed(msg: impl Into<String>) -> SerializeError {
    SerializeError::MalformedSequence(msg.into())
}

struct Step {
    from: usize,
    to: usize,
    label: Label,
    dir: EdgeDir,
    repeat: bool,
}

/// Rebuilds a graph isomorphic to the serialized one.
///
/// Node ids follow discovery order and edges follow first appearance, so the
/// result equals the input only up to isomorphism. Rejects node-list and
/// label-only sequences, and never panics on malformed input.
pub fn deserialize(seq: &SerializedSequence) -> Result<LabeledGraph, SerializeError> {
    if !seq.config.is_reversible() {
        return Err(SerializeError::NotReversibleMethod(
            seq.config.method.to_string(),
        ));
    }
    let postman = seq.config.method.is_postman();

    let mut labels: Vec<Label> = Vec::new();
    let mut steps: Vec<Step> = Vec::new();
    for (si, seg) in split_segments(&seq.symbols).enumerate() {
        if seg.is_empty() {
            return Err(malformed(format!("component {si} is empty")));
        }
        if seg.len() % 2 == 0 {
            return Err(malformed(format!("component {si} does not end on a node")));
        }
        let base = labels.len();
        let mut first = 0usize;
        let mut prev = 0usize;
        for (i, s) in seg.iter().enumerate() {
            if i % 2 == 0 {
                let v = match s {
                    Symbol::Node(l) => {
                        labels.push(l.clone());
                        labels.len() - 1
                    }
                    Symbol::BackRef(k) => {
                        let v = base.checked_add(*k as usize).filter(|&v| v < labels.len());
                        v.ok_or_else(|| malformed(format!("back-reference {k} before discovery")))?
                    }
                    other => return Err(malformed(format!("expected a node at {i}, found {other}"))),
                };
                if i == 0 {
                    first = v;
                } else if let Some(last) = steps.last_mut() {
                    last.to = v;
                }
                prev = v;
            } else {
                let Symbol::Edge { label, dir, repeat } = s else {
                    return Err(malformed(format!("expected an edge at {i}, found {s}")));
                };
                steps.push(Step {
                    from: prev,
                    to: usize::MAX,
                    label: label.clone(),
                    dir: *dir,
                    repeat: *repeat,
                });
            }
        }
        if seg.len() > 1 && prev != first {
            return Err(malformed(format!("component {si} walk is not closed")));
        }
    }

    let directed = match steps.first().map(|s| s.dir) {
        None => false,
        Some(d) => {
            let directed = d != EdgeDir::Undirected;
            if steps.iter().any(|s| (s.dir != EdgeDir::Undirected) != directed) {
                return Err(malformed("mixed directed and undirected edges"));
            }
            directed
        }
    };
    // Stored orientation (tail, head) of the edge a step traverses.
    let stored = |s: &Step| -> (usize, usize) {
        match s.dir {
            EdgeDir::Backward => (s.to, s.from),
            EdgeDir::Forward => (s.from, s.to),
            EdgeDir::Undirected => (s.from.min(s.to), s.from.max(s.to)),
        }
    };

    let mut edges: Vec<Edge> = Vec::new();
    if postman {
        let mut originals: HashMap<(usize, usize, &Label), usize> = HashMap::new();
        for s in steps.iter().filter(|s| !s.repeat) {
            let (u, v) = stored(s);
            *originals.entry((u, v, &s.label)).or_insert(0) += 1;
            let (u, v) = if directed { (u, v) } else { (s.from, s.to) };
            edges.push(Edge {
                u,
                v,
                label: s.label.clone(),
            });
        }
        for s in steps.iter().filter(|s| s.repeat) {
            let (u, v) = stored(s);
            if !originals.contains_key(&(u, v, &s.label)) {
                return Err(malformed("repeated traversal of an edge that was never walked"));
            }
        }
    } else {
        // Each edge appears exactly twice: both directions, or two loop arcs.
        let mut order: Vec<(usize, usize, &Label)> = Vec::new();
        let mut counts: HashMap<(usize, usize, &Label), (u32, u32)> = HashMap::new();
        for s in &steps {
            if s.repeat {
                return Err(malformed("repeat mark in a doubled-edge walk"));
            }
            let (u, v) = stored(s);
            let c = counts.entry((u, v, &s.label)).or_insert_with(|| {
                order.push((u, v, &s.label));
                (0, 0)
            });
            if s.dir == EdgeDir::Backward {
                c.1 += 1;
            } else {
                c.0 += 1;
            }
        }
        for key in order {
            let (fwd, bwd) = counts[&key];
            let n = if directed {
                if fwd != bwd {
                    return Err(malformed("directed edge not walked equally both ways"));
                }
                fwd
            } else {
                if fwd % 2 != 0 {
                    return Err(malformed("undirected edge walked an odd number of times"));
                }
                fwd / 2
            };
            for _ in 0..n {
                edges.push(Edge {
                    u: key.0,
                    v: key.1,
                    label: key.2.clone(),
                });
            }
        }
    }
    LabeledGraph::from_parts(labels, edges, directed).map_err(|e| malformed(e.to_string()))
}
