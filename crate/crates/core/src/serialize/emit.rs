use std::cmp::Ordering;

use crate::graph::{Label, LabeledGraph};
use crate::symbol::Symbol;

use super::{join_segments, split_segments, Emission, SerializedSequence, Walk};

pub(crate) fn emit_walk(
    g: &LabeledGraph,
    walk: &Walk,
    emission: Emission,
    normalize: bool,
) -> Vec<Symbol> {
    let edges: Vec<Symbol> = walk
        .steps
        .iter()
        .map(|s| Symbol::Edge {
            label: g.edges()[s.edge].label.clone(),
            dir: s.dir,
            repeat: s.repeat,
        })
        .collect();
    let mut nodes: Vec<u32> = walk.nodes().map(|v| v as u32).collect();
    if walk.is_closed() && !walk.steps.is_empty() {
        nodes.pop();
        emit_closed(&nodes, g.node_labels(), &edges, emission, normalize)
    } else {
        emit_positions(&nodes, g.node_labels(), &edges, emission, g.node_count())
    }
}

/// Emits `n0 e0 n1 e1 ... n_k` with first visits as labels and revisits as
/// back-references (or labels everywhere in label-only mode).
fn emit_positions(
    nodes: &[u32],
    labels: &[Label],
    edges: &[Symbol],
    emission: Emission,
    n: usize,
) -> Vec<Symbol> {
    debug_assert_eq!(nodes.len(), edges.len() + 1);
    let mut ordinal = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut out = Vec::with_capacity(nodes.len() + edges.len());
    for (t, &v) in nodes.iter().enumerate() {
        let v = v as usize;
        if emission == Emission::LabelOnly || ordinal[v] == u32::MAX {
            ordinal[v] = next;
            next += 1;
            out.push(Symbol::Node(labels[v].clone()));
        } else {
            out.push(Symbol::BackRef(ordinal[v]));
        }
        if t < edges.len() {
            out.push(edges[t].clone());
        }
    }
    out
}

/// Emits the closed walk with `nodes.len() == edges.len()` positions, choosing
/// the rotation with the lexicographically smallest output when `normalize`.
fn emit_closed(
    nodes: &[u32],
    labels: &[Label],
    edges: &[Symbol],
    emission: Emission,
    normalize: bool,
) -> Vec<Symbol> {
    let k = nodes.len();
    let r = if normalize {
        best_rotation(nodes, labels, edges, emission)
    } else {
        0
    };
    let rot_nodes: Vec<u32> = (0..=k).map(|t| nodes[(r + t) % k]).collect();
    let rot_edges: Vec<Symbol> = (0..k).map(|t| edges[(r + t) % k].clone()).collect();
    emit_positions(&rot_nodes, labels, &rot_edges, emission, labels.len())
}

fn dense_rank<T: Ord + Clone>(items: &[T]) -> Vec<u32> {
    let mut uniq = items.to_vec();
    uniq.sort();
    uniq.dedup();
    items
        .iter()
        .map(|x| uniq.binary_search(x).unwrap_or(0) as u32)
        .collect()
}

/// Per-rotation view used to compare two candidate starts lazily.
struct Cursor {
    ordinal: Vec<u32>,
    stamp: Vec<u32>,
    next: u32,
}

impl Cursor {
    fn new(n: usize) -> Self {
        Cursor {
            ordinal: vec![0; n],
            stamp: vec![0; n],
            next: 0,
        }
    }

    /// Sort key of the symbol emitted for node `v`: `(0, label rank)` for a
    /// first visit, `(1, ordinal)` for a revisit.
    fn key(&mut self, v: usize, rank: u32, epoch: u32, label_only: bool) -> (u8, u32) {
        if label_only {
            return (0, rank);
        }
        if self.stamp[v] == epoch {
            (1, self.ordinal[v])
        } else {
            self.stamp[v] = epoch;
            self.ordinal[v] = self.next;
            self.next += 1;
            (0, rank)
        }
    }
}

fn best_rotation(nodes: &[u32], labels: &[Label], edges: &[Symbol], emission: Emission) -> usize {
    let k = nodes.len();
    let n = labels.len();
    let label_rank = dense_rank(labels);
    let edge_rank = dense_rank(edges);
    let label_only = emission == Emission::LabelOnly;

    let min_rank = nodes.iter().map(|&v| label_rank[v as usize]).min().unwrap_or(0);
    let mut candidates = (0..k).filter(|&p| label_rank[nodes[p] as usize] == min_rank);
    let Some(mut best) = candidates.next() else {
        return 0;
    };
    let mut a = Cursor::new(n);
    let mut b = Cursor::new(n);
    let mut epoch = 0u32;
    for cand in candidates {
        epoch += 1;
        a.next = 0;
        b.next = 0;
        let mut ord = Ordering::Equal;
        for t in 0..k {
            let (pa, pb) = ((cand + t) % k, (best + t) % k);
            let (va, vb) = (nodes[pa] as usize, nodes[pb] as usize);
            let ka = a.key(va, label_rank[va], epoch, label_only);
            let kb = b.key(vb, label_rank[vb], epoch, label_only);
            ord = ka.cmp(&kb).then(edge_rank[pa].cmp(&edge_rank[pb]));
            if ord != Ordering::Equal {
                break;
            }
        }
        if ord == Ordering::Less {
            best = cand;
        }
    }
    best
}

/// Rotates every closed component walk of a back-reference sequence to its
/// canonical start and re-sorts the components. Other sequences are returned
/// unchanged.
pub fn normalize_rotation(seq: &SerializedSequence) -> SerializedSequence {
    if !seq.config.is_reversible() {
        return seq.clone();
    }
    let mut segments = Vec::new();
    for seg in split_segments(&seq.symbols) {
        match rotate_segment(seg) {
            Some(s) => segments.push(s),
            None => return seq.clone(),
        }
    }
    SerializedSequence {
        symbols: join_segments(segments),
        config: seq.config.clone(),
        n_components: seq.n_components,
    }
}

fn rotate_segment(seg: &[Symbol]) -> Option<Vec<Symbol>> {
    if seg.len().is_multiple_of(2) {
        return None;
    }
    let mut labels: Vec<Label> = Vec::new();
    let mut nodes: Vec<u32> = Vec::with_capacity(seg.len() / 2 + 1);
    let mut edges: Vec<Symbol> = Vec::with_capacity(seg.len() / 2);
    for (i, s) in seg.iter().enumerate() {
        match (i % 2, s) {
            (0, Symbol::Node(l)) => {
                nodes.push(labels.len() as u32);
                labels.push(l.clone());
            }
            (0, Symbol::BackRef(k)) if (*k as usize) < labels.len() => nodes.push(*k),
            (1, Symbol::Edge { .. }) => edges.push(s.clone()),
            _ => return None,
        }
    }
    if edges.is_empty() || nodes.last() != nodes.first() {
        return Some(seg.to_vec());
    }
    nodes.pop();
    Some(emit_closed(&nodes, &labels, &edges, Emission::BackRef, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::serialize::{Method, SerializationConfig};

    fn seq(symbols: Vec<Symbol>) -> SerializedSequence {
        SerializedSequence {
            symbols,
            config: SerializationConfig::new(Method::FEuler),
            n_components: 1,
        }
    }

    #[test]
    fn rotation_starts_at_smallest_label() {
        let s = seq(vec![
            Symbol::node("b"),
            Symbol::edge("x"),
            Symbol::node("a"),
            Symbol::edge("x"),
            Symbol::BackRef(0),
        ]);
        let r = normalize_rotation(&s);
        assert_eq!(
            r.symbols,
            vec![
                Symbol::node("a"),
                Symbol::edge("x"),
                Symbol::node("b"),
                Symbol::edge("x"),
                Symbol::BackRef(0),
            ]
        );
    }

    #[test]
    fn normalization_is_idempotent_on_cycles() {
        // a-b-c triangle walked from c.
        let s = seq(vec![
            Symbol::node("c"),
            Symbol::edge("x"),
            Symbol::node("a"),
            Symbol::edge("y"),
            Symbol::node("b"),
            Symbol::edge("x"),
            Symbol::BackRef(0),
        ]);
        let once = normalize_rotation(&s);
        assert_eq!(once.symbols[0], Symbol::node("a"));
        assert_eq!(normalize_rotation(&once), once);
    }

    #[test]
    fn open_or_broken_segments_are_left_alone() {
        let open = seq(vec![Symbol::node("b"), Symbol::edge("x"), Symbol::node("a")]);
        assert_eq!(normalize_rotation(&open), open);
        let broken = seq(vec![Symbol::node("b"), Symbol::BackRef(7)]);
        assert_eq!(normalize_rotation(&broken), broken);
    }
}
