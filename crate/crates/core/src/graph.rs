//! Labeled multigraphs, connected components and WL-1 structural hashing.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hash::{fnv1a, mix};

/// Reserved edge label used when a corpus carries no edge labels.
pub const EMPTY_EDGE_LABEL: &str = "∅";

/// An opaque, cheaply clonable node or edge label.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub(crate) fn stable_hash(&self) -> u64 {
        fnv1a(self.0.as_bytes())
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::new(s)
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(Arc::from(s))
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Label::from(String::deserialize(d)?))
    }
}

/// Deduplicates label allocations across many graphs.
#[derive(Debug, Default)]
pub struct LabelInterner {
    labels: std::collections::HashSet<Label>,
}

impl LabelInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, s: &str) -> Label {
        if let Some(l) = self.labels.get(s) {
            return l.clone();
        }
        let l = Label::new(s);
        self.labels.insert(l.clone());
        l
    }
}

impl std::borrow::Borrow<str> for Label {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: Label,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge} endpoint {endpoint} out of range for {nodes} nodes")]
    OutOfRangeEndpoint {
        edge: usize,
        endpoint: usize,
        nodes: usize,
    },
    #[error("empty label")]
    EmptyLabel,
}

/// A finite labeled multigraph. Self-loops and parallel edges are allowed.
///
/// Immutable once built; node ids are `0..node_count()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    node_labels: Vec<Label>,
    edges: Vec<Edge>,
    directed: bool,
}

/// Builds a graph from plain strings, validating endpoints and labels.
pub fn build_graph<N, E>(
    node_labels: &[N],
    edges: &[(usize, usize, E)],
    directed: bool,
) -> Result<LabeledGraph, GraphError>
where
    N: AsRef<str>,
    E: AsRef<str>,
{
    let nodes = node_labels
        .iter()
        .map(|l| Label::new(l.as_ref()))
        .collect::<Vec<_>>();
    let edges = edges
        .iter()
        .map(|(u, v, l)| Edge {
            u: *u,
            v: *v,
            label: Label::new(l.as_ref()),
        })
        .collect();
    LabeledGraph::from_parts(nodes, edges, directed)
}

impl LabeledGraph {
    pub fn from_parts(
        node_labels: Vec<Label>,
        edges: Vec<Edge>,
        directed: bool,
    ) -> Result<Self, GraphError> {
        if node_labels.iter().any(|l| l.as_str().is_empty()) {
            return Err(GraphError::EmptyLabel);
        }
        let n = node_labels.len();
        for (i, e) in edges.iter().enumerate() {
            if e.label.as_str().is_empty() {
                return Err(GraphError::EmptyLabel);
            }
            for endpoint in [e.u, e.v] {
                if endpoint >= n {
                    return Err(GraphError::OutOfRangeEndpoint {
                        edge: i,
                        endpoint,
                        nodes: n,
                    });
                }
            }
        }
        Ok(LabeledGraph {
            node_labels,
            edges,
            directed,
        })
    }

    pub fn empty(directed: bool) -> Self {
        LabeledGraph {
            node_labels: Vec::new(),
            edges: Vec::new(),
            directed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn node_label(&self, v: usize) -> &Label {
        &self.node_labels[v]
    }

    pub fn node_labels(&self) -> &[Label] {
        &self.node_labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Total degree ignoring direction; a self-loop contributes two.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    /// Incident `(edge index, other endpoint)` pairs per node, in edge order.
    /// Direction is ignored; a self-loop appears twice at its node.
    pub fn incidence(&self) -> Vec<Vec<(usize, usize)>> {
        let mut inc = vec![Vec::new(); self.node_count()];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.u].push((i, e.v));
            inc[e.v].push((i, e.u));
        }
        inc
    }

    /// Relabels node `i` as `perm[i]`. Edge order is preserved.
    pub fn permute_nodes(&self, perm: &[usize]) -> LabeledGraph {
        assert_eq!(perm.len(), self.node_count(), "permutation length");
        let mut labels = vec![None; self.node_count()];
        for (i, &p) in perm.iter().enumerate() {
            labels[p] = Some(self.node_labels[i].clone());
        }
        LabeledGraph {
            node_labels: labels
                .into_iter()
                .map(|l| l.expect("perm is a bijection"))
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    u: perm[e.u],
                    v: perm[e.v],
                    label: e.label.clone(),
                })
                .collect(),
            directed: self.directed,
        }
    }

    /// Same graph with its edge list reordered by `order` (a permutation of edge indices).
    pub fn reorder_edges(&self, order: &[usize]) -> LabeledGraph {
        LabeledGraph {
            node_labels: self.node_labels.clone(),
            edges: order.iter().map(|&i| self.edges[i].clone()).collect(),
            directed: self.directed,
        }
    }

    /// Disjoint union, `other`'s nodes shifted after `self`'s.
    pub fn disjoint_union(&self, other: &LabeledGraph) -> LabeledGraph {
        let off = self.node_count();
        let mut node_labels = self.node_labels.clone();
        node_labels.extend(other.node_labels.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            u: e.u + off,
            v: e.v + off,
            label: e.label.clone(),
        }));
        LabeledGraph {
            node_labels,
            edges,
            directed: self.directed || other.directed,
        }
    }
}

/// A connected component together with the map from its local node ids to
/// the original ids.
#[derive(Debug, Clone)]
pub struct Component {
    pub graph: LabeledGraph,
    pub nodes: Vec<usize>,
}

/// Splits `g` into weakly connected components. Components are ordered by
/// their smallest original node id; local ids preserve the original order.
pub fn connected_components(g: &LabeledGraph) -> Vec<Component> {
    let n = g.node_count();
    let inc = g.incidence();
    let mut comp_of = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if comp_of[s] != usize::MAX {
            continue;
        }
        let c = members.len();
        comp_of[s] = c;
        let mut nodes = vec![s];
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(_, w) in &inc[u] {
                if comp_of[w] == usize::MAX {
                    comp_of[w] = c;
                    nodes.push(w);
                    queue.push_back(w);
                }
            }
        }
        nodes.sort_unstable();
        members.push(nodes);
    }
    if members.len() == 1 {
        return vec![Component {
            graph: g.clone(),
            nodes: members.pop().unwrap_or_default(),
        }];
    }

    let mut local = vec![0usize; n];
    for nodes in &members {
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
    }
    let mut edges: Vec<Vec<Edge>> = vec![Vec::new(); members.len()];
    for e in &g.edges {
        edges[comp_of[e.u]].push(Edge {
            u: local[e.u],
            v: local[e.v],
            label: e.label.clone(),
        });
    }
    members
        .into_iter()
        .zip(edges)
        .map(|(nodes, edges)| Component {
            graph: LabeledGraph {
                node_labels: nodes.iter().map(|&v| g.node_labels[v].clone()).collect(),
                edges,
                directed: g.directed,
            },
            nodes,
        })
        .collect()
}

/// Digest returned for the empty graph.
pub const EMPTY_GRAPH_DIGEST: u64 = 0x6772_6170_6874_6f6b;

/// Weisfeiler-Lehman (1-WL) refinement hash, invariant under node permutation.
///
/// Node colors start from the label hash and are refined `rounds` times from
/// the sorted multiset of `(edge label, direction, neighbor color)`. The
/// digest is taken over the sorted final colors plus node and edge counts.
pub fn wl1_hash(g: &LabeledGraph, rounds: usize) -> u64 {
    if g.node_count() == 0 {
        return EMPTY_GRAPH_DIGEST;
    }
    let colors = wl_colors(g, rounds.max(1));
    let mut sorted = colors;
    sorted.sort_unstable();
    let mut h = mix(g.node_count() as u64, g.edge_count() as u64);
    h = mix(h, g.directed as u64);
    for c in sorted {
        h = mix(h, c);
    }
    h
}

/// Per-node refined colors; comparable across graphs.
pub(crate) fn wl_colors(g: &LabeledGraph, rounds: usize) -> Vec<u64> {
    let n = g.node_count();
    let mut adj: Vec<Vec<(u64, usize)>> = vec![Vec::new(); n];
    for e in &g.edges {
        let lh = e.label.stable_hash();
        if g.directed {
            adj[e.u].push((mix(lh, 1), e.v));
            adj[e.v].push((mix(lh, 2), e.u));
        } else {
            adj[e.u].push((lh, e.v));
            adj[e.v].push((lh, e.u));
        }
    }
    let mut colors: Vec<u64> = g.node_labels.iter().map(|l| l.stable_hash()).collect();
    let mut scratch = Vec::new();
    for _ in 0..rounds {
        let next: Vec<u64> = (0..n)
            .map(|v| {
                scratch.clear();
                scratch.extend(adj[v].iter().map(|&(lh, w)| mix(lh, colors[w])));
                scratch.sort_unstable();
                scratch.iter().fold(mix(colors[v], 0x9e37), |h, &x| mix(h, x))
            })
            .collect();
        colors = next;
    }
    colors
}
