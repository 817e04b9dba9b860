use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{connected_components, LabeledGraph};
use crate::symbol::{EdgeDir, Symbol};

use super::policy::{pick_start, PriorityPolicy, Ranks};
use super::{join_segments, Method, SerializationConfig, SerializedSequence, TraceStats};

/// Node-list baselines: BFS, DFS and topological orders emit one label per
/// node; random walks emit the labels along each walk. None is invertible.
pub fn node_list_serialize(
    g: &LabeledGraph,
    method: &Method,
    policy: &PriorityPolicy<'_>,
) -> SerializedSequence {
    let config = SerializationConfig::new(*method);
    serialize_nodes(g, &config, policy, &mut TraceStats::default())
}

pub(crate) fn serialize_nodes(
    g: &LabeledGraph,
    config: &SerializationConfig,
    policy: &PriorityPolicy<'_>,
    trace: &mut TraceStats,
) -> SerializedSequence {
    let comps = connected_components(g);
    let n_components = comps.len();
    let symbols = if let Method::RandomWalk { walks, length, seed } = config.method {
        random_walks(g, walks, length, seed)
    } else {
        let segments = comps
            .iter()
            .map(|c| {
                let cg = &c.graph;
                let order = match config.method {
                    Method::Bfs => traverse(cg, policy, trace, false),
                    Method::Dfs => traverse(cg, policy, trace, true),
                    _ => topo_order(cg, policy, trace),
                };
                order
                    .into_iter()
                    .map(|v| Symbol::Node(cg.node_label(v).clone()))
                    .collect()
            })
            .collect();
        join_segments(segments)
    };
    SerializedSequence {
        symbols,
        config: config.clone(),
        n_components,
    }
}

type StaticKey = (Reverse<u64>, u32, u32);

/// Best static key per unvisited neighbor of `u`, parallel edges collapsed.
fn neighbor_keys(
    g: &LabeledGraph,
    inc: &[Vec<(usize, usize)>],
    ranks: &Ranks,
    policy: &PriorityPolicy<'_>,
    visited: &[bool],
    u: usize,
) -> Vec<(StaticKey, usize)> {
    let mut out: Vec<(StaticKey, usize)> = Vec::new();
    for &(e, w) in &inc[u] {
        if w == u || visited[w] {
            continue;
        }
        let dir = if g.is_directed() && g.edges()[e].u != u {
            EdgeDir::Backward
        } else {
            EdgeDir::Forward
        };
        let key = (
            Reverse(ranks.priority(policy, u, e, w, dir)),
            ranks.edge[e],
            ranks.node[w],
        );
        out.push((key, w));
    }
    out.sort_unstable_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    out.dedup_by_key(|x| x.1);
    out
}

fn open_degree(inc: &[Vec<(usize, usize)>], visited: &[bool], w: usize) -> usize {
    inc[w].iter().filter(|&&(_, x)| !visited[x]).count()
}

/// Orders candidates by static key, then more unvisited neighbours, then id.
/// Counts a fallback when two candidates differ only by id.
fn rank_candidates(
    cands: Vec<(StaticKey, usize)>,
    inc: &[Vec<(usize, usize)>],
    visited: &[bool],
    trace: &mut TraceStats,
) -> Vec<usize> {
    let mut keyed: Vec<(StaticKey, Reverse<usize>, usize)> = cands
        .into_iter()
        .map(|(k, w)| (k, Reverse(open_degree(inc, visited, w)), w))
        .collect();
    keyed.sort_unstable();
    if keyed.windows(2).any(|p| p[0].0 == p[1].0 && p[0].1 == p[1].1) {
        trace.fallbacks += 1;
    }
    keyed.into_iter().map(|k| k.2).collect()
}

fn traverse(
    g: &LabeledGraph,
    policy: &PriorityPolicy<'_>,
    trace: &mut TraceStats,
    depth_first: bool,
) -> Vec<usize> {
    let n = g.node_count();
    let ranks = Ranks::new(g, policy);
    let degrees = g.degrees();
    let inc = g.incidence();
    let Some(start) = pick_start(&ranks, &degrees, 0..n, true, trace) else {
        return Vec::new();
    };
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    visited[start] = true;
    order.push(start);
    if depth_first {
        let mut stack = vec![start];
        while let Some(&u) = stack.last() {
            let cands = neighbor_keys(g, &inc, &ranks, policy, &visited, u);
            match rank_candidates(cands, &inc, &visited, trace).first() {
                Some(&w) => {
                    visited[w] = true;
                    order.push(w);
                    stack.push(w);
                }
                None => {
                    stack.pop();
                }
            }
        }
    } else {
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cands = neighbor_keys(g, &inc, &ranks, policy, &visited, u);
            for w in rank_candidates(cands, &inc, &visited, trace) {
                visited[w] = true;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    order
}

fn is_acyclic(g: &LabeledGraph) -> bool {
    let n = g.node_count();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        indeg[e.v] += 1;
        out[e.u].push(e.v);
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = ready.pop() {
        seen += 1;
        for &w in &out[u] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    seen == n
}

/// Kahn's algorithm with ready nodes taken by `(label, degree, id)`. Graphs
/// that are not directed acyclic are first oriented along BFS layers from the
/// canonical start, ties inside a layer broken by the same key.
fn topo_order(g: &LabeledGraph, policy: &PriorityPolicy<'_>, trace: &mut TraceStats) -> Vec<usize> {
    let n = g.node_count();
    let ranks = Ranks::new(g, policy);
    let degrees = g.degrees();
    let key = |v: usize| (ranks.node[v], degrees[v], v);

    let arcs: Vec<(usize, usize)> = if g.is_directed() && is_acyclic(g) {
        g.edges().iter().map(|e| (e.u, e.v)).collect()
    } else {
        let inc = g.incidence();
        let Some(start) = pick_start(&ranks, &degrees, 0..n, true, trace) else {
            return Vec::new();
        };
        let mut layer = vec![usize::MAX; n];
        layer[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(_, w) in &inc[u] {
                if layer[w] == usize::MAX {
                    layer[w] = layer[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        g.edges()
            .iter()
            .filter(|e| e.u != e.v)
            .map(|e| {
                if (layer[e.u], key(e.u)) < (layer[e.v], key(e.v)) {
                    (e.u, e.v)
                } else {
                    (e.v, e.u)
                }
            })
            .collect()
    };

    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &arcs {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut ready: BinaryHeap<Reverse<(u32, usize, usize)>> =
        (0..n).filter(|&v| indeg[v] == 0).map(|v| Reverse(key(v))).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(k)) = ready.pop() {
        if let Some(Reverse(next)) = ready.peek() {
            if (next.0, next.1) == (k.0, k.1) {
                trace.fallbacks += 1;
            }
        }
        let u = k.2;
        order.push(u);
        for &w in &out[u] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(Reverse(key(w)));
            }
        }
    }
    order
}

fn random_walks(g: &LabeledGraph, walks: u32, length: u32, seed: u64) -> Vec<Symbol> {
    let n = g.node_count();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let inc = g.incidence();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..walks {
        if r > 0 {
            out.push(Symbol::Separator);
        }
        let mut v = rng.gen_range(0..n);
        out.push(Symbol::Node(g.node_label(v).clone()));
        for _ in 1..length {
            if inc[v].is_empty() {
                break;
            }
            v = inc[v][rng.gen_range(0..inc[v].len())].1;
            out.push(Symbol::Node(g.node_label(v).clone()));
        }
    }
    out
}
