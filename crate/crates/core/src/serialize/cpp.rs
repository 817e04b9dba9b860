use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::convert::Infallible;

use petgraph::graph::UnGraph;
use rustworkx_core::max_weight_matching::max_weight_matching;

use crate::graph::LabeledGraph;
use crate::hash::{fnv1a, mix};
use crate::stats::{FrequencyMap, Guidance};

use super::euler::{hierholzer, twinned_arcs};
use super::policy::{pick_start, PriorityPolicy, Ranks};
use super::{GKind, TraceStats, Walk};

/// Fixed-point scale used to make shortest-path sums exact.
const WEIGHT_SCALE: f64 = 65536.0;
const M_DIST: i128 = 1 << 60;
const M_RANK: i128 = 1 << 24;

/// Edge weights `alpha + (1 - alpha) * g(F)` where `F` is the relative
/// frequency of the edge's pattern, floored at `1 / (total + 1)`.
pub fn fcpp_weights(g: &LabeledGraph, freq: &FrequencyMap, alpha: f64, g_kind: GKind) -> Vec<f64> {
    fcpp_weights_with(g, &Guidance::new(freq), alpha, g_kind)
}

pub(crate) fn fcpp_weights_with(g: &LabeledGraph, gd: &Guidance, alpha: f64, g_kind: GKind) -> Vec<f64> {
    let eps = 1.0 / (gd.total() as f64 + 1.0);
    g.edges()
        .iter()
        .map(|e| {
            let f = gd
                .frequency(
                    gd.label_id(g.node_label(e.u)),
                    gd.label_id(&e.label),
                    gd.label_id(g.node_label(e.v)),
                )
                .max(eps);
            let cost = match g_kind {
                GKind::Reciprocal => 1.0 / f,
                GKind::NegLog => 1.0 - f.ln(),
            };
            alpha + (1.0 - alpha) * cost
        })
        .collect()
}

fn quantize(w: f64) -> i64 {
    let q = (w * WEIGHT_SCALE).round();
    if q.is_finite() {
        (q as i64).max(1)
    } else {
        i64::MAX / (1 << 20)
    }
}

struct Tree {
    dist: Vec<i64>,
    pred_edge: Vec<u32>,
    pred_node: Vec<u32>,
    /// Whether some predecessor choice on the path was a tie between
    /// distinct nodes that labels could not break.
    tied: Vec<bool>,
}

fn dijkstra(
    g: &LabeledGraph,
    inc: &[Vec<(usize, usize)>],
    qw: &[i64],
    ranks: &Ranks,
    guided: bool,
    src: usize,
) -> Tree {
    let n = g.node_count();
    let mut dist = vec![i64::MAX; n];
    let mut pred_edge = vec![u32::MAX; n];
    let mut pred_node = vec![u32::MAX; n];
    let mut local_tie = vec![false; n];
    let mut tied = vec![false; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0;
    heap.push(Reverse((0i64, src)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u != src {
            tied[u] = local_tie[u] || tied[pred_node[u] as usize];
        }
        for &(e, w) in &inc[u] {
            if w == u || done[w] {
                continue;
            }
            let nd = d.saturating_add(qw[e]);
            if nd < dist[w] {
                dist[w] = nd;
                pred_edge[w] = e as u32;
                pred_node[w] = u as u32;
                local_tie[w] = false;
                heap.push(Reverse((nd, w)));
            } else if nd == dist[w] && guided {
                let cur = (ranks.node[pred_node[w] as usize], ranks.edge[pred_edge[w] as usize]);
                let new = (ranks.node[u], ranks.edge[e]);
                if new < cur {
                    pred_edge[w] = e as u32;
                    pred_node[w] = u as u32;
                    local_tie[w] = false;
                } else if new == cur && pred_node[w] as usize != u {
                    local_tie[w] = true;
                }
            }
        }
    }
    Tree {
        dist,
        pred_edge,
        pred_node,
        tied,
    }
}

/// Closed walk of minimum total weight covering every edge at least once
/// (undirected Chinese postman). Odd-degree nodes are paired by a
/// maximum-weight perfect matching on shortest-path costs; the paths of the
/// chosen pairs are duplicated and marked as repeats in the walk.
///
/// Edge direction, if any, is kept as a traversal mark but not enforced.
pub fn cpp_tour(g: &LabeledGraph, weights: &[f64], policy: &PriorityPolicy<'_>) -> Walk {
    cpp_tour_traced(g, weights, policy, &mut TraceStats::default())
}

pub(crate) fn cpp_tour_traced(
    g: &LabeledGraph,
    weights: &[f64],
    policy: &PriorityPolicy<'_>,
    trace: &mut TraceStats,
) -> Walk {
    assert_eq!(weights.len(), g.edge_count(), "one weight per edge");
    let ranks = Ranks::new(g, policy);
    let degrees = g.degrees();
    let guided = policy.is_guided();
    let odd: Vec<usize> = (0..g.node_count()).filter(|&v| degrees[v] % 2 == 1).collect();

    let mut copies = vec![0u32; g.edge_count()];
    if !odd.is_empty() {
        let qw: Vec<i64> = weights.iter().map(|&w| quantize(w)).collect();
        let inc = g.incidence();
        let t = odd.len();

        if guided && t >= 4 {
            let mut labels: Vec<u32> = odd.iter().map(|&v| ranks.node[v]).collect();
            labels.sort_unstable();
            if labels.windows(2).any(|w| w[0] == w[1]) {
                trace.fallbacks += 1;
            }
        }

        let mut pair_dist = vec![vec![0i64; t]; t];
        for (i, &s) in odd.iter().enumerate() {
            let tree = dijkstra(g, &inc, &qw, &ranks, guided, s);
            for (j, &v) in odd.iter().enumerate() {
                pair_dist[i][j] = tree.dist[v];
            }
        }

        let mut pair_keys: Vec<(u32, u32)> = Vec::new();
        if guided {
            for i in 0..t {
                for j in i + 1..t {
                    let (a, b) = (ranks.node[odd[i]], ranks.node[odd[j]]);
                    pair_keys.push((a.min(b), a.max(b)));
                }
            }
            pair_keys.sort_unstable();
            pair_keys.dedup();
        }

        let mut costs: Vec<(usize, usize, i128)> = Vec::with_capacity(t * (t - 1) / 2);
        for i in 0..t {
            for j in i + 1..t {
                let d = pair_dist[i][j] as i128;
                let cost = if guided {
                    let la = g.node_label(odd[i]);
                    let lb = g.node_label(odd[j]);
                    let (la, lb) = if la <= lb { (la, lb) } else { (lb, la) };
                    let (a, b) = (ranks.node[odd[i]], ranks.node[odd[j]]);
                    let rank = pair_keys
                        .binary_search(&(a.min(b), a.max(b)))
                        .unwrap_or(0) as i128;
                    let h = mix(fnv1a(la.as_str().as_bytes()), fnv1a(lb.as_str().as_bytes()))
                        & 0xff_ffff;
                    d * M_DIST + rank * M_RANK + h as i128
                } else {
                    d
                };
                costs.push((i, j, cost));
            }
        }
        let ceiling = costs.iter().map(|c| c.2).max().unwrap_or(0) + 1;
        let mut mg: UnGraph<(), i128> = UnGraph::with_capacity(t, costs.len());
        for _ in 0..t {
            mg.add_node(());
        }
        for &(i, j, c) in &costs {
            mg.add_edge((i as u32).into(), (j as u32).into(), ceiling - c);
        }
        let matching = max_weight_matching(&mg, true, |e| Ok::<i128, Infallible>(*e.weight()), false)
            .unwrap_or_else(|e| match e {});
        let mut pairs: Vec<(usize, usize)> = matching
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        debug_assert_eq!(pairs.len() * 2, t, "odd nodes must be perfectly matched");

        for (i, j) in pairs {
            let (a, b) = (odd[i], odd[j]);
            let (root, other) = if guided && ranks.node[b] < ranks.node[a] {
                (b, a)
            } else {
                (a, b)
            };
            let tree = dijkstra(g, &inc, &qw, &ranks, guided, root);
            if guided && tree.tied[other] {
                trace.fallbacks += 1;
            }
            let mut v = other;
            while v != root {
                let e = tree.pred_edge[v];
                if e == u32::MAX {
                    break;
                }
                copies[e as usize] += 1;
                v = tree.pred_node[v] as usize;
            }
        }
        // Two extra copies of one edge never help; drop them in pairs.
        for c in copies.iter_mut() {
            *c %= 2;
        }
    }

    let Some(start) = pick_start(
        &ranks,
        &degrees,
        (0..g.node_count()).filter(|&v| degrees[v] > 0),
        policy.is_guided(),
        trace,
    ) else {
        return Walk { start: 0, steps: Vec::new() };
    };
    let arcs = twinned_arcs(g, &copies);
    hierholzer(g, &arcs, start, &ranks, policy, trace)
}
