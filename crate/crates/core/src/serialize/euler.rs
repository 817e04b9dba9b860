use std::cmp::Reverse;

use crate::graph::LabeledGraph;
use crate::symbol::EdgeDir;

use super::policy::{pick_start, PriorityPolicy, Ranks};
use super::{TraceStats, Walk, WalkStep};

pub(crate) const NO_ARC: u32 = u32::MAX;

/// A directed traversal slot. `twin` links the two orientations of one
/// undirected edge copy so that walking either consumes both.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    pub from: u32,
    pub to: u32,
    pub edge: u32,
    pub dir: EdgeDir,
    pub repeat: bool,
    pub twin: u32,
}

fn orientations(g: &LabeledGraph) -> (EdgeDir, EdgeDir) {
    if g.is_directed() {
        (EdgeDir::Forward, EdgeDir::Backward)
    } else {
        (EdgeDir::Undirected, EdgeDir::Undirected)
    }
}

/// Every edge becomes two independent arcs, one per direction, so the arc
/// multigraph is balanced at every node.
pub(crate) fn doubled_arcs(g: &LabeledGraph) -> Vec<Arc> {
    let (fwd, bwd) = orientations(g);
    let mut arcs = Vec::with_capacity(2 * g.edge_count());
    for (i, e) in g.edges().iter().enumerate() {
        let (u, v, edge) = (e.u as u32, e.v as u32, i as u32);
        arcs.push(Arc { from: u, to: v, edge, dir: fwd, repeat: false, twin: NO_ARC });
        arcs.push(Arc { from: v, to: u, edge, dir: bwd, repeat: false, twin: NO_ARC });
    }
    arcs
}

/// Arcs for an undirected traversal where each (possibly repeated) edge copy
/// is walked once in either direction. Self-loops get a single arc.
pub(crate) fn twinned_arcs(g: &LabeledGraph, copies: &[u32]) -> Vec<Arc> {
    let (fwd, bwd) = orientations(g);
    let mut arcs = Vec::with_capacity(2 * g.edge_count());
    let push = |arcs: &mut Vec<Arc>, i: usize, repeat: bool| {
        let e = &g.edges()[i];
        let (u, v, edge) = (e.u as u32, e.v as u32, i as u32);
        if u == v {
            arcs.push(Arc { from: u, to: u, edge, dir: fwd, repeat, twin: NO_ARC });
            return;
        }
        let a = arcs.len() as u32;
        arcs.push(Arc { from: u, to: v, edge, dir: fwd, repeat, twin: a + 1 });
        arcs.push(Arc { from: v, to: u, edge, dir: bwd, repeat, twin: a });
    };
    for i in 0..g.edge_count() {
        push(&mut arcs, i, false);
    }
    for (i, &c) in copies.iter().enumerate() {
        for _ in 0..c {
            push(&mut arcs, i, true);
        }
    }
    arcs
}

/// Hierholzer's algorithm over `arcs`, with the departure order set by the
/// policy. Every arc (twin pair) is used exactly once; the caller guarantees
/// the arc multigraph is connected and balanced.
pub(crate) fn hierholzer(
    g: &LabeledGraph,
    arcs: &[Arc],
    start: usize,
    ranks: &Ranks,
    policy: &PriorityPolicy<'_>,
    trace: &mut TraceStats,
) -> Walk {
    let n = g.node_count();
    let mut out: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, a) in arcs.iter().enumerate() {
        out[a.from as usize].push(i as u32);
    }
    let mut remaining: Vec<u32> = out.iter().map(|o| o.len() as u32).collect();

    // Static keys: (max priority, min (edge label, dir, repeat, target label)).
    // Arcs with equal static keys share a group and are split dynamically.
    let guided = policy.is_guided();
    let mut group = vec![0u32; arcs.len()];
    if guided {
        type Key = (Reverse<u64>, u32, EdgeDir, bool, u32);
        let key = |i: u32| -> Key {
            let a = &arcs[i as usize];
            (
                Reverse(ranks.priority(policy, a.from as usize, a.edge as usize, a.to as usize, a.dir)),
                ranks.edge[a.edge as usize],
                a.dir,
                a.repeat,
                ranks.node[a.to as usize],
            )
        };
        let mut next_group = 0u32;
        for list in out.iter_mut() {
            let mut keyed: Vec<(Key, u32, u32)> =
                list.iter().map(|&i| (key(i), arcs[i as usize].to, i)).collect();
            keyed.sort_unstable();
            list.clear();
            let mut prev: Option<Key> = None;
            for (k, _, i) in keyed {
                if prev != Some(k) {
                    next_group += 1;
                    prev = Some(k);
                }
                group[i as usize] = next_group;
                list.push(i);
            }
        }
    }

    let mut used = vec![false; arcs.len()];
    let mut cursor = vec![0usize; n];
    let mut stack: Vec<(u32, u32)> = vec![(start as u32, NO_ARC)];
    let mut circuit: Vec<(u32, u32)> = Vec::with_capacity(arcs.len() + 1);

    while let Some(&(u, _)) = stack.last() {
        let u = u as usize;
        let list = &out[u];
        let mut c = cursor[u];
        while c < list.len() && used[list[c] as usize] {
            c += 1;
        }
        cursor[u] = c;
        if c == list.len() {
            circuit.push(stack.pop().unwrap());
            continue;
        }
        let mut chosen = list[c];
        if guided {
            let grp = group[chosen as usize];
            let mut best: (Reverse<u32>, u32) = (Reverse(0), u32::MAX);
            let mut best_tie = false;
            for &i in list[c..].iter().take_while(|&&i| group[i as usize] == grp) {
                if used[i as usize] {
                    continue;
                }
                let to = arcs[i as usize].to;
                let k = (Reverse(remaining[to as usize]), to);
                if best.1 == u32::MAX || k < best {
                    best_tie = best.1 != u32::MAX && k.0 == best.0 && k.1 != best.1;
                    best = k;
                    chosen = i;
                } else if k.0 == best.0 && k.1 != best.1 {
                    best_tie = true;
                }
            }
            if best_tie {
                trace.fallbacks += 1;
            }
        }
        let a = arcs[chosen as usize];
        used[chosen as usize] = true;
        remaining[a.from as usize] -= 1;
        if a.twin != NO_ARC {
            used[a.twin as usize] = true;
            remaining[a.to as usize] -= 1;
        }
        stack.push((a.to, chosen));
    }

    circuit.reverse();
    let start = circuit.first().map_or(start, |&(v, _)| v as usize);
    let steps = circuit
        .iter()
        .skip(1)
        .map(|&(v, ai)| {
            let a = &arcs[ai as usize];
            WalkStep {
                edge: a.edge as usize,
                to: v as usize,
                dir: a.dir,
                repeat: a.repeat,
            }
        })
        .collect();
    Walk { start, steps }
}

/// Closed walk traversing every edge exactly twice, once in each direction.
///
/// `g` should be connected; only the start node's component is walked
/// otherwise. Guided policies pick departures by corpus pattern count.
pub fn euler_circuit(g: &LabeledGraph, policy: &PriorityPolicy<'_>) -> Walk {
    euler_circuit_traced(g, policy, &mut TraceStats::default())
}

pub(crate) fn euler_circuit_traced(
    g: &LabeledGraph,
    policy: &PriorityPolicy<'_>,
    trace: &mut TraceStats,
) -> Walk {
    let ranks = Ranks::new(g, policy);
    let degrees = g.degrees();
    let Some(start) = pick_start(
        &ranks,
        &degrees,
        (0..g.node_count()).filter(|&v| degrees[v] > 0),
        policy.is_guided(),
        trace,
    ) else {
        return Walk { start: 0, steps: Vec::new() };
    };
    let arcs = doubled_arcs(g);
    hierholzer(g, &arcs, start, &ranks, policy, trace)
}
