use crate::graph::{Label, LabeledGraph};
use crate::stats::Guidance;
use crate::symbol::EdgeDir;

use super::TraceStats;

/// Decides traversal order. Guided policies rank steps by corpus pattern
/// counts; unguided ones follow node and edge ids.
#[derive(Debug, Clone, Copy)]
pub struct PriorityPolicy<'a> {
    guidance: Option<&'a Guidance>,
}

impl<'a> PriorityPolicy<'a> {
    pub fn guided(guidance: &'a Guidance) -> Self {
        PriorityPolicy {
            guidance: Some(guidance),
        }
    }

    pub fn unguided() -> Self {
        PriorityPolicy { guidance: None }
    }

    pub fn is_guided(&self) -> bool {
        self.guidance.is_some()
    }
}

/// Per-graph lookup tables shared by the traversal routines.
pub(crate) struct Ranks {
    /// Rank of each node label among the graph's distinct node labels.
    pub node: Vec<u32>,
    /// Rank of each edge label among the graph's distinct edge labels.
    pub edge: Vec<u32>,
    node_gid: Vec<u32>,
    edge_gid: Vec<u32>,
}

fn dense_ranks<'l>(labels: impl Iterator<Item = &'l Label> + Clone) -> Vec<u32> {
    let mut uniq: Vec<&Label> = labels.clone().collect();
    uniq.sort_unstable();
    uniq.dedup();
    labels
        .map(|l| uniq.binary_search(&l).unwrap_or(0) as u32)
        .collect()
}

impl Ranks {
    pub fn new(g: &LabeledGraph, policy: &PriorityPolicy<'_>) -> Self {
        let node = dense_ranks(g.node_labels().iter());
        let edge = dense_ranks(g.edges().iter().map(|e| &e.label));
        let (node_gid, edge_gid) = match policy.guidance {
            Some(gd) => (
                g.node_labels().iter().map(|l| gd.label_id(l)).collect(),
                g.edges().iter().map(|e| gd.label_id(&e.label)).collect(),
            ),
            None => (Vec::new(), Vec::new()),
        };
        Ranks {
            node,
            edge,
            node_gid,
            edge_gid,
        }
    }

    /// Corpus count of the pattern behind one traversal step. Directed edges
    /// are looked up in their stored orientation whichever way they are walked.
    pub fn priority(
        &self,
        policy: &PriorityPolicy<'_>,
        from: usize,
        edge: usize,
        to: usize,
        dir: EdgeDir,
    ) -> u64 {
        let Some(gd) = policy.guidance else {
            return 0;
        };
        let (a, b) = if dir == EdgeDir::Backward {
            (to, from)
        } else {
            (from, to)
        };
        gd.priority(self.node_gid[a], self.edge_gid[edge], self.node_gid[b])
    }
}

/// Start node: smallest `(label, degree, id)` when `canonical`, else the
/// first candidate.
/// A tie on `(label, degree)` between distinct nodes counts as a fallback.
pub(crate) fn pick_start(
    ranks: &Ranks,
    degrees: &[usize],
    candidates: impl Iterator<Item = usize>,
    canonical: bool,
    trace: &mut TraceStats,
) -> Option<usize> {
    let mut best: Option<(u32, usize, usize)> = None;
    let mut tied = false;
    for v in candidates {
        if !canonical {
            return Some(v);
        }
        let key = (ranks.node[v], degrees[v], v);
        match best {
            None => best = Some(key),
            Some(b) => {
                if (key.0, key.1) == (b.0, b.1) {
                    tied = true;
                } else if key < b {
                    best = Some(key);
                    tied = false;
                }
            }
        }
    }
    if tied {
        trace.fallbacks += 1;
    }
    best.map(|b| b.2)
}
