//! Dataset-level counts of local labeled patterns and the frequency map that
//! guides serialization.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;

use crate::graph::{Label, LabeledGraph};

/// Per-graph path budget for multi-hop units.
pub const MULTI_HOP_PATH_CAP: u64 = 1_000_000;

/// Which local structure is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[derive(Default)]
pub enum GuidanceUnit {
    NodeNodeBigram,
    NodeEdgeBigram,
    #[default]
    NodeEdgeNodeTrigram,
    /// Label sequences of simple paths with this many hops (at least 2).
    MultiHopPath(u8),
}


impl fmt::Display for GuidanceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuidanceUnit::NodeNodeBigram => f.write_str("node-node"),
            GuidanceUnit::NodeEdgeBigram => f.write_str("node-edge"),
            GuidanceUnit::NodeEdgeNodeTrigram => f.write_str("trigram"),
            GuidanceUnit::MultiHopPath(k) => write!(f, "path-{k}"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("unknown guidance unit {0:?} (expected node-node, node-edge, trigram or path-K)")]
    UnknownUnit(String),
    #[error("multi-hop paths need at least 2 hops, got {0}")]
    TooFewHops(u8),
    #[error("corpus contains no patterns")]
    EmptyCorpus,
}

impl FromStr for GuidanceUnit {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "node-node" | "nn" => Ok(GuidanceUnit::NodeNodeBigram),
            "node-edge" | "ne" => Ok(GuidanceUnit::NodeEdgeBigram),
            "trigram" | "node-edge-node" => Ok(GuidanceUnit::NodeEdgeNodeTrigram),
            _ => {
                let k = s
                    .strip_prefix("path-")
                    .and_then(|k| k.parse::<u8>().ok())
                    .ok_or_else(|| StatsError::UnknownUnit(s.to_string()))?;
                if k < 2 {
                    return Err(StatsError::TooFewHops(k));
                }
                Ok(GuidanceUnit::MultiHopPath(k))
            }
        }
    }
}

/// A labeled local pattern: `(src, edge, dst)` for trigrams, shorter or
/// longer label tuples for the other units.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern(pub Vec<Label>);

impl Pattern {
    pub fn trigram(src: &Label, edge: &Label, dst: &Label) -> Self {
        Pattern(vec![src.clone(), edge.clone(), dst.clone()])
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\t")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PatternCounts {
    pub counts: BTreeMap<Pattern, u64>,
    /// Set when the multi-hop path budget was exhausted.
    pub truncated: bool,
}

/// Counts the patterns of `unit` in one graph. Undirected edges contribute
/// both orientations; directed edges only their stated one.
pub fn count_patterns(g: &LabeledGraph, unit: GuidanceUnit) -> PatternCounts {
    let mut out = PatternCounts::default();
    let mut add = |p: Pattern| *out.counts.entry(p).or_insert(0) += 1;
    let orientations = |e: &crate::graph::Edge| {
        let fwd = (e.u, e.v);
        if g.is_directed() {
            [Some(fwd), None]
        } else {
            [Some(fwd), Some((e.v, e.u))]
        }
    };
    match unit {
        GuidanceUnit::NodeEdgeNodeTrigram => {
            for e in g.edges() {
                for (a, b) in orientations(e).into_iter().flatten() {
                    add(Pattern::trigram(g.node_label(a), &e.label, g.node_label(b)));
                }
            }
        }
        GuidanceUnit::NodeNodeBigram => {
            for e in g.edges() {
                for (a, b) in orientations(e).into_iter().flatten() {
                    add(Pattern(vec![g.node_label(a).clone(), g.node_label(b).clone()]));
                }
            }
        }
        GuidanceUnit::NodeEdgeBigram => {
            for e in g.edges() {
                for (a, _) in orientations(e).into_iter().flatten() {
                    add(Pattern(vec![g.node_label(a).clone(), e.label.clone()]));
                }
            }
        }
        GuidanceUnit::MultiHopPath(k) => {
            out.truncated = count_paths(g, k as usize, MULTI_HOP_PATH_CAP, &mut out.counts);
        }
    }
    out
}

/// Enumerates simple paths of exactly `hops` edges. Returns true if the cap hit.
fn count_paths(
    g: &LabeledGraph,
    hops: usize,
    cap: u64,
    counts: &mut BTreeMap<Pattern, u64>,
) -> bool {
    let n = g.node_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        if e.u == e.v {
            continue;
        }
        adj[e.u].push((i, e.v));
        if !g.is_directed() {
            adj[e.v].push((i, e.u));
        }
    }

    struct Walker<'a> {
        g: &'a LabeledGraph,
        adj: &'a [Vec<(usize, usize)>],
        hops: usize,
        cap: u64,
        found: u64,
        on_path: Vec<bool>,
        labels: Vec<Label>,
    }

    impl Walker<'_> {
        fn extend(&mut self, u: usize, depth: usize, counts: &mut BTreeMap<Pattern, u64>) -> bool {
            if depth == self.hops {
                *counts.entry(Pattern(self.labels.clone())).or_insert(0) += 1;
                self.found += 1;
                return self.found >= self.cap;
            }
            for &(e, w) in &self.adj[u] {
                if self.on_path[w] {
                    continue;
                }
                self.on_path[w] = true;
                self.labels.push(self.g.edges()[e].label.clone());
                self.labels.push(self.g.node_label(w).clone());
                let stop = self.extend(w, depth + 1, counts);
                self.labels.truncate(self.labels.len() - 2);
                self.on_path[w] = false;
                if stop {
                    return true;
                }
            }
            false
        }
    }

    let mut walker = Walker {
        g,
        adj: &adj,
        hops,
        cap,
        found: 0,
        on_path: vec![false; n],
        labels: Vec::with_capacity(2 * hops + 1),
    };
    for s in 0..n {
        walker.on_path[s] = true;
        walker.labels.clear();
        walker.labels.push(g.node_label(s).clone());
        let stop = walker.extend(s, 0, counts);
        walker.on_path[s] = false;
        if stop {
            return true;
        }
    }
    false
}

/// Corpus-level counts `C(p)` and relative frequencies `F(p) = C(p) / total`.
/// Patterns absent from the map have frequency zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyMap {
    unit: GuidanceUnit,
    counts: BTreeMap<Pattern, u64>,
    total: u64,
    truncated: bool,
}

impl FrequencyMap {
    /// A map with no observations; guidance degrades to the lexical tie chain.
    pub fn empty(unit: GuidanceUnit) -> Self {
        FrequencyMap {
            unit,
            counts: BTreeMap::new(),
            total: 0,
            truncated: false,
        }
    }

    pub fn from_counts(unit: GuidanceUnit, counts: BTreeMap<Pattern, u64>, truncated: bool) -> Self {
        let counts: BTreeMap<_, _> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total = counts.values().sum();
        FrequencyMap {
            unit,
            counts,
            total,
            truncated,
        }
    }

    pub fn unit(&self) -> GuidanceUnit {
        self.unit
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn count(&self, p: &Pattern) -> u64 {
        self.counts.get(p).copied().unwrap_or(0)
    }

    pub fn freq(&self, p: &Pattern) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(p) as f64 / self.total as f64
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `(pattern, count, frequency)` in pattern order.
    pub fn iter(&self) -> impl Iterator<Item = (&Pattern, u64, f64)> + '_ {
        self.counts
            .iter()
            .map(move |(p, &c)| (p, c, c as f64 / self.total as f64))
    }

    /// Rows sorted by descending count, ties by pattern.
    pub fn top(&self, k: usize) -> Vec<(&Pattern, u64, f64)> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows.truncate(k);
        rows
    }

    /// Adds the counts of `other` (same unit) and renormalizes.
    pub fn merge(&mut self, other: &FrequencyMap) {
        debug_assert_eq!(self.unit, other.unit);
        for (p, &c) in &other.counts {
            *self.counts.entry(p.clone()).or_insert(0) += c;
        }
        self.total += other.total;
        self.truncated |= other.truncated;
    }
}

/// Sums per-graph counts over a corpus and normalizes. The result does not
/// depend on corpus order.
pub fn aggregate_frequencies<'a, I>(corpus: I, unit: GuidanceUnit) -> Result<FrequencyMap, StatsError>
where
    I: IntoIterator<Item = &'a LabeledGraph>,
{
    let mut counts = BTreeMap::new();
    let mut truncated = false;
    for g in corpus {
        let pc = count_patterns(g, unit);
        truncated |= pc.truncated;
        for (p, c) in pc.counts {
            *counts.entry(p).or_insert(0) += c;
        }
    }
    let map = FrequencyMap::from_counts(unit, counts, truncated);
    if map.total == 0 {
        return Err(StatsError::EmptyCorpus);
    }
    Ok(map)
}

const UNSEEN: u32 = u32::MAX;
const ANY: u32 = u32::MAX - 1;

/// A frequency map compiled for fast per-arc priority lookups.
///
/// Multi-hop units are projected onto their first hop: the priority of a step
/// is the summed count of every counted path that starts with it.
#[derive(Debug, Clone)]
pub struct Guidance {
    unit: GuidanceUnit,
    label_ids: HashMap<Label, u32>,
    table: FxHashMap<[u32; 3], u64>,
    total: u64,
}

impl Guidance {
    pub fn new(freq: &FrequencyMap) -> Self {
        let mut label_ids = HashMap::new();
        let mut id = |l: &Label| {
            let next = label_ids.len() as u32;
            *label_ids.entry(l.clone()).or_insert(next)
        };
        let mut table: FxHashMap<[u32; 3], u64> = FxHashMap::default();
        for (p, &c) in &freq.counts {
            let ls = p.labels();
            let key = match freq.unit {
                GuidanceUnit::NodeEdgeNodeTrigram => [id(&ls[0]), id(&ls[1]), id(&ls[2])],
                GuidanceUnit::NodeNodeBigram => [id(&ls[0]), ANY, id(&ls[1])],
                GuidanceUnit::NodeEdgeBigram => [id(&ls[0]), id(&ls[1]), ANY],
                GuidanceUnit::MultiHopPath(_) => [id(&ls[0]), id(&ls[1]), id(&ls[2])],
            };
            *table.entry(key).or_insert(0) += c;
        }
        Guidance {
            unit: freq.unit,
            label_ids,
            table,
            total: freq.total,
        }
    }

    pub fn unit(&self) -> GuidanceUnit {
        self.unit
    }

    /// Total pattern count of the underlying map.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Compact id for a label, or a sentinel when the corpus never saw it.
    pub fn label_id(&self, l: &Label) -> u32 {
        self.label_ids.get(l).copied().unwrap_or(UNSEEN)
    }

    /// Count-valued priority of stepping `src -edge-> dst` (ids from [`Self::label_id`]).
    pub fn priority(&self, src: u32, edge: u32, dst: u32) -> u64 {
        let key = match self.unit {
            GuidanceUnit::NodeEdgeNodeTrigram | GuidanceUnit::MultiHopPath(_) => [src, edge, dst],
            GuidanceUnit::NodeNodeBigram => [src, ANY, dst],
            GuidanceUnit::NodeEdgeBigram => [src, edge, ANY],
        };
        if key.contains(&UNSEEN) {
            return 0;
        }
        self.table.get(&key).copied().unwrap_or(0)
    }

    /// Relative frequency of the step's pattern, in `[0, 1]`.
    pub fn frequency(&self, src: u32, edge: u32, dst: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.priority(src, edge, dst) as f64 / self.total as f64
    }
}
