use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use crate::serialize::SerializedSequence;
use crate::symbol::{Symbol, SymbolId};

use super::{canonical_alphabet, Codebook, SEPARATOR_ID};

const NIL: u32 = u32::MAX;

/// Per-merge record of the winning pair's disjoint count at selection time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainTrace {
    pub selected_counts: Vec<u64>,
}

/// Learns up to `k` merges over `corpus`. Stops early once no pair occurs
/// at least twice.
pub fn bpe_train(corpus: &[SerializedSequence], k: usize) -> Codebook {
    let seqs: Vec<Vec<Symbol>> = corpus.iter().map(|s| s.symbols.clone()).collect();
    let span = seqs
        .iter()
        .flatten()
        .filter_map(|s| match s {
            Symbol::BackRef(k) => Some(k + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    train_symbols(&seqs, k, span).0
}

pub fn train_symbols(seqs: &[Vec<Symbol>], k: usize, backref_span: u32) -> (Codebook, TrainTrace) {
    let alphabet = canonical_alphabet(seqs.iter().flatten(), backref_span);
    let probe = Codebook::new(alphabet.clone(), &[]).expect("canonical alphabet is valid");
    let mut words: Vec<Vec<u32>> = Vec::new();
    for s in seqs {
        let ids = probe
            .symbols_to_ids(s)
            .expect("alphabet covers the corpus");
        words.extend(
            ids.split(|&id| id == SEPARATOR_ID)
                .map(|w| w.iter().map(|id| id.0).collect::<Vec<u32>>()),
        );
    }
    let (pairs, trace) = train_words(&words, alphabet.len() as u32, k);
    let pairs: Vec<(SymbolId, SymbolId)> = pairs
        .into_iter()
        .map(|(a, b)| (SymbolId(a), SymbolId(b)))
        .collect();
    (
        Codebook::new(alphabet, &pairs).expect("trained rules are well formed"),
        trace,
    )
}

struct Arena {
    sym: Vec<u32>,
    prev: Vec<u32>,
    next: Vec<u32>,
    alive: Vec<bool>,
}

impl Arena {
    fn run_start(&self, mut x: u32) -> u32 {
        while self.prev[x as usize] != NIL && self.sym[self.prev[x as usize] as usize] == self.sym[x as usize] {
            x = self.prev[x as usize];
        }
        x
    }

    fn run_end(&self, mut x: u32) -> u32 {
        while self.next[x as usize] != NIL && self.sym[self.next[x as usize] as usize] == self.sym[x as usize] {
            x = self.next[x as usize];
        }
        x
    }

    /// Applies `f(pair, count)` for the disjoint pair counts of the nodes
    /// from `from` up to (not including) `stop`.
    fn window_counts(&self, from: u32, stop: u32, mut f: impl FnMut((u32, u32), i64)) {
        let mut i = from;
        let mut run = 0u32;
        while i != stop {
            let s = self.sym[i as usize];
            let j = self.next[i as usize];
            run += 1;
            if j == stop || self.sym[j as usize] != s {
                if run >= 2 {
                    f((s, s), (run / 2) as i64);
                }
                run = 0;
                if j != stop {
                    f((s, self.sym[j as usize]), 1);
                }
            }
            i = j;
        }
    }
}

/// Core trainer over words of base ids (no separators). Returns the merge
/// pairs in rank order; rule `r` produces id `first_new + r`.
///
/// Pair counts are maintained incrementally. After each merge only the
/// windows around rewritten sites are recounted; a window spans whole runs
/// of equal symbols on both sides, so same-symbol counts (`floor(run / 2)`)
/// stay exact.
pub fn train_words(words: &[Vec<u32>], first_new: u32, k: usize) -> (Vec<(u32, u32)>, TrainTrace) {
    let total: usize = words.iter().map(Vec::len).sum();
    let mut ar = Arena {
        sym: Vec::with_capacity(total),
        prev: Vec::with_capacity(total),
        next: Vec::with_capacity(total),
        alive: vec![true; total],
    };
    for w in words {
        let base = ar.sym.len() as u32;
        for (i, &s) in w.iter().enumerate() {
            ar.sym.push(s);
            ar.prev.push(if i == 0 { NIL } else { base + i as u32 - 1 });
            ar.next.push(if i + 1 == w.len() { NIL } else { base + i as u32 + 1 });
        }
    }

    let mut counts: FxHashMap<(u32, u32), i64> = FxHashMap::default();
    let mut positions: FxHashMap<(u32, u32), Vec<u32>> = FxHashMap::default();
    let mut start = 0u32;
    for w in words {
        if !w.is_empty() {
            ar.window_counts(start, NIL, |p, c| *counts.entry(p).or_insert(0) += c);
            for i in start..start + w.len() as u32 - 1 {
                positions
                    .entry((ar.sym[i as usize], ar.sym[i as usize + 1]))
                    .or_default()
                    .push(i);
            }
        }
        start += w.len() as u32;
    }
    let mut heap: BinaryHeap<(i64, Reverse<(u32, u32)>)> =
        counts.iter().map(|(&p, &c)| (c, Reverse(p))).collect();

    let mut pairs = Vec::new();
    let mut trace = TrainTrace::default();
    let mut delta: FxHashMap<(u32, u32), i64> = FxHashMap::default();
    let mut sites: Vec<(u32, u32)> = Vec::new();
    while pairs.len() < k {
        let Some((c, Reverse(pair))) = heap.pop() else {
            break;
        };
        if counts.get(&pair).copied() != Some(c) {
            continue;
        }
        if c < 2 {
            break;
        }
        let (a, b) = pair;
        let t = first_new + pairs.len() as u32;

        let mut cand = positions.remove(&pair).unwrap_or_default();
        cand.sort_unstable();
        cand.dedup();
        sites.clear();
        let mut last_right = NIL;
        for i in cand {
            let j = ar.next[i as usize];
            if !ar.alive[i as usize] || ar.sym[i as usize] != a || j == NIL || ar.sym[j as usize] != b {
                continue;
            }
            if i == last_right {
                continue;
            }
            sites.push((i, j));
            last_right = j;
        }

        delta.clear();
        let mut s = 0;
        while s < sites.len() {
            // Grow a cluster of sites whose recount windows overlap.
            let (i0, _) = sites[s];
            let left = match ar.prev[i0 as usize] {
                NIL => i0,
                p => ar.run_start(p),
            };
            let mut right = 0u32;
            let mut e = s;
            while e < sites.len() {
                let (i, j) = sites[e];
                if e > s && i > right {
                    break;
                }
                let r = match ar.next[j as usize] {
                    NIL => j,
                    nx if nx <= right && e > s => right,
                    nx => ar.run_end(nx),
                };
                right = right.max(r);
                e += 1;
            }
            let stop = ar.next[right as usize];

            ar.window_counts(left, stop, |p, c| *delta.entry(p).or_insert(0) -= c);
            for &(i, j) in &sites[s..e] {
                ar.sym[i as usize] = t;
                ar.alive[j as usize] = false;
                let nx = ar.next[j as usize];
                ar.next[i as usize] = nx;
                if nx != NIL {
                    ar.prev[nx as usize] = i;
                }
            }
            ar.window_counts(left, stop, |p, c| *delta.entry(p).or_insert(0) += c);
            let mut i = left;
            while i != stop {
                let j = ar.next[i as usize];
                if j != stop {
                    let p = (ar.sym[i as usize], ar.sym[j as usize]);
                    if p.0 == t || p.1 == t {
                        positions.entry(p).or_default().push(i);
                    }
                }
                i = j;
            }
            s = e;
        }

        for (&p, &d) in &delta {
            if d == 0 {
                continue;
            }
            let c = counts.entry(p).or_insert(0);
            *c += d;
            debug_assert!(*c >= 0);
            if *c > 0 {
                heap.push((*c, Reverse(p)));
            } else {
                counts.remove(&p);
            }
        }
        trace.selected_counts.push(c as u64);
        pairs.push(pair);
    }
    (pairs, trace)
}
