//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own checking code.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{Mutex, MutexGuard};

use graphtok::{LabeledGraph, Symbol};

static SERIAL: Mutex<()> = Mutex::new(());

/// Held by tests that time things or use every core.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// One uncaptured status line.
pub fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion:>2} {name}: {verdict} ({detail})");
}

pub fn skip(criterion: u32, name: &str, why: &str) {
    let _ = writeln!(std::io::stderr(), "criterion {criterion:>2} {name}: SKIP ({why})");
}

fn pair_labels(g: &LabeledGraph) -> HashMap<(usize, usize), Vec<String>> {
    let mut m: HashMap<(usize, usize), Vec<String>> = HashMap::new();
    for e in g.edges() {
        let key = if g.is_directed() { (e.u, e.v) } else { (e.u.min(e.v), e.u.max(e.v)) };
        m.entry(key).or_default().push(e.label.to_string());
    }
    for v in m.values_mut() {
        v.sort();
    }
    m
}

/// Exact labeled multigraph isomorphism by plain backtracking over node
/// order, pruned by label and degree only.
pub fn oracle_isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    let n = a.node_count();
    if n != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    if a.edge_count() > 0 && a.is_directed() != b.is_directed() {
        return false;
    }
    let (da, db) = (a.degrees(), b.degrees());
    let (pa, pb) = (pair_labels(a), pair_labels(b));
    let directed = a.is_directed();
    let key = |u: usize, v: usize| if directed { (u, v) } else { (u.min(v), u.max(v)) };
    let empty: Vec<String> = Vec::new();
    let get = |m: &HashMap<(usize, usize), Vec<String>>, k| -> Vec<String> { m.get(&k).cloned().unwrap_or_else(|| empty.clone()) };

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        u: usize,
        n: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if u == n {
            return true;
        }
        for v in 0..n {
            if used[v] || !ok(u, v, &map[..u]) {
                continue;
            }
            map[u] = v;
            used[v] = true;
            if go(u + 1, n, map, used, ok) {
                return true;
            }
            used[v] = false;
        }
        false
    }
    let ok = |u: usize, v: usize, prefix: &[usize]| -> bool {
        if a.node_label(u) != b.node_label(v) || da[u] != db[v] {
            return false;
        }
        if get(&pa, key(u, u)) != get(&pb, key(v, v)) {
            return false;
        }
        prefix.iter().enumerate().all(|(w, &x)| {
            get(&pa, key(u, w)) == get(&pb, key(v, x)) && (!directed || get(&pa, key(w, u)) == get(&pb, key(x, v)))
        })
    };
    go(0, n, &mut map, &mut used, &ok)
}

/// Sorted `(endpoint labels, edge label)` triples; endpoints sorted unless directed.
pub fn labeled_edges(g: &LabeledGraph) -> Vec<(String, String, String)> {
    let mut v: Vec<_> = g
        .edges()
        .iter()
        .map(|e| {
            let (x, y) = (g.node_label(e.u).to_string(), g.node_label(e.v).to_string());
            let (x, y) = if !g.is_directed() && y < x { (y, x) } else { (x, y) };
            (x, e.label.to_string(), y)
        })
        .collect();
    v.sort();
    v
}

pub fn node_label_counts(g: &LabeledGraph) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for l in g.node_labels() {
        *m.entry(l.to_string()).or_insert(0) += 1;
    }
    m
}

pub fn degree_sequence(g: &LabeledGraph) -> Vec<usize> {
    let mut d = g.degrees();
    d.sort_unstable();
    d
}

/// Recount-every-iteration BPE over words of ids. Same-symbol runs count
/// `floor(len / 2)`; ties go to the smallest pair; stops below count 2.
pub fn naive_bpe(words: &[Vec<u32>], first_new: u32, k: usize) -> Vec<((u32, u32), u64)> {
    let mut words = words.to_vec();
    let mut out = Vec::new();
    while out.len() < k {
        let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for w in &words {
            let mut i = 0;
            while i + 1 < w.len() {
                if w[i] == w[i + 1] {
                    let mut j = i;
                    while j < w.len() && w[j] == w[i] {
                        j += 1;
                    }
                    *counts.entry((w[i], w[i])).or_default() += ((j - i) / 2) as u64;
                    if j < w.len() {
                        *counts.entry((w[i], w[j])).or_default() += 1;
                    }
                    i = j;
                } else {
                    *counts.entry((w[i], w[i + 1])).or_default() += 1;
                    i += 1;
                }
            }
        }
        let mut best: Option<((u32, u32), u64)> = None;
        for (&p, &c) in &counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((p, c));
            }
        }
        let Some((pair, c)) = best.filter(|&(_, c)| c >= 2) else {
            break;
        };
        let t = first_new + out.len() as u32;
        for w in words.iter_mut() {
            let mut r = Vec::with_capacity(w.len());
            let mut i = 0;
            while i < w.len() {
                if i + 1 < w.len() && (w[i], w[i + 1]) == pair {
                    r.push(t);
                    i += 2;
                } else {
                    r.push(w[i]);
                    i += 1;
                }
            }
            *w = r;
        }
        out.push((pair, c));
    }
    out
}

/// Minimum closed covering walk weight: edge weight sum plus the cheapest
/// pairing of odd-degree nodes under shortest-path distances.
pub fn oracle_cpp(g: &LabeledGraph, w: &[f64]) -> f64 {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (e, &x) in g.edges().iter().zip(w) {
        if x < d[e.u][e.v] {
            d[e.u][e.v] = x;
            d[e.v][e.u] = x;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let odd: Vec<usize> = g.degrees().iter().enumerate().filter(|(_, &x)| x % 2 == 1).map(|(v, _)| v).collect();
    fn pairing(rest: &[usize], d: &[Vec<f64>]) -> f64 {
        if rest.is_empty() {
            return 0.0;
        }
        let a = rest[0];
        (1..rest.len())
            .map(|i| {
                let others: Vec<usize> = rest[1..].iter().copied().enumerate().filter(|&(j, _)| j + 1 != i).map(|(_, x)| x).collect();
                d[a][rest[i]] + pairing(&others, d)
            })
            .fold(f64::INFINITY, f64::min)
    }
    w.iter().sum::<f64>() + pairing(&odd, &d)
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let r = find(&mut parent, 0);
    (0..n).all(|x| find(&mut parent, x) == r)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every connected simple graph with `2..=max_n` nodes and `1..=max_m`
/// edges, one per isomorphism class, as `(n, edge list)`.
pub fn connected_graphs_up_to_iso(max_n: usize, max_m: usize) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let perms = permutations(n);
        let mut seen = std::collections::HashSet::new();
        for mask in 1u32..(1 << pairs.len()) {
            if mask.count_ones() as usize > max_m {
                continue;
            }
            let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
            if !connected(n, &edges) {
                continue;
            }
            let canon = perms
                .iter()
                .map(|p| {
                    edges.iter().fold(0u32, |acc, &(u, v)| {
                        let (a, b) = (p[u].min(p[v]), p[u].max(p[v]));
                        acc | 1 << index[&(a, b)]
                    })
                })
                .min()
                .unwrap();
            if seen.insert(canon) {
                out.push((n, edges));
            }
        }
    }
    out
}

/// Node label of every node position in one component segment, resolving
/// back-references by discovery order.
pub fn position_labels(segment: &[Symbol]) -> Vec<String> {
    let mut discovered: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for s in segment {
        match s {
            Symbol::Node(l) => {
                discovered.push(l.to_string());
                out.push(l.to_string());
            }
            Symbol::BackRef(k) => out.push(discovered[*k as usize].clone()),
            _ => {}
        }
    }
    out
}
