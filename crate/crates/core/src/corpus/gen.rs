//! Seeded synthetic graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, Label, LabeledGraph};

fn pick<T: AsRef<str>>(rng: &mut ChaCha8Rng, alphabet: &[T]) -> Label {
    Label::new(alphabet[rng.gen_range(0..alphabet.len())].as_ref())
}

/// Erdős–Rényi graph with uniformly drawn labels.
///
/// Panics on empty alphabets or `p` outside `[0, 1]`.
pub fn gen_random_graph<N: AsRef<str>, E: AsRef<str>>(
    n: usize,
    p: f64,
    node_alphabet: &[N],
    edge_alphabet: &[E],
    seed: u64,
) -> LabeledGraph {
    assert!((0.0..=1.0).contains(&p), "edge probability {p} outside [0, 1]");
    assert!(!node_alphabet.is_empty() && !edge_alphabet.is_empty(), "empty alphabet");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Label> = (0..n).map(|_| pick(&mut rng, node_alphabet)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge { u, v, label: pick(&mut rng, edge_alphabet) });
            }
        }
    }
    LabeledGraph::from_parts(labels, edges, false).expect("generated graph is valid")
}

/// Erdős–Rényi graph plus multigraph extras: each present edge gains a
/// parallel copy with probability `p / 3` and each node a self-loop with
/// probability `p / 5`. Edge order is shuffled.
pub fn gen_random_multigraph<N: AsRef<str>, E: AsRef<str>>(
    n: usize,
    p: f64,
    node_alphabet: &[N],
    edge_alphabet: &[E],
    seed: u64,
) -> LabeledGraph {
    let base = gen_random_graph(n, p, node_alphabet, edge_alphabet, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d75_6c74_6967_7261);
    let mut edges = base.edges().to_vec();
    for e in base.edges() {
        if rng.gen_bool(p / 3.0) {
            edges.push(Edge { u: e.v, v: e.u, label: pick(&mut rng, edge_alphabet) });
        }
    }
    for v in 0..n {
        if rng.gen_bool(p / 5.0) {
            edges.push(Edge { u: v, v, label: pick(&mut rng, edge_alphabet) });
        }
    }
    edges.shuffle(&mut rng);
    LabeledGraph::from_parts(base.node_labels().to_vec(), edges, false).expect("generated graph is valid")
}

fn valence(l: &str) -> usize {
    match l {
        "C" => 4,
        "N" => 3,
        "O" | "S" => 2,
        _ => 1,
    }
}

struct Mol {
    labels: Vec<Label>,
    edges: Vec<Edge>,
    used: Vec<usize>,
}

impl Mol {
    fn add_atom(&mut self, l: &str) -> usize {
        self.labels.push(Label::new(l));
        self.used.push(0);
        self.labels.len() - 1
    }

    fn bond(&mut self, u: usize, v: usize, b: &str, order: usize) {
        self.edges.push(Edge { u, v, label: Label::new(b) });
        self.used[u] += order;
        self.used[v] += order;
    }

    fn free(&self, v: usize) -> usize {
        valence(self.labels[v].as_str()).saturating_sub(self.used[v])
    }
}

/// Small organic-looking molecule: aromatic six-rings (`:` bonds), saturated
/// five-rings and branched chains of C, N, O, S and halogens with single and
/// occasional double bonds, respecting simple valences. Connected, about
/// `n_atoms` atoms.
pub fn gen_molecule_like(n_atoms: usize, seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mol { labels: Vec::new(), edges: Vec::new(), used: Vec::new() };
    if n_atoms == 0 {
        return LabeledGraph::empty(false);
    }
    let chain_atom = |rng: &mut ChaCha8Rng| -> &'static str {
        match rng.gen_range(0..100) {
            0..=69 => "C",
            70..=81 => "N",
            82..=93 => "O",
            94..=96 => "S",
            97..=98 => "F",
            _ => "Cl",
        }
    };
    let ring = |m: &mut Mol, rng: &mut ChaCha8Rng, size: usize, aromatic: bool, anchor: Option<usize>| {
        let ids: Vec<usize> = (0..size)
            .map(|i| {
                let hetero = i > 0 && rng.gen_bool(0.15);
                m.add_atom(if hetero { if aromatic { "N" } else { "O" } } else { "C" })
            })
            .collect();
        let b = if aromatic { ":" } else { "-" };
        for i in 0..size {
            m.bond(ids[i], ids[(i + 1) % size], b, 1);
        }
        if aromatic {
            // Aromatic ring atoms keep one free valence for a substituent.
            for &v in &ids {
                m.used[v] += 1;
            }
        }
        if let Some(a) = anchor {
            m.bond(a, ids[0], "-", 1);
        }
    };

    if n_atoms >= 6 && rng.gen_bool(0.6) {
        ring(&mut m, &mut rng, 6, true, None);
    } else {
        m.add_atom("C");
    }
    let mut guard = 0;
    while m.labels.len() < n_atoms && guard < 10 * n_atoms + 100 {
        guard += 1;
        let open: Vec<usize> = (0..m.labels.len()).filter(|&v| m.free(v) > 0).collect();
        let Some(&at) = open.choose(&mut rng) else {
            break;
        };
        let room = n_atoms - m.labels.len();
        let r: f64 = rng.gen();
        if room >= 6 && r < 0.2 {
            ring(&mut m, &mut rng, 6, true, Some(at));
        } else if room >= 5 && r < 0.28 {
            ring(&mut m, &mut rng, 5, false, Some(at));
        } else {
            let l = chain_atom(&mut rng);
            let v = m.add_atom(l);
            let double = m.free(at) >= 2 && valence(l) >= 2 && rng.gen_bool(if l == "O" { 0.5 } else { 0.1 });
            if double {
                m.bond(at, v, "=", 2);
            } else {
                m.bond(at, v, "-", 1);
            }
        }
    }
    LabeledGraph::from_parts(m.labels, m.edges, false).expect("generated molecule is valid")
}

/// `count` molecule-like graphs of 15 to 32 atoms, reproducible from `seed`.
pub fn synthetic_molecules(count: usize, seed: u64) -> Vec<LabeledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(15..=32);
            gen_molecule_like(n, rng.gen())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    #[test]
    fn complete_when_p_is_one() {
        let g = gen_random_graph(3, 1.0, &["a"], &["-"], 7);
        assert_eq!(g.edge_count(), 3);
        assert!(g.node_labels().iter().all(|l| l.as_str() == "a"));
    }

    #[test]
    fn isolated_when_p_is_zero() {
        let g = gen_random_graph(5, 0.0, &["a", "b"], &["-"], 1);
        assert_eq!((g.node_count(), g.edge_count()), (5, 0));
    }

    #[test]
    fn seeded_generation_repeats() {
        assert_eq!(
            gen_random_multigraph(8, 0.5, &["a", "b"], &["x", "y"], 42),
            gen_random_multigraph(8, 0.5, &["a", "b"], &["x", "y"], 42)
        );
        assert_eq!(gen_molecule_like(25, 3), gen_molecule_like(25, 3));
    }

    #[test]
    fn molecules_are_connected_and_sized() {
        for seed in 0..50 {
            let g = gen_molecule_like(24, seed);
            assert!(g.node_count() >= 20 && g.node_count() <= 24, "{}", g.node_count());
            assert_eq!(connected_components(&g).len(), 1);
        }
    }
}
