//! Serializer and inverse properties checked against independent oracles.

mod common;

use std::collections::BTreeMap;

use common::*;
use graphtok::bpe::{bpe_decode, bpe_encode};
use graphtok::corpus::gen_random_multigraph;
use graphtok::serialize::{cpp_tour, euler_circuit, fcpp_weights, normalize_rotation, PriorityPolicy};
use graphtok::stats::count_patterns;
use graphtok::tokenizer::train;
use graphtok::verify::walk_edge_counts;
use graphtok::{
    aggregate_frequencies, build_graph, deserialize, FrequencyMap, GKind, GuidanceUnit, LabeledGraph, Method,
    Pattern, SerializationConfig, SerializedSequence, Serializer, Symbol,
};
use proptest::prelude::*;

const COVERING: [Method; 4] = [Method::Eulerian, Method::FEuler, Method::Cpp, Method::Fcpp];
const TRIGRAM: GuidanceUnit = GuidanceUnit::NodeEdgeNodeTrigram;

fn graph(labels: &[&str], edges: &[(usize, usize, &str)]) -> LabeledGraph {
    let edges: Vec<(usize, usize, String)> = edges.iter().map(|&(u, v, l)| (u, v, l.to_string())).collect();
    build_graph(labels, &edges, false).unwrap()
}

fn triangle_aab() -> LabeledGraph {
    graph(&["a", "a", "b"], &[(0, 1, "-"), (1, 2, "-"), (2, 0, "-")])
}

fn serializer(method: Method, corpus: &[LabeledGraph]) -> Serializer {
    let freq = aggregate_frequencies(corpus, TRIGRAM).unwrap_or_else(|_| FrequencyMap::empty(TRIGRAM));
    Serializer::new(SerializationConfig::new(method), &freq).unwrap()
}

fn trigram(a: &str, e: &str, b: &str) -> Pattern {
    Pattern::trigram(&a.into(), &e.into(), &b.into())
}

#[test]
fn triangle_aab_counts_and_frequencies() {
    let tri = triangle_aab();
    let counts = count_patterns(&tri, TRIGRAM).counts;
    // Hand enumeration: 3 edges in both orientations.
    let mut expect: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    for e in tri.edges() {
        let (u, v) = (tri.node_label(e.u).to_string(), tri.node_label(e.v).to_string());
        *expect.entry((u.clone(), "-".into(), v.clone())).or_default() += 1;
        *expect.entry((v, "-".into(), u)).or_default() += 1;
    }
    let got: BTreeMap<(String, String, String), u64> = counts
        .iter()
        .map(|(p, &c)| {
            let l = p.labels();
            ((l[0].to_string(), l[1].to_string(), l[2].to_string()), c)
        })
        .collect();
    assert_eq!(got, expect);
    assert_eq!(got.len(), 3);
    assert!(got.values().all(|&c| c == 2));

    let edge = graph(&["a", "b"], &[(0, 1, "x")]);
    let f = aggregate_frequencies([&tri, &edge], TRIGRAM).unwrap();
    assert_eq!(f.total(), 8);
    for (p, want) in [
        (trigram("a", "-", "a"), 2.0 / 8.0),
        (trigram("a", "-", "b"), 2.0 / 8.0),
        (trigram("b", "-", "a"), 2.0 / 8.0),
        (trigram("a", "x", "b"), 1.0 / 8.0),
        (trigram("b", "x", "a"), 1.0 / 8.0),
    ] {
        assert!((f.freq(&p) - want).abs() < 1e-12);
    }
    let reversed = aggregate_frequencies([&edge, &tri], TRIGRAM).unwrap();
    assert_eq!(reversed.iter().collect::<Vec<_>>(), f.iter().collect::<Vec<_>>());
}

#[test]
fn single_edge_feuler_symbols() {
    let g = graph(&["a", "b"], &[(0, 1, "x")]);
    let s = serializer(Method::FEuler, std::slice::from_ref(&g)).serialize(&g);
    assert_eq!(
        s.symbols,
        vec![Symbol::node("a"), Symbol::edge("x"), Symbol::node("b"), Symbol::edge("x"), Symbol::BackRef(0)]
    );
}

#[test]
fn triangle_aab_roundtrips_for_every_covering_method() {
    let tri = triangle_aab();
    for m in COVERING {
        let back = deserialize(&serializer(m, std::slice::from_ref(&tri)).serialize(&tri)).unwrap();
        assert!(oracle_isomorphic(&tri, &back), "{m:?}");
    }
}

#[test]
fn rotation_example_reanchors_backrefs() {
    let seq = SerializedSequence {
        symbols: vec![Symbol::node("b"), Symbol::edge("x"), Symbol::node("a"), Symbol::edge("x"), Symbol::BackRef(0)],
        config: SerializationConfig::new(Method::FEuler),
        n_components: 1,
    };
    let want = vec![Symbol::node("a"), Symbol::edge("x"), Symbol::node("b"), Symbol::edge("x"), Symbol::BackRef(0)];
    let once = normalize_rotation(&seq);
    assert_eq!(once.symbols, want);
    assert_eq!(normalize_rotation(&once).symbols, want);
}

/// Every Euler circuit of the doubled graph, as arc sequences `(from, edge)`,
/// starting from `start`.
fn all_euler_circuits(g: &LabeledGraph, start: usize) -> Vec<Vec<(usize, usize)>> {
    let arcs: Vec<(usize, usize, usize)> =
        g.edges().iter().enumerate().flat_map(|(i, e)| [(e.u, e.v, i), (e.v, e.u, i)]).collect();
    fn go(
        at: usize,
        start: usize,
        arcs: &[(usize, usize, usize)],
        used: &mut Vec<bool>,
        path: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if path.len() == arcs.len() {
            if at == start {
                out.push(path.clone());
            }
            return;
        }
        for (k, &(u, v, e)) in arcs.iter().enumerate() {
            if used[k] || u != at {
                continue;
            }
            used[k] = true;
            path.push((u, e));
            go(v, start, arcs, used, path, out);
            path.pop();
            used[k] = false;
        }
    }
    let mut out = Vec::new();
    go(start, start, &arcs, &mut vec![false; arcs.len()], &mut Vec::new(), &mut out);
    out
}

#[test]
fn path_circuit_is_one_of_the_brute_force_circuits() {
    let g = graph(&["a", "b", "c"], &[(0, 1, "-"), (1, 2, "-")]);
    let freq = aggregate_frequencies([&g], TRIGRAM).unwrap();
    let guidance = graphtok::stats::Guidance::new(&freq);
    for policy in [PriorityPolicy::unguided(), PriorityPolicy::guided(&guidance)] {
        let walk = euler_circuit(&g, &policy);
        assert!(walk.is_closed());
        assert_eq!(walk.steps.len(), 4);
        let nodes: Vec<usize> = walk.nodes().collect();
        let arcs: Vec<(usize, usize)> = walk.steps.iter().zip(&nodes).map(|(s, &from)| (from, s.edge)).collect();
        let all = all_euler_circuits(&g, walk.start);
        assert!(!all.is_empty());
        assert!(all.contains(&arcs), "{arcs:?} not among {all:?}");
    }
}

#[test]
fn distinct_labels_survive_permutation() {
    let g = graph(&["p", "q", "r"], &[(0, 1, "-"), (1, 2, "="), (2, 0, "-")]);
    let h = g.permute_nodes(&[2, 0, 1]);
    for m in [Method::FEuler, Method::Fcpp] {
        let s = serializer(m, std::slice::from_ref(&g));
        assert_eq!(s.serialize(&g).symbols, s.serialize(&h).symbols, "{m:?}");
    }
}

#[test]
fn cpp_examples_match_oracle() {
    let path = graph(&["a", "b", "c"], &[(0, 1, "-"), (1, 2, "-")]);
    let star = graph(&["c", "l", "l", "l"], &[(0, 1, "-"), (0, 2, "-"), (0, 3, "-")]);
    let square = graph(&["a", "b", "a", "b"], &[(0, 1, "-"), (1, 2, "-"), (2, 3, "-"), (3, 0, "-")]);
    for (g, want) in [(path, 4.0), (star, 6.0), (square, 4.0)] {
        let w = vec![1.0; g.edge_count()];
        let tour = cpp_tour(&g, &w, &PriorityPolicy::unguided());
        assert!(tour.is_closed());
        assert_eq!(tour.weight(&w), want);
        assert_eq!(oracle_cpp(&g, &w), want);
    }
}

fn cpp_graph() -> impl Strategy<Value = LabeledGraph> {
    (2usize..=7, 0.2f64..0.9, any::<u64>())
        .prop_map(|(n, p, seed)| gen_random_multigraph(n, p, &["a", "b"], &["-", "="], seed))
        .prop_filter("connected, with an edge", |g| {
            g.edge_count() > 0 && graphtok::graph::connected_components(g).len() == 1
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cpp_tour_is_optimal_and_covering(g in cpp_graph(), scale in prop::collection::vec(1u32..5, 30)) {
        let w: Vec<f64> = (0..g.edge_count()).map(|i| scale[i % scale.len()] as f64).collect();
        let tour = cpp_tour(&g, &w, &PriorityPolicy::unguided());
        prop_assert!(tour.is_closed());
        let counts = walk_edge_counts(&g, &tour).expect("walk follows edges");
        prop_assert!(counts.iter().all(|&c| c >= 1));
        prop_assert!((tour.weight(&w) - oracle_cpp(&g, &w)).abs() < 1e-9);
    }

    #[test]
    fn fcpp_with_alpha_one_costs_the_same_as_cpp(g in cpp_graph()) {
        let freq = aggregate_frequencies([&g], TRIGRAM).unwrap();
        let unit = vec![1.0; g.edge_count()];
        let w = fcpp_weights(&g, &freq, 1.0, GKind::Reciprocal);
        prop_assert!(w.iter().all(|&x| x == 1.0));
        let guidance = graphtok::stats::Guidance::new(&freq);
        let guided = cpp_tour(&g, &w, &PriorityPolicy::guided(&guidance));
        let plain = cpp_tour(&g, &unit, &PriorityPolicy::unguided());
        prop_assert_eq!(guided.weight(&unit), plain.weight(&unit));
    }

    #[test]
    fn euler_circuit_uses_each_arc_once(g in cpp_graph()) {
        let freq = aggregate_frequencies([&g], TRIGRAM).unwrap();
        let guidance = graphtok::stats::Guidance::new(&freq);
        let walk = euler_circuit(&g, &PriorityPolicy::guided(&guidance));
        prop_assert!(walk.is_closed());
        prop_assert_eq!(walk.steps.len(), 2 * g.edge_count());
        let counts = walk_edge_counts(&g, &walk).expect("walk follows edges");
        prop_assert!(counts.iter().all(|&c| c == 2));
    }

    #[test]
    fn roundtrip_is_isomorphic(
        n in 1usize..=10,
        p in 0.0f64..1.0,
        wide in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let sigma: &[&str] = if wide { &["a", "b", "c"] } else { &["a"] };
        let g = gen_random_multigraph(n, p, sigma, &["-", "="], seed);
        for m in COVERING {
            let s = serializer(m, std::slice::from_ref(&g));
            let back = deserialize(&s.serialize(&g)).unwrap();
            prop_assert!(oracle_isomorphic(&g, &back), "{:?} on {:?}", m, g);
        }
    }

    #[test]
    fn feuler_length_is_predicted(n in 1usize..=12, p in 0.0f64..0.8, seed in any::<u64>()) {
        let g = gen_random_multigraph(n, p, &["a", "b"], &["-"], seed);
        let seq = serializer(Method::FEuler, std::slice::from_ref(&g)).serialize(&g);
        let comps = graphtok::graph::connected_components(&g);
        let per: usize = comps
            .iter()
            .map(|c| if c.graph.edge_count() == 0 { 1 } else { 4 * c.graph.edge_count() + 1 })
            .sum();
        prop_assert_eq!(seq.len(), per + comps.len() - 1);
    }

    #[test]
    fn scaling_counts_leaves_output_unchanged(n in 2usize..=10, seed in any::<u64>(), factor in 2u64..50) {
        let g = gen_random_multigraph(n, 0.5, &["a", "b", "c"], &["-", "="], seed);
        let Ok(freq) = aggregate_frequencies([&g], TRIGRAM) else { return Ok(()) };
        let scaled = FrequencyMap::from_counts(
            TRIGRAM,
            freq.iter().map(|(p, c, _)| (p.clone(), c * factor)).collect(),
            false,
        );
        let cfg = SerializationConfig::new(Method::FEuler);
        let a = Serializer::new(cfg.clone(), &freq).unwrap().serialize(&g);
        let b = Serializer::new(cfg, &scaled).unwrap().serialize(&g);
        prop_assert_eq!(a.symbols, b.symbols);
    }

    #[test]
    fn pipeline_is_the_composition(seed in any::<u64>(), k in 0usize..60) {
        let corpus: Vec<LabeledGraph> =
            (0..12).map(|i| gen_random_multigraph(6, 0.4, &["a", "b"], &["-", "="], seed ^ i)).collect();
        let model = train(&corpus, k, SerializationConfig::new(Method::FEuler), TRIGRAM).unwrap();
        for g in &corpus {
            let seq = model.serializer().serialize(g);
            let composed = bpe_encode(&seq, model.codebook()).unwrap();
            let tokens = model.encode(g).unwrap();
            prop_assert_eq!(&tokens.tokens, &composed.tokens);
            let symbols = bpe_decode(&tokens, model.codebook()).unwrap();
            prop_assert_eq!(&symbols, &seq.symbols);
            let via_parts = deserialize(&SerializedSequence { symbols, ..seq }).unwrap();
            let direct = model.decode(&tokens).unwrap();
            prop_assert!(oracle_isomorphic(&via_parts, &direct));
            prop_assert!(oracle_isomorphic(g, &direct));
        }
    }
}
