//! Byte-pair encoding against a recount-from-scratch reference.

mod common;

use common::naive_bpe;
use graphtok::bpe::{train_symbols, train_words, Codebook};
use graphtok::Symbol;
use proptest::prelude::*;

fn words(text: &[&str]) -> Vec<Vec<Symbol>> {
    text.iter().map(|w| w.split(' ').map(Symbol::node).collect()).collect()
}

fn ids(cb: &Codebook, s: &[Symbol]) -> Vec<u32> {
    cb.encode(s).unwrap().into_iter().map(|t| t.0).collect()
}

#[test]
fn spec_examples() {
    let (cb, _) = train_symbols(&words(&["a b a b"]), 1, 0);
    let t0 = cb.base_len() as u32;
    assert_eq!(cb.k(), 1);
    assert_eq!(ids(&cb, &words(&["a b a b"])[0]), vec![t0, t0]);

    let (cb, trace) = train_symbols(&words(&["a a a a a"]), 1, 0);
    let (a, t0) = (cb.id_of(&Symbol::node("a")).unwrap().0, cb.base_len() as u32);
    assert_eq!(trace.selected_counts, vec![2]);
    assert_eq!(ids(&cb, &words(&["a a a a a"])[0]), vec![t0, t0, a]);
    assert_eq!(ids(&cb, &words(&["a a a"])[0]), vec![t0, a]);

    let (cb, _) = train_symbols(&words(&["a b a b"]), 0, 0);
    assert_eq!(cb.k(), 0);
    assert_eq!(cb.decode(&cb.encode(&words(&["b a"])[0]).unwrap()).unwrap(), words(&["b a"])[0]);
}

fn word_corpus() -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(2u32..6, 0..40), 1..25)
}

/// Disjoint left-to-right occurrence count of `pair` in `w`.
fn disjoint_count(w: &[u32], pair: (u32, u32)) -> u64 {
    let (mut i, mut n) = (0, 0);
    while i + 1 < w.len() {
        if (w[i], w[i + 1]) == pair {
            n += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    n
}

fn apply(words: &mut [Vec<u32>], pair: (u32, u32), t: u32) {
    for w in words.iter_mut() {
        let mut out = Vec::with_capacity(w.len());
        let mut i = 0;
        while i < w.len() {
            if i + 1 < w.len() && (w[i], w[i + 1]) == pair {
                out.push(t);
                i += 2;
            } else {
                out.push(w[i]);
                i += 1;
            }
        }
        *w = out;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rules_match_reference(corpus in word_corpus(), k in 0usize..30) {
        let (rules, trace) = train_words(&corpus, 6, k);
        let reference = naive_bpe(&corpus, 6, k);
        prop_assert_eq!(&rules, &reference.iter().map(|r| r.0).collect::<Vec<_>>());
        prop_assert_eq!(trace.selected_counts, reference.iter().map(|r| r.1).collect::<Vec<_>>());
    }

    #[test]
    fn residual_count_drops_below_every_selected_count(corpus in word_corpus(), k in 1usize..20) {
        let (rules, trace) = train_words(&corpus, 6, k);
        let mut w = corpus.clone();
        for (r, (&pair, &count)) in rules.iter().zip(&trace.selected_counts).enumerate() {
            apply(&mut w, pair, 6 + r as u32);
            let residual: u64 = w.iter().map(|x| disjoint_count(x, pair)).sum();
            prop_assert!(residual < count);
        }
    }

    #[test]
    fn decode_inverts_encode(corpus in word_corpus(), probe in prop::collection::vec(2u32..6, 0..60), k in 0usize..40) {
        let text: Vec<Vec<Symbol>> =
            corpus.iter().map(|w| w.iter().map(|x| Symbol::node(&x.to_string())).collect()).collect();
        let (cb, _) = train_symbols(&text, k, 0);
        let s: Vec<Symbol> = probe
            .iter()
            .map(|x| Symbol::node(&x.to_string()))
            .filter(|s| cb.id_of(s).is_some())
            .collect();
        let t = cb.encode(&s).unwrap();
        prop_assert!(t.len() <= s.len());
        prop_assert_eq!(cb.decode(&t).unwrap(), s);
    }

    #[test]
    fn longer_codebooks_never_lengthen_the_corpus(corpus in word_corpus(), k in 0usize..25) {
        let text: Vec<Vec<Symbol>> =
            corpus.iter().map(|w| w.iter().map(|x| Symbol::node(&x.to_string())).collect()).collect();
        let total = |k: usize| -> usize {
            let (cb, _) = train_symbols(&text, k, 0);
            text.iter().map(|w| cb.encode(w).unwrap().len()).sum()
        };
        prop_assert!(total(k + 1) <= total(k));
    }
}
