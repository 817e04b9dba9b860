//! Byte-pair encoding over symbol sequences.
//!
//! Separators split sequences into independent words and never take part in
//! a merge. Counting and replacement are disjoint and left to right, so a
//! run `a a a` with rule `(a, a)` becomes `T a`.

mod train;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rustc_hash::FxHashMap;

use crate::serialize::SerializedSequence;
use crate::symbol::{Symbol, SymbolId};

pub use train::{bpe_train, train_symbols, train_words, TrainTrace};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BpeError {
    #[error("symbol {0} is not in the base alphabet")]
    UnknownSymbol(String),
    #[error("token id {0} is not in the vocabulary")]
    UnknownToken(u32),
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: SymbolId,
    pub right: SymbolId,
    pub result: SymbolId,
    pub rank: u32,
}

/// Token ids for one graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub tokens: Vec<SymbolId>,
    pub source_id: Option<String>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<SymbolId>) -> Self {
        TokenSequence {
            tokens,
            source_id: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Base alphabet plus ordered merge rules.
///
/// Ids `0..base_len` are base symbols in canonical order (separator first),
/// id `base_len + r` is the result of rule `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    alphabet: Vec<Symbol>,
    index: HashMap<Symbol, SymbolId>,
    merges: Vec<MergeRule>,
    rule_of: FxHashMap<u64, u32>,
}

fn pair_key(a: u32, b: u32) -> u64 {
    (a as u64) << 32 | b as u64
}

pub const SEPARATOR_ID: SymbolId = SymbolId(0);
pub const UNKNOWN_ID: SymbolId = SymbolId(1);

/// Canonical base alphabet: separator, unknown, then the sorted distinct
/// symbols of `symbols`, with back-references `0..backref_span` always present.
pub fn canonical_alphabet<'a>(
    symbols: impl IntoIterator<Item = &'a Symbol>,
    backref_span: u32,
) -> Vec<Symbol> {
    let mut set: Vec<Symbol> = symbols
        .into_iter()
        .filter(|s| s.is_base() && !matches!(s, Symbol::Separator | Symbol::Unknown))
        .cloned()
        .collect();
    set.extend((0..backref_span).map(Symbol::BackRef));
    set.sort_unstable();
    set.dedup();
    let mut out = Vec::with_capacity(set.len() + 2);
    out.push(Symbol::Separator);
    out.push(Symbol::Unknown);
    out.extend(set);
    out
}

impl Codebook {
    /// Builds a codebook from an alphabet in canonical order and merge pairs
    /// listed by rank.
    pub fn new(alphabet: Vec<Symbol>, pairs: &[(SymbolId, SymbolId)]) -> Result<Self, BpeError> {
        if alphabet.first() != Some(&Symbol::Separator) || alphabet.get(1) != Some(&Symbol::Unknown) {
            return Err(BpeError::InvalidCodebook(
                "alphabet must start with separator and unknown".into(),
            ));
        }
        if alphabet[2..].windows(2).any(|w| w[0] >= w[1]) {
            return Err(BpeError::InvalidCodebook("alphabet is not sorted and distinct".into()));
        }
        if let Some(s) = alphabet[2..].iter().find(|s| !s.is_base() || **s == Symbol::Separator || **s == Symbol::Unknown) {
            return Err(BpeError::InvalidCodebook(format!("{s} cannot be a base symbol")));
        }
        let base = alphabet.len() as u32;
        let index = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), SymbolId(i as u32)))
            .collect();
        let mut cb = Codebook {
            alphabet,
            index,
            merges: Vec::with_capacity(pairs.len()),
            rule_of: FxHashMap::default(),
        };
        for (r, &(left, right)) in pairs.iter().enumerate() {
            let limit = base + r as u32;
            for id in [left, right] {
                if id.0 >= limit {
                    return Err(BpeError::InvalidCodebook(format!(
                        "rule {r} refers to id {id} not defined before it"
                    )));
                }
                if id == SEPARATOR_ID {
                    return Err(BpeError::InvalidCodebook(format!("rule {r} merges a separator")));
                }
            }
            if cb.rule_of.insert(pair_key(left.0, right.0), r as u32).is_some() {
                return Err(BpeError::InvalidCodebook(format!("rule {r} repeats a pair")));
            }
            cb.merges.push(MergeRule {
                left,
                right,
                result: SymbolId(limit),
                rank: r as u32,
            });
        }
        Ok(cb)
    }

    /// The codebook made of the first `k` rules only. Greedy training makes
    /// this the codebook a `k`-merge run would have learned.
    pub fn prefix(&self, k: usize) -> Codebook {
        let pairs: Vec<(SymbolId, SymbolId)> = self
            .merges
            .iter()
            .take(k)
            .map(|r| (r.left, r.right))
            .collect();
        Codebook::new(self.alphabet.clone(), &pairs).expect("prefix of a valid codebook")
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn base_len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// Number of merge rules (K).
    pub fn k(&self) -> usize {
        self.merges.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.alphabet.len() + self.merges.len()
    }

    pub fn id_of(&self, s: &Symbol) -> Option<SymbolId> {
        self.index.get(s).copied()
    }

    /// The symbol behind an id; merged ids resolve to [`Symbol::Merged`].
    pub fn symbol(&self, id: SymbolId) -> Option<Symbol> {
        let i = id.index();
        if i < self.alphabet.len() {
            return Some(self.alphabet[i].clone());
        }
        self.merges
            .get(i - self.alphabet.len())
            .map(|m| Symbol::Merged(m.left, m.right))
    }

    /// Base ids a token stands for, in order.
    pub fn expand(&self, id: SymbolId) -> Result<Vec<SymbolId>, BpeError> {
        let mut out = Vec::new();
        self.expand_into(id, &mut out)?;
        Ok(out)
    }

    fn expand_into(&self, id: SymbolId, out: &mut Vec<SymbolId>) -> Result<(), BpeError> {
        let base = self.alphabet.len() as u32;
        if id.0 >= base + self.merges.len() as u32 {
            return Err(BpeError::UnknownToken(id.0));
        }
        let mut stack = vec![id];
        while let Some(t) = stack.pop() {
            if t.0 < base {
                out.push(t);
            } else {
                let m = &self.merges[(t.0 - base) as usize];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        Ok(())
    }

    pub fn symbols_to_ids(&self, symbols: &[Symbol]) -> Result<Vec<SymbolId>, BpeError> {
        symbols
            .iter()
            .map(|s| {
                self.id_of(s)
                    .ok_or_else(|| BpeError::UnknownSymbol(s.to_string()))
            })
            .collect()
    }

    /// Applies the rules in rank order, each replacing disjoint occurrences
    /// left to right. Implemented with a min-heap of `(rank, position)`:
    /// a merge only creates pairs that involve its result, whose ranks are
    /// higher, so heap order reproduces the rank-by-rank passes exactly.
    pub fn encode_ids(&self, ids: &[SymbolId]) -> Vec<SymbolId> {
        if self.merges.is_empty() || ids.len() < 2 {
            return ids.to_vec();
        }
        const NIL: u32 = u32::MAX;
        let n = ids.len();
        // Dead positions get `NIL` as their symbol.
        let mut sym: Vec<u32> = ids.iter().map(|s| s.0).collect();
        let mut next: Vec<u32> = (1..=n as u32).collect();
        next[n - 1] = NIL;
        let mut prev: Vec<u32> = (0..n as u32).map(|i| i.wrapping_sub(1)).collect();
        let base = self.alphabet.len() as u32;
        let rank = |a: u32, b: u32| self.rule_of.get(&pair_key(a, b)).copied();

        let init: Vec<Reverse<u64>> = sym
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| rank(w[0], w[1]).map(|r| Reverse((r as u64) << 32 | i as u64)))
            .collect();
        let mut heap = BinaryHeap::from(init);
        while let Some(Reverse(key)) = heap.pop() {
            let r = (key >> 32) as u32;
            let i = (key & 0xffff_ffff) as usize;
            let j = next[i];
            if sym[i] == NIL || j == NIL || rank(sym[i], sym[j as usize]) != Some(r) {
                continue;
            }
            let j = j as usize;
            let t = base + r;
            sym[i] = t;
            sym[j] = NIL;
            let k = next[j];
            next[i] = k;
            if k != NIL {
                prev[k as usize] = i as u32;
                if let Some(r2) = rank(t, sym[k as usize]) {
                    heap.push(Reverse((r2 as u64) << 32 | i as u64));
                }
            }
            let p = prev[i];
            if p != NIL {
                if let Some(r2) = rank(sym[p as usize], t) {
                    heap.push(Reverse((r2 as u64) << 32 | p as u64));
                }
            }
        }
        sym.retain(|&s| s != NIL);
        sym.into_iter().map(SymbolId).collect()
    }

    /// Encodes a symbol sequence; fails on symbols outside the base alphabet.
    pub fn encode(&self, symbols: &[Symbol]) -> Result<Vec<SymbolId>, BpeError> {
        let ids = self.symbols_to_ids(symbols)?;
        Ok(self.encode_ids(&ids))
    }

    pub fn decode_ids(&self, tokens: &[SymbolId]) -> Result<Vec<SymbolId>, BpeError> {
        let mut out = Vec::with_capacity(tokens.len() * 2);
        for &t in tokens {
            self.expand_into(t, &mut out)?;
        }
        Ok(out)
    }

    pub fn decode(&self, tokens: &[SymbolId]) -> Result<Vec<Symbol>, BpeError> {
        Ok(self
            .decode_ids(tokens)?
            .into_iter()
            .map(|id| self.alphabet[id.index()].clone())
            .collect())
    }
}

pub fn bpe_encode(s: &SerializedSequence, cb: &Codebook) -> Result<TokenSequence, BpeError> {
    Ok(TokenSequence::new(cb.encode(&s.symbols)?))
}

/// Expands tokens back to base symbols.
pub fn bpe_decode(t: &TokenSequence, cb: &Codebook) -> Result<Vec<Symbol>, BpeError> {
    cb.decode(&t.tokens)
}
