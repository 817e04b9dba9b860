//! End-to-end tokenizer: serializer plus BPE codebook.

use rayon::prelude::*;

use crate::bpe::{train_symbols, BpeError, Codebook, TokenSequence};
use crate::graph::{build_graph, LabeledGraph};
use crate::serialize::{
    deserialize, SerializationConfig, SerializeError, SerializedSequence, Serializer,
};
use crate::stats::{aggregate_frequencies, FrequencyMap, GuidanceUnit, StatsError};
use crate::symbol::{Symbol, SymbolId};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TokenizerError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("label or symbol {0} is not in the model's alphabet")]
    UnknownSymbol(String),
    #[error("token id {0} is not in the vocabulary")]
    UnknownToken(u32),
    #[error("method {0} output is not reversible")]
    NotReversibleMethod(String),
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),
    #[error("frequency map unit {found} does not match model unit {expected}")]
    UnitMismatch {
        expected: GuidanceUnit,
        found: GuidanceUnit,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid codebook: {0}")]
    Codebook(String),
}

impl From<SerializeError> for TokenizerError {
    fn from(e: SerializeError) -> Self {
        match e {
            SerializeError::NotReversibleMethod(m) => TokenizerError::NotReversibleMethod(m),
            SerializeError::MalformedSequence(m) => TokenizerError::MalformedSequence(m),
            SerializeError::UnknownMethod(m) | SerializeError::InvalidConfig(m) => {
                TokenizerError::Config(m)
            }
        }
    }
}

impl From<BpeError> for TokenizerError {
    fn from(e: BpeError) -> Self {
        match e {
            BpeError::UnknownSymbol(s) => TokenizerError::UnknownSymbol(s),
            BpeError::UnknownToken(t) => TokenizerError::UnknownToken(t),
            BpeError::InvalidCodebook(m) => TokenizerError::Codebook(m),
        }
    }
}

/// A trained tokenizer. Immutable; encode and decode are pure.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    serializer: Serializer,
    unit: GuidanceUnit,
    freq: FrequencyMap,
    codebook: Codebook,
}

/// Largest back-reference ordinal span the model must cover: the biggest
/// graph in the corpus.
fn backref_span(corpus: &[LabeledGraph]) -> u32 {
    corpus.iter().map(|g| g.node_count() as u32).max().unwrap_or(0)
}

/// Aggregates guidance statistics, serializes the corpus with them and
/// learns `k` merges.
pub fn train(
    corpus: &[LabeledGraph],
    k: usize,
    config: SerializationConfig,
    unit: GuidanceUnit,
) -> Result<TokenizerModel, TokenizerError> {
    if corpus.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }
    let freq = aggregate_frequencies(corpus, unit)?;
    let serializer = Serializer::new(config, &freq)?;
    let seqs: Vec<Vec<Symbol>> = corpus
        .par_iter()
        .map(|g| serializer.serialize(g).symbols)
        .collect();
    let codebook = train_symbols(&seqs, k, backref_span(corpus)).0;
    Ok(TokenizerModel {
        serializer,
        unit,
        freq,
        codebook,
    })
}

impl TokenizerModel {
    pub fn from_parts(
        config: SerializationConfig,
        unit: GuidanceUnit,
        freq: FrequencyMap,
        codebook: Codebook,
    ) -> Result<Self, TokenizerError> {
        if freq.unit() != unit {
            return Err(TokenizerError::UnitMismatch {
                expected: unit,
                found: freq.unit(),
            });
        }
        let serializer = Serializer::new(config, &freq)?;
        Ok(TokenizerModel {
            serializer,
            unit,
            freq,
            codebook,
        })
    }

    /// Same model keeping only the first `k` merges.
    pub fn with_merge_prefix(&self, k: usize) -> TokenizerModel {
        TokenizerModel {
            codebook: self.codebook.prefix(k),
            ..self.clone()
        }
    }

    pub fn config(&self) -> &SerializationConfig {
        self.serializer.config()
    }

    pub fn unit(&self) -> GuidanceUnit {
        self.unit
    }

    pub fn frequencies(&self) -> &FrequencyMap {
        &self.freq
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn serializer(&self) -> &Serializer {
        &self.serializer
    }

    pub fn serialize(&self, g: &LabeledGraph) -> SerializedSequence {
        self.serializer.serialize(g)
    }

    pub fn encode(&self, g: &LabeledGraph) -> Result<TokenSequence, TokenizerError> {
        let seq = self.serializer.serialize(g);
        Ok(TokenSequence::new(self.codebook.encode(&seq.symbols)?))
    }

    /// Like [`Self::encode`], but symbols outside the alphabet become the
    /// reserved unknown symbol. The flag reports whether that happened; such
    /// output no longer decodes.
    pub fn encode_lossy(&self, g: &LabeledGraph) -> (TokenSequence, bool) {
        let seq = self.serializer.serialize(g);
        let mut lossy = false;
        let ids: Vec<SymbolId> = seq
            .symbols
            .iter()
            .map(|s| {
                self.codebook.id_of(s).unwrap_or_else(|| {
                    lossy = true;
                    crate::bpe::UNKNOWN_ID
                })
            })
            .collect();
        (TokenSequence::new(self.codebook.encode_ids(&ids)), lossy)
    }

    /// Parallel [`Self::encode`]; results keep input order.
    pub fn encode_all(&self, graphs: &[LabeledGraph]) -> Vec<Result<TokenSequence, TokenizerError>> {
        graphs.par_iter().map(|g| self.encode(g)).collect()
    }

    /// Tokens back to the serialized symbol sequence.
    pub fn decode_symbols(&self, t: &TokenSequence) -> Result<SerializedSequence, TokenizerError> {
        let symbols = self.codebook.decode(&t.tokens)?;
        let n_components = if symbols.is_empty() {
            0
        } else {
            1 + symbols.iter().filter(|s| **s == Symbol::Separator).count()
        };
        Ok(SerializedSequence {
            symbols,
            config: self.config().clone(),
            n_components,
        })
    }

    pub fn decode(&self, t: &TokenSequence) -> Result<LabeledGraph, TokenizerError> {
        if !self.config().is_reversible() {
            return Err(TokenizerError::NotReversibleMethod(
                self.config().method.to_string(),
            ));
        }
        let seq = self.decode_symbols(t)?;
        Ok(deserialize(&seq)?)
    }

    /// The labeled fragment a token stands for. See [`TokenFragment`].
    pub fn token_subgraph(&self, id: SymbolId) -> Result<TokenFragment, TokenizerError> {
        let symbols: Vec<Symbol> = self
            .codebook
            .expand(id)?
            .into_iter()
            .map(|b| self.codebook.alphabet()[b.index()].clone())
            .collect();
        Ok(fragment_of(&symbols))
    }

    pub fn vocab_stats(&self) -> VocabStats {
        let mut counts = [0u64; 5];
        for i in 0..self.codebook.vocab_size() {
            let n = self
                .token_subgraph(SymbolId(i as u32))
                .map(|f| f.real_nodes)
                .unwrap_or(0);
            counts[bucket(n)] += 1;
        }
        VocabStats::from_counts(counts)
    }
}

/// Label given to a back-reference node inside a fragment.
pub fn backref_node_label(k: u32) -> String {
    format!("↩{k}")
}

/// Label of a placeholder endpoint for an edge whose node lies in a
/// neighbouring token.
pub const OPEN_ENDPOINT_LABEL: &str = "*";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dangling {
    /// Placeholder node standing in for the far end of an open edge.
    OpenEdge,
    /// The walk leaves the token at this node.
    Continuation,
}

/// A token read as a piece of a walk.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenFragment {
    pub symbols: Vec<Symbol>,
    pub graph: LabeledGraph,
    /// Nodes backed by a label or back-reference (placeholders excluded).
    pub real_nodes: usize,
    pub dangling: Vec<(usize, Dangling)>,
}

pub(crate) fn fragment_of(symbols: &[Symbol]) -> TokenFragment {
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, String)> = Vec::new();
    let mut dangling = Vec::new();
    let mut backrefs: Vec<(u32, usize)> = Vec::new();
    let mut real = 0usize;
    let mut last_node: Option<usize> = None;
    let mut pending_edge: Option<String> = None;

    for s in symbols {
        let node = match s {
            Symbol::Node(l) => {
                labels.push(l.as_str().to_string());
                real += 1;
                labels.len() - 1
            }
            Symbol::BackRef(k) => match backrefs.iter().find(|(b, _)| b == k) {
                Some(&(_, v)) => v,
                None => {
                    labels.push(backref_node_label(*k));
                    real += 1;
                    backrefs.push((*k, labels.len() - 1));
                    labels.len() - 1
                }
            },
            Symbol::Unknown => {
                labels.push("<unk>".to_string());
                labels.len() - 1
            }
            Symbol::Edge { label, .. } => {
                if last_node.is_none() {
                    labels.push(OPEN_ENDPOINT_LABEL.to_string());
                    dangling.push((labels.len() - 1, Dangling::OpenEdge));
                    last_node = Some(labels.len() - 1);
                }
                pending_edge = Some(label.as_str().to_string());
                continue;
            }
            Symbol::Separator | Symbol::Merged(..) => continue,
        };
        if let (Some(e), Some(u)) = (pending_edge.take(), last_node) {
            edges.push((u, node, e));
        }
        last_node = Some(node);
    }
    if let Some(e) = pending_edge.take() {
        labels.push(OPEN_ENDPOINT_LABEL.to_string());
        let v = labels.len() - 1;
        dangling.push((v, Dangling::OpenEdge));
        if let Some(u) = last_node {
            edges.push((u, v, e));
        }
    } else if let Some(u) = last_node {
        if !edges.is_empty() {
            dangling.push((u, Dangling::Continuation));
        }
    }
    let graph = build_graph(&labels, &edges, false).unwrap_or_else(|_| LabeledGraph::empty(false));
    TokenFragment {
        symbols: symbols.to_vec(),
        graph,
        real_nodes: real,
        dangling,
    }
}

pub const VOCAB_BUCKETS: [&str; 5] = ["0-1", "2-3", "4-6", "7-9", "10+"];

fn bucket(nodes: usize) -> usize {
    match nodes {
        0..=1 => 0,
        2..=3 => 1,
        4..=6 => 2,
        7..=9 => 3,
        _ => 4,
    }
}

/// Token-size histogram over the whole vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabStats {
    pub counts: [u64; 5],
    pub proportions: [f64; 5],
}

impl VocabStats {
    fn from_counts(counts: [u64; 5]) -> Self {
        let total: u64 = counts.iter().sum();
        let mut proportions = [0.0; 5];
        if total > 0 {
            for (p, &c) in proportions.iter_mut().zip(&counts) {
                *p = c as f64 / total as f64;
            }
        }
        VocabStats {
            counts,
            proportions,
        }
    }

    /// Index of the most populated bucket (first on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for i in 1..5 {
            if self.counts[i] > self.counts[best] {
                best = i;
            }
        }
        best
    }
}
