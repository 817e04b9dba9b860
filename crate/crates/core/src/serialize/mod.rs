//! Graph to symbol-sequence serialization and its inverse.
//!
//! Edge-covering methods (`Eulerian`, `FEuler`, `Cpp`, `Fcpp`) emit an
//! alternating node/edge walk per connected component. The first visit of a
//! node emits its label; later visits emit a back-reference to its discovery
//! ordinal, which makes the output invertible even when labels repeat.
//! Node-list methods (`Bfs`, `Dfs`, `Topo`, `RandomWalk`) are kept as
//! baselines and cannot be inverted.

mod cpp;
mod emit;
mod euler;
mod inverse;
mod nodelist;
mod policy;

use std::fmt;
use std::str::FromStr;

use crate::graph::{connected_components, LabeledGraph};
use crate::stats::{FrequencyMap, Guidance};
use crate::symbol::Symbol;

pub use cpp::{cpp_tour, fcpp_weights};
pub use emit::normalize_rotation;
pub use euler::euler_circuit;
pub use inverse::deserialize;
pub use nodelist::node_list_serialize;
pub use policy::PriorityPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bfs,
    Dfs,
    Topo,
    RandomWalk { walks: u32, length: u32, seed: u64 },
    Eulerian,
    FEuler,
    Cpp,
    Fcpp,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Bfs => "bfs",
            Method::Dfs => "dfs",
            Method::Topo => "topo",
            Method::RandomWalk { .. } => "randomwalk",
            Method::Eulerian => "eulerian",
            Method::FEuler => "feuler",
            Method::Cpp => "cpp",
            Method::Fcpp => "fcpp",
        }
    }

    pub fn is_edge_covering(&self) -> bool {
        matches!(
            self,
            Method::Eulerian | Method::FEuler | Method::Cpp | Method::Fcpp
        )
    }

    /// Whether traversal choices consult the frequency map.
    pub fn is_guided(&self) -> bool {
        !matches!(
            self,
            Method::Eulerian | Method::Cpp | Method::RandomWalk { .. }
        )
    }

    pub(crate) fn is_postman(&self) -> bool {
        matches!(self, Method::Cpp | Method::Fcpp)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SerializeError;

    /// Parses a method name. `randomwalk` gets `walks = length = 1, seed = 0`;
    /// callers set the real parameters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "bfs" => Method::Bfs,
            "dfs" => Method::Dfs,
            "topo" => Method::Topo,
            "randomwalk" | "random-walk" | "rw" => Method::RandomWalk {
                walks: 1,
                length: 1,
                seed: 0,
            },
            "eulerian" | "euler" => Method::Eulerian,
            "feuler" => Method::FEuler,
            "cpp" => Method::Cpp,
            "fcpp" => Method::Fcpp,
            _ => return Err(SerializeError::UnknownMethod(s.to_string())),
        })
    }
}

/// Decreasing map applied to pattern frequency in postman edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GKind {
    /// `1 / f`
    #[default]
    Reciprocal,
    /// `1 - ln f`, which stays at least 1 on `(0, 1]`.
    NegLog,
}

impl fmt::Display for GKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GKind::Reciprocal => "reciprocal",
            GKind::NegLog => "neglog",
        })
    }
}

impl FromStr for GKind {
    type Err = SerializeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reciprocal" | "inv" => Ok(GKind::Reciprocal),
            "neglog" | "log" => Ok(GKind::NegLog),
            _ => Err(SerializeError::InvalidConfig(format!("unknown g kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Emission {
    /// Revisits emit back-references; always invertible.
    #[default]
    BackRef,
    /// Every node position emits its label. Ambiguous on repeated labels.
    LabelOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerializationConfig {
    pub method: Method,
    /// Mixing weight between unit cost and frequency cost for `Fcpp`.
    pub alpha: f64,
    pub g_kind: GKind,
    pub rotation_normalize: bool,
    pub emission: Emission,
}

impl SerializationConfig {
    pub fn new(method: Method) -> Self {
        SerializationConfig {
            method,
            alpha: 0.5,
            g_kind: GKind::Reciprocal,
            rotation_normalize: true,
            emission: Emission::BackRef,
        }
    }

    pub fn validate(&self) -> Result<(), SerializeError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SerializeError::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if let Method::RandomWalk { walks, length, .. } = self.method {
            if walks == 0 || length == 0 {
                return Err(SerializeError::InvalidConfig(
                    "random walks need count and length >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// True when `deserialize` can invert this configuration's output.
    pub fn is_reversible(&self) -> bool {
        self.method.is_edge_covering() && self.emission == Emission::BackRef
    }
}

impl Default for SerializationConfig {
    fn default() -> Self {
        SerializationConfig::new(Method::FEuler)
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SerializeError {
    #[error("unknown serialization method {0:?}")]
    UnknownMethod(String),
    #[error("invalid serialization config: {0}")]
    InvalidConfig(String),
    #[error("method {0} output is not reversible")]
    NotReversibleMethod(String),
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),
}

/// Output of a serializer: the symbol stream plus the configuration that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SerializedSequence {
    pub symbols: Vec<Symbol>,
    pub config: SerializationConfig,
    pub n_components: usize,
}

impl SerializedSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Per-component symbol runs, split at separators.
    pub fn segments(&self) -> impl Iterator<Item = &[Symbol]> {
        split_segments(&self.symbols)
    }
}

pub(crate) fn split_segments(symbols: &[Symbol]) -> impl Iterator<Item = &[Symbol]> {
    let empty = symbols.is_empty();
    symbols
        .split(|s| *s == Symbol::Separator)
        .filter(move |_| !empty)
}

/// Instrumentation collected while serializing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceStats {
    /// Decisions that fell through to node-id order between distinct nodes.
    pub fallbacks: u64,
}

/// A configured serializer with its frequency map compiled for lookups.
#[derive(Debug, Clone)]
pub struct Serializer {
    config: SerializationConfig,
    guidance: Guidance,
}

impl Serializer {
    pub fn new(config: SerializationConfig, freq: &FrequencyMap) -> Result<Self, SerializeError> {
        config.validate()?;
        Ok(Serializer {
            config,
            guidance: Guidance::new(freq),
        })
    }

    pub fn config(&self) -> &SerializationConfig {
        &self.config
    }

    pub fn guidance(&self) -> &Guidance {
        &self.guidance
    }

    pub(crate) fn policy(&self) -> PriorityPolicy<'_> {
        if self.config.method.is_guided() {
            PriorityPolicy::guided(&self.guidance)
        } else {
            PriorityPolicy::unguided()
        }
    }

    pub fn serialize(&self, g: &LabeledGraph) -> SerializedSequence {
        self.serialize_traced(g).0
    }

    pub fn serialize_traced(&self, g: &LabeledGraph) -> (SerializedSequence, TraceStats) {
        let mut trace = TraceStats::default();
        let policy = self.policy();
        if !self.config.method.is_edge_covering() {
            let seq = nodelist::serialize_nodes(g, &self.config, &policy, &mut trace);
            return (seq, trace);
        }

        let comps = connected_components(g);
        let n_components = comps.len();
        let mut segments: Vec<Vec<Symbol>> = Vec::with_capacity(comps.len());
        for comp in &comps {
            let cg = &comp.graph;
            if cg.edge_count() == 0 {
                debug_assert_eq!(cg.node_count(), 1);
                segments.push(vec![Symbol::Node(cg.node_label(0).clone())]);
                continue;
            }
            let walk = if self.config.method.is_postman() {
                let weights = if self.config.method == Method::Fcpp {
                    cpp::fcpp_weights_with(cg, &self.guidance, self.config.alpha, self.config.g_kind)
                } else {
                    vec![1.0; cg.edge_count()]
                };
                cpp::cpp_tour_traced(cg, &weights, &policy, &mut trace)
            } else {
                euler::euler_circuit_traced(cg, &policy, &mut trace)
            };
            segments.push(emit::emit_walk(
                cg,
                &walk,
                self.config.emission,
                self.config.rotation_normalize,
            ));
        }
        let symbols = join_segments(segments);
        (
            SerializedSequence {
                symbols,
                config: self.config.clone(),
                n_components,
            },
            trace,
        )
    }
}

/// Orders component segments longest first, ties lexicographic, and joins
/// them with separators.
pub(crate) fn join_segments(mut segments: Vec<Vec<Symbol>>) -> Vec<Symbol> {
    segments.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let total = segments.iter().map(Vec::len).sum::<usize>() + segments.len().saturating_sub(1);
    let mut out = Vec::with_capacity(total);
    for (i, s) in segments.into_iter().enumerate() {
        if i > 0 {
            out.push(Symbol::Separator);
        }
        out.extend(s);
    }
    out
}

/// One-shot convenience over [`Serializer`].
pub fn serialize(
    g: &LabeledGraph,
    config: &SerializationConfig,
    freq: &FrequencyMap,
) -> Result<SerializedSequence, SerializeError> {
    Ok(Serializer::new(config.clone(), freq)?.serialize(g))
}

/// A walk through a graph: `start`, then one step per traversed edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub start: usize,
    pub steps: Vec<WalkStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkStep {
    pub edge: usize,
    pub to: usize,
    pub dir: crate::symbol::EdgeDir,
    /// Traversal of an augmentation copy rather than the original edge.
    pub repeat: bool,
}

impl Walk {
    pub fn is_closed(&self) -> bool {
        self.steps.last().is_none_or(|s| s.to == self.start)
    }

    /// Node sequence `v0, v1, ..., vk`.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.to))
    }

    /// Sum of `weights[edge]` over all steps.
    pub fn weight(&self, weights: &[f64]) -> f64 {
        self.steps.iter().map(|s| weights[s.edge]).sum()
    }
}
