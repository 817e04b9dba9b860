//! Reversible graph tokenization.
//!
//! Graphs are serialized into symbol sequences by frequency-guided Eulerian
//! or Chinese-postman walks, then compressed with byte-pair encoding. Every
//! step is deterministic and the edge-covering serializers invert exactly
//! (up to isomorphism).

pub mod bpe;
pub mod corpus;
pub mod graph;
mod hash;
pub mod serialize;
pub mod stats;
pub mod symbol;
pub mod tokenizer;
pub mod verify;

pub use graph::{build_graph, Edge, GraphError, Label, LabeledGraph};
pub use serialize::{
    deserialize, Emission, GKind, Method, SerializationConfig, SerializeError, SerializedSequence,
    Serializer, TraceStats, Walk,
};
pub use stats::{aggregate_frequencies, FrequencyMap, GuidanceUnit, Pattern, StatsError};
pub use symbol::{EdgeDir, Symbol, SymbolId, SymbolKind};
