use std::sync::OnceLock;

use graphtok::corpus::synthetic_molecules;
use graphtok::tokenizer::{train, TokenizerModel};
use graphtok::{GuidanceUnit, Method, SerializationConfig};

/// Small fixed model shared by the decoder targets.
pub fn model() -> &'static TokenizerModel {
    static M: OnceLock<TokenizerModel> = OnceLock::new();
    M.get_or_init(|| {
        let corpus = synthetic_molecules(40, 7);
        train(&corpus, 60, SerializationConfig::new(Method::FEuler), GuidanceUnit::NodeEdgeNodeTrigram).unwrap()
    })
}
