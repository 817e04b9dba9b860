#![no_main]

use graphtok::stats::FrequencyMap;
use graphtok::symbol::EdgeDir;
use graphtok::{deserialize, GuidanceUnit, Method, SerializationConfig, SerializedSequence, Serializer, Symbol};
use libfuzzer_sys::fuzz_target;

fn symbol(b: u8) -> Symbol {
    let dir = [EdgeDir::Undirected, EdgeDir::Forward, EdgeDir::Backward][(b as usize >> 4) % 3];
    match b & 15 {
        0 => Symbol::Separator,
        1 => Symbol::Unknown,
        2..=4 => Symbol::node(["a", "b", "c"][(b & 15) as usize - 2]),
        5..=9 => Symbol::BackRef((b >> 4) as u32 % 6),
        n => Symbol::Edge { label: ["-", "="][n as usize % 2].into(), dir, repeat: b & 0x80 != 0 },
    }
}

fuzz_target!(|data: &[u8]| {
    let symbols: Vec<Symbol> = data.iter().take(512).map(|&b| symbol(b)).collect();
    for method in [Method::FEuler, Method::Fcpp] {
        let seq = SerializedSequence { symbols: symbols.clone(), config: SerializationConfig::new(method), n_components: 0 };
        if let Ok(g) = deserialize(&seq) {
            let s = Serializer::new(
                SerializationConfig::new(method),
                &FrequencyMap::empty(GuidanceUnit::NodeEdgeNodeTrigram),
            )
            .unwrap();
            let again = deserialize(&s.serialize(&g)).expect("own output decodes");
            assert_eq!(again.edge_count(), g.edge_count());
            assert_eq!(again.node_count(), g.node_count());
        }
    }
});
