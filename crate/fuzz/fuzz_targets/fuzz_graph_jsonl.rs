#![no_main]

use graphtok::corpus::read_graphs;
use graphtok::stats::FrequencyMap;
use graphtok::verify::is_isomorphic;
use graphtok::{deserialize, GuidanceUnit, Method, SerializationConfig, Serializer};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let serializer = Serializer::new(
        SerializationConfig::new(Method::FEuler),
        &FrequencyMap::empty(GuidanceUnit::NodeEdgeNodeTrigram),
    )
    .unwrap();
    for rec in read_graphs(data).take(16) {
        let Ok(rec) = rec else { continue };
        let g = rec.graph;
        if g.node_count() > 64 || g.edge_count() > 256 {
            continue;
        }
        let back = deserialize(&serializer.serialize(&g)).expect("own output decodes");
        if g.node_count() <= 8 {
            assert!(is_isomorphic(&g, &back).unwrap());
        } else {
            assert_eq!(g.edge_count(), back.edge_count());
        }
    }
});
