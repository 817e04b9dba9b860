#![no_main]

use graphtok::corpus::read_sequences;
use graphtok::{deserialize, Method, SerializationConfig, SerializedSequence};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for rec in read_sequences(data).take(16) {
        let Ok(rec) = rec else { continue };
        let Ok(symbols) = rec.to_symbols() else { continue };
        let seq = SerializedSequence { symbols, config: SerializationConfig::new(Method::FEuler), n_components: 0 };
        let _ = deserialize(&seq);
    }
});
