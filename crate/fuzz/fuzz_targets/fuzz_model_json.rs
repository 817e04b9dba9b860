#![no_main]

use graphtok::corpus::{model_from_json, model_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = model_from_json(text) {
        let out = model_to_json(&m);
        let again = model_from_json(&out).expect("own output loads");
        assert_eq!(model_to_json(&again), out);
    }
});
