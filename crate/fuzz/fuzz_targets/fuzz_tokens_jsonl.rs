#![no_main]

#[path = "common.rs"]
mod common;

use graphtok::corpus::read_tokens;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let m = common::model();
    for rec in read_tokens(data).take(16) {
        let Ok(rec) = rec else { continue };
        let t = rec.to_sequence();
        if let Ok(g) = m.decode(&t) {
            let _ = m.encode(&g);
        }
    }
});
