#![no_main]

#[path = "common.rs"]
mod common;

use graphtok::symbol::SymbolId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let cb = common::model().codebook();
    let tokens: Vec<SymbolId> = data
        .chunks(2)
        .map(|c| SymbolId(u16::from_le_bytes([c[0], *c.get(1).unwrap_or(&0)]) as u32 % (cb.vocab_size() as u32 + 8)))
        .collect();
    if let Ok(symbols) = cb.decode(&tokens) {
        let re = cb.encode(&symbols).expect("decoded symbols are in the alphabet");
        assert_eq!(cb.decode(&re).unwrap(), symbols);
    }
});
