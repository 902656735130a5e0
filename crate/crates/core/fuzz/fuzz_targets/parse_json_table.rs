#![no_main]

use libfuzzer_sys::fuzz_target;
use mazer_core::table::{from_json, to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = from_json(text) {
        if let Ok(out) = to_json(&table) {
            assert_eq!(from_json(&out).expect("roundtrip"), table);
        }
    }
});
