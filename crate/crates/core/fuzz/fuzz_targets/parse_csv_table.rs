#![no_main]

use libfuzzer_sys::fuzz_target;
use mazer_core::table::{from_csv, to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = from_csv(text) {
        // Parsed tables may hold tokens the writer refuses; anything written
        // must read back unchanged.
        if let Ok(out) = to_csv(&table) {
            assert_eq!(from_csv(&out).expect("roundtrip"), table);
        }
    }
});
