#![no_main]

use libfuzzer_sys::fuzz_target;
use mazer_core::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        // Whatever parsed must also build or fail cleanly.
        let _ = cfg.mazer_config();
        let _ = cfg.sweep_spec();
    }
});
