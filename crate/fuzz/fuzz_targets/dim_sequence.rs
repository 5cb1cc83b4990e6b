#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(seq) = lomlab::instance::parse_sequence(text) {
            let h = seq.horizon() as i64;
            let _ = seq.sum(0, h);
        }
    }
});
