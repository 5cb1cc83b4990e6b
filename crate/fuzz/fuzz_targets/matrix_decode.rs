#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = lomlab::instance::parse_matrix(text) {
            assert!(m.row_major().iter().all(|x| x.is_finite()));
        }
    }
});
