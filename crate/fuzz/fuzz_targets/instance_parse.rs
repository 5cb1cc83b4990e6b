#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(inst) = lomlab::instance::parse_instance(text) {
            let inst = inst.with_defaults();
            assert!(inst.validate().is_ok());
        }
    }
});
