#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // must never panic; round-trip what parses
        if let Ok(x) = cayley_wrap::algebra::parse_cd(text) {
            let again = cayley_wrap::algebra::parse_cd(&x.to_string()).unwrap();
            assert_eq!(x, again);
        }
    }
});
