#![no_main]

use cayley_wrap::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let cfg = Config::default();
        if let Ok(w) = cayley_wrap::bar::parse_word(text, &cfg) {
            // parse output is normalized, so printing and reparsing is stable
            let again = cayley_wrap::bar::parse_word(&w.to_string(), &cfg).unwrap();
            assert_eq!(w.dist(&again), 0.0);
        }
    }
});
