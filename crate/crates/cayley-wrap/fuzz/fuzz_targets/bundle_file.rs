#![no_main]

use cayley_wrap::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let cfg = Config::default();
        let _ = cayley_wrap::connection::parse_bundle(text, &cfg);
    }
});
