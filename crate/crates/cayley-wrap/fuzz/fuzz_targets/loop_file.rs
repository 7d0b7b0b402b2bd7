#![no_main]

use cayley_wrap::Config;
use libfuzzer_sys::fuzz_target;

const BUNDLE: &str = "level: 0\ndim: 2\n[cover]\nmain; 1,0\nother; 0,1\n[connection]\nmain; analytic; zero\nother; analytic; zero\n";

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let cfg = Config::default();
        let bundle = cayley_wrap::connection::parse_bundle(BUNDLE, &cfg).unwrap();
        let _ = cayley_wrap::connection::parse_loop(text, &bundle);
    }
});
