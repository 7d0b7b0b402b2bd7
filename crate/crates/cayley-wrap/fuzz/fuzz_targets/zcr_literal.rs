#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(z) = cayley_wrap::twisted::parse_zcr(text) {
            let again = cayley_wrap::twisted::parse_zcr(&z.to_string()).unwrap();
            let _ = again;
        }
    }
});
