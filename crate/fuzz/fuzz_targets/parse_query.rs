#![no_main]

use hullproj::io::parse_query;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(q) = parse_query(text) {
        assert!(q.dim() > 0);
        assert!(q.coords().iter().all(|v| v.is_finite()));
    }
});
