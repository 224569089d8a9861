#![no_main]

use hullproj::io::{parse_raw, to_raw};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ds) = parse_raw(data) {
        assert!(ds.as_slice().iter().all(|v| v.is_finite()));
        assert_eq!(to_raw(&ds), data);
    }
});
