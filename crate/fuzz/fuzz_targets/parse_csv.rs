#![no_main]

use hullproj::io::{parse_csv, to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ds) = parse_csv(text) {
        assert!(ds.as_slice().iter().all(|v| v.is_finite()));
        assert_eq!(ds.as_slice().len(), ds.rows() * ds.dims());
        let again = parse_csv(&to_csv(&ds)).expect("printed CSV parses");
        assert_eq!(again, ds);
    }
});
