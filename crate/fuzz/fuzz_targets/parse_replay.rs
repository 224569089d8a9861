#![no_main]

use hullproj::io::{parse_replay, replay_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((ds, q, seed)) = parse_replay(text) {
        assert_eq!(ds.dims(), q.dim());
        let again = parse_replay(&replay_to_string(&ds, &q, seed)).expect("written replay parses");
        assert_eq!(again, (ds, q, seed));
    }
});
