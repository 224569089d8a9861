//! Runs the checked-in fuzz seeds through the same checks as the fuzz targets.

use std::path::{Path, PathBuf};

use hullproj::io::{parse_csv, parse_query, parse_raw, parse_replay, replay_to_string, to_csv, to_raw};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn csv_seeds() {
    for (path, bytes) in seeds("parse_csv") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok(ds) = parse_csv(text) {
            assert_eq!(parse_csv(&to_csv(&ds)).unwrap(), ds, "{}", path.display());
        }
    }
}

#[test]
fn raw_seeds() {
    let mut accepted = 0;
    for (path, bytes) in seeds("parse_raw") {
        if let Ok(ds) = parse_raw(&bytes) {
            assert_eq!(to_raw(&ds), bytes, "{}", path.display());
            accepted += 1;
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn query_seeds() {
    for (path, bytes) in seeds("parse_query") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok(q) = parse_query(text) {
            assert!(q.coords().iter().all(|v| v.is_finite()), "{}", path.display());
        }
    }
}

#[test]
fn replay_seeds() {
    for (path, bytes) in seeds("parse_replay") {
        let Ok(text) = std::str::from_utf8(&bytes) else { continue };
        if let Ok((ds, q, seed)) = parse_replay(text) {
            let again = parse_replay(&replay_to_string(&ds, &q, seed)).unwrap();
            assert_eq!(again, (ds, q, seed), "{}", path.display());
        }
    }
}
