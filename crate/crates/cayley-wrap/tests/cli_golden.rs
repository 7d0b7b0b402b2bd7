//! Pins the stdout of the CLI corpus byte for byte against files in
//! `tests/golden/`. Regenerate with
//! `GOLDEN_REGEN=1 cargo test -p cayley-wrap --test cli_golden`.

mod common;

use std::path::PathBuf;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn cli_corpus_matches_golden_files() {
    let fixtures = tempfile::tempdir().unwrap();
    common::write_fixtures(fixtures.path());
    let regen = std::env::var_os("GOLDEN_REGEN").is_some();
    if regen {
        std::fs::create_dir_all(golden_dir()).unwrap();
    }
    let mut failures = Vec::new();
    for (name, args) in common::cases() {
        let (code, stdout) = common::run_case(fixtures.path(), &args);
        if code != 0 {
            failures.push(format!("{name}: exit code {code}"));
            continue;
        }
        let path = golden_dir().join(format!("{name}.txt"));
        if regen {
            std::fs::write(&path, &stdout).unwrap();
            continue;
        }
        let expected = match std::fs::read(&path) {
            Ok(e) => e,
            Err(_) => {
                failures.push(format!("{name}: missing golden file"));
                continue;
            }
        };
        if stdout != expected {
            failures.push(format!(
                "{name}: output drifted\n--- expected\n{}\n--- got\n{}",
                String::from_utf8_lossy(&expected),
                String::from_utf8_lossy(&stdout)
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
