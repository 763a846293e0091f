use std::path::PathBuf;

use transit_core::{fixtures, io};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn every_fixture_matches_its_anchors() {
    for f in fixtures::all() {
        let exp = fixtures::expected(f).unwrap();
        let failed: Vec<_> = fixtures::check_anchors(f, &exp["oracle"])
            .into_iter()
            .filter(|c| !c.ok)
            .collect();
        assert!(failed.is_empty(), "{}: {failed:?}", f.name);
    }
}

#[test]
fn committed_corpus_is_current() {
    let dir = corpus_dir();
    for f in fixtures::all() {
        let input = std::fs::read_to_string(fixtures::input_path(&dir, f)).unwrap();
        assert_eq!(
            input,
            io::render_input(&(f.build)()),
            "{} input is stale",
            f.name
        );
        let expected = std::fs::read_to_string(fixtures::expected_path(&dir, f)).unwrap();
        assert_eq!(
            expected,
            io::render_json(&fixtures::expected(f).unwrap()),
            "{} expected output is stale",
            f.name
        );
    }
}

#[test]
fn committed_inputs_load_and_reproduce_the_oracle() {
    let dir = corpus_dir();
    for f in fixtures::all() {
        let input = io::read_json(&fixtures::input_path(&dir, f)).unwrap();
        let oracle = fixtures::oracle(&input).unwrap();
        let expected = io::read_json(&fixtures::expected_path(&dir, f)).unwrap();
        assert_eq!(io::canonicalize(&oracle), expected["oracle"], "{}", f.name);
    }
}

#[test]
fn export_round_trips() {
    let tmp = std::env::temp_dir().join(format!("transit-fixtures-{}", std::process::id()));
    let written = fixtures::export(&tmp).unwrap();
    assert_eq!(written.len(), 2 * fixtures::all().len());
    for path in &written {
        let name = path.file_name().unwrap();
        let ours = std::fs::read(path).unwrap();
        let committed = std::fs::read(corpus_dir().join(name)).unwrap();
        assert_eq!(ours, committed, "{name:?}");
    }
    std::fs::remove_dir_all(&tmp).unwrap();
}
