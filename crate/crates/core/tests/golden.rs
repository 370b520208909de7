//! Golden-file checks for the bundled example: the executed target and its
//! certificate must match the committed files byte for byte.
//!
//! Regenerate with `UPDATE_GOLDENS=1 cargo test -p laddertx-core --test
//! golden` after an intentional change, and review the diff.

use std::fs;
use std::path::Path;

use laddertx_core::certificate;
use laddertx_core::dsl;
use laddertx_core::engine::execute;
use laddertx_core::uml2sql;

const S1_GOLDEN: &str = include_str!("../fixtures/golden/s1.mt");
const CERT_GOLDEN: &str = include_str!("../fixtures/golden/certificate.json");

fn generated() -> (String, String) {
    let ex = uml2sql::bundle();
    let run = execute(&ex.transformation, &ex.m1).expect("the example executes");
    assert!(run.verdict.holds);
    let s1_text = dsl::print_instance("s1", &run.target);
    let cert_text = String::from_utf8(certificate::serialize(run.certificate())).unwrap();
    (s1_text, cert_text)
}

fn maybe_update(rel_path: &str, content: &str) {
    if std::env::var_os("UPDATE_GOLDENS").is_some() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(rel_path);
        fs::write(path, content).expect("write golden");
    }
}

#[test]
fn target_matches_golden_file() {
    let (s1_text, _) = generated();
    maybe_update("fixtures/golden/s1.mt", &s1_text);
    if std::env::var_os("UPDATE_GOLDENS").is_none() {
        assert_eq!(s1_text, S1_GOLDEN);
    }
}

#[test]
fn certificate_matches_golden_file() {
    let (_, cert_text) = generated();
    maybe_update("fixtures/golden/certificate.json", &cert_text);
    if std::env::var_os("UPDATE_GOLDENS").is_none() {
        assert_eq!(cert_text, CERT_GOLDEN);
    }
}

#[test]
fn golden_target_parses_and_equals_the_expected_instance() {
    let files = vec![
        ("uml2sql.mt".to_string(), uml2sql::FIXTURE_MT.to_string()),
        ("s1.mt".to_string(), S1_GOLDEN.to_string()),
    ];
    let bundle = dsl::parse_files(&files).expect("golden target parses");
    assert_eq!(bundle.instances["s1"], uml2sql::bundle().s1);
}

#[test]
fn golden_certificate_replays_true() {
    let cert = certificate::deserialize(CERT_GOLDEN.as_bytes()).expect("golden certificate parses");
    let ex = uml2sql::bundle();
    let outcome = certificate::replay(&cert, &ex.transformation, &ex.m1, &ex.s1);
    assert!(outcome.ok, "divergence: {:?}", outcome.divergence);
}

#[test]
fn certificates_are_byte_identical_across_runs() {
    let (_, a) = generated();
    let (_, b) = generated();
    assert_eq!(a, b);
}
