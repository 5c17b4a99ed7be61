use std::path::{Path, PathBuf};

use mixsec::corpus::{check_expectations, load_corpus, verify, CheckKind, VerifyOptions};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn every_entry_reproduces_its_manifest() {
    for e in load_corpus(&corpus_dir()).unwrap() {
        if !e.expects_accept() {
            let err = e.compile(8).expect_err(e.name());
            assert!(err.error.is_stability(), "{}: {err}", e.name());
            continue;
        }
        let reports = verify(&e, &CheckKind::ALL, &VerifyOptions::default()).unwrap();
        let m = check_expectations(&e, &reports);
        assert!(
            m.is_empty(),
            "{}: {m:?}\n{}",
            e.name(),
            reports.iter().map(|r| r.summary()).collect::<Vec<_>>().join("\n")
        );
    }
}
