use std::path::PathBuf;

use c2rtl::cfront::{compile_file, FrontendOptions};

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn corpus_typechecks() {
    let mut names: Vec<_> = std::fs::read_dir(corpus()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for p in names {
        let prog = compile_file(&p, &FrontendOptions::default()).unwrap_or_else(|e| panic!("{e}"));
        assert!(!prog.entry_candidates.is_empty(), "{}", p.display());
    }
}
