mod common;

use c2rtl::semantics::CheckSet;
use c2rtl::symex::{execute, SymexOptions};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn differential(name: &str, vectors: usize, checks: CheckSet) {
    let prog = load(name);
    let opts = SymexOptions { checks, ..SymexOptions::default() };
    let trace = execute(&prog, None, &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
    trace.check_ssa().unwrap_or_else(|e| panic!("{name}: {e}"));
    let ev = trace.evaluator();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ name.len() as u64);
    for i in 0..vectors {
        let inputs = random_inputs(&mut rng, &trace.interface);
        let o = run_oracle(&prog, &inputs);
        let v = ev.run(&inputs).unwrap();
        if let Err(msg) = agree(&trace, &v, &o, opts.unwind, checks) {
            panic!("{name}: vector {i} {inputs:?}: {msg}");
        }
    }
}

#[test]
fn corpus_agrees_with_oracle() {
    for name in CORPUS {
        differential(name, 10_000, CheckSet::default());
    }
}

#[test]
fn corpus_agrees_with_oracle_under_all_checks() {
    for name in CORPUS {
        differential(name, 2_000, CheckSet::all());
    }
}
