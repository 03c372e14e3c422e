mod common;

use std::collections::HashMap;

use c2rtl::semantics::CheckSet;
use c2rtl::symex::{execute, SsaTrace, SymexOptions};
use c2rtl::vemit::*;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn emit(name: &str, checks: CheckSet) -> (SsaTrace, VModule, BackMap) {
    let prog = load(name);
    let opts = SymexOptions { checks, ..SymexOptions::default() };
    let trace = execute(&prog, None, &opts).unwrap_or_else(|e| panic!("{name}: {e}"));
    let stem = name.trim_end_matches(".c");
    let (m, map) = emit_module(&trace, stem).unwrap_or_else(|e| panic!("{name}: {e}"));
    (trace, m, map)
}

fn every_config() -> Vec<(&'static str, CheckSet)> {
    CORPUS.iter().flat_map(|n| [(*n, CheckSet::default()), (*n, CheckSet::all())]).collect()
}

#[test]
fn render_parse_render_is_identity() {
    for (name, checks) in every_config() {
        let (_, m, _) = emit(name, checks);
        let text = render_text(&m);
        let back = parse_subset(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(back, m, "{name}");
        assert_eq!(render_text(&back), text, "{name}");
    }
}

#[test]
fn emission_lint() {
    for (name, checks) in every_config() {
        let (_, m, _) = emit(name, checks);
        let text = render_text(&m);
        assert!(!has_expression_select(&text), "{name}: part-select of an expression");
        let mut assigned = HashMap::new();
        for a in &m.assigns {
            *assigned.entry(a.lhs.as_str()).or_insert(0) += 1;
        }
        for w in m.wires.iter().map(|w| &w.name).chain(m.outputs().map(|p| &p.name)) {
            assert_eq!(assigned.get(w.as_str()), Some(&1), "{name}: {w}");
        }
        assert_eq!(assigned.values().sum::<usize>(), m.assigns.len(), "{name}");
    }
}

#[test]
fn backmap_covers_every_identifier_once() {
    for (name, checks) in every_config() {
        let (_, m, map) = emit(name, checks);
        let mut count: HashMap<&str, usize> = HashMap::new();
        for e in &map.entries {
            *count.entry(e.id.as_str()).or_default() += 1;
            assert!(e.line >= 1 && e.col >= 1, "{name}: {}", e.id);
        }
        let declared: Vec<&str> = m.ports.iter().map(|p| p.name.as_str()).chain(m.wires.iter().map(|w| w.name.as_str())).collect();
        for id in &declared {
            assert_eq!(count.get(id), Some(&1), "{name}: {id}");
        }
        assert_eq!(count.len(), declared.len(), "{name}");
        let mut used = Vec::new();
        for a in &m.assigns {
            a.rhs.idents(&mut used);
        }
        for a in &m.asserts {
            a.expr.idents(&mut used);
        }
        for id in used {
            assert!(count.contains_key(id), "{name}: {id} used but not mapped");
        }
        let json: serde_json::Value = serde_json::from_str(&emit_backmap(&map)).unwrap();
        assert_eq!(json.as_array().unwrap().len(), map.entries.len());
    }
}

#[test]
fn one_assertion_per_source_assert() {
    let (trace, m, _) = emit("fnptr_select.c", CheckSet::default());
    let mut locs: Vec<_> = trace.obligations.iter().map(|o| o.loc.clone()).collect();
    locs.sort();
    locs.dedup();
    assert_eq!(m.asserts.len(), locs.len());
    let text = render_text(&m);
    assert_eq!(text.matches("always_comb assert").count(), locs.len());
}

fn three_way(name: &str, checks: CheckSet, vectors: usize) {
    let prog = load(name);
    let (trace, m, _) = emit(name, checks);
    let reparsed = parse_subset(&render_text(&m)).unwrap();
    let cm = CompiledModule::new(&reparsed).unwrap_or_else(|e| panic!("{name}: {e}"));
    let ev = trace.evaluator();
    let groups = assert_groups(&trace);
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed ^ name.len() as u64);
    for i in 0..vectors {
        let inputs = random_inputs(&mut rng, &trace.interface);
        let tv = ev.run(&inputs).unwrap();
        let mv = cm.run(&inputs).unwrap();
        assert_eq!(mv.outputs, tv.outputs, "{name}: vector {i} {inputs:?}");
        for (g, &ok) in groups.iter().zip(&mv.asserts) {
            let bad = g.members.iter().any(|&k| tv.violated[k]);
            assert_eq!(ok, !bad, "{name}: vector {i}: assertion at {}", g.loc);
        }
        let o = run_oracle(&prog, &inputs);
        if let Err(msg) = agree(&trace, &tv, &o, SymexOptions::default().unwind, checks) {
            panic!("{name}: vector {i} {inputs:?}: {msg}");
        }
    }
}

#[test]
fn oracle_trace_and_verilog_agree() {
    for name in CORPUS {
        three_way(name, CheckSet::default(), 10_000);
    }
}

#[test]
fn oracle_trace_and_verilog_agree_under_checks() {
    for name in CORPUS {
        three_way(name, CheckSet::all(), 1_000);
    }
}
