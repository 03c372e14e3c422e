#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use c2rtl::bvir::Bits;
use c2rtl::cfront::tast::TypedProgram;
use c2rtl::cfront::{compile_file, FrontendOptions};
use c2rtl::oracle::{interpret, Outcome};
use c2rtl::semantics::{resolve_entry, CheckSet, Interface, ObligationKind, DEFAULT_FUEL};
use c2rtl::symex::{SsaTrace, TraceValues};
use c2rtl::SourceLoc;
use rand::{Rng, RngCore};

pub const CORPUS: &[&str] = &[
    "punning.c",
    "sum_loop.c",
    "struct_mix.c",
    "fnptr_select.c",
    "float_ops.c",
    "f32_add_wrapper.c",
    "f32_mul_wrapper.c",
    "mf_add_norm.c",
    "mf_add_shift.c",
    "mf_add_badround.c",
];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

pub fn load(name: &str) -> TypedProgram {
    compile_file(&corpus_path(name), &FrontendOptions::default()).unwrap_or_else(|e| panic!("{e}"))
}

pub fn random_bits(rng: &mut impl RngCore, width: u32) -> Bits {
    let mut bytes = vec![0u8; width.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    // bias towards small and boundary patterns now and then
    match rng.gen_range(0..8) {
        0 => bytes.iter_mut().for_each(|b| *b = 0),
        1 => bytes.iter_mut().for_each(|b| *b = 0xFF),
        2 => bytes.iter_mut().skip(1).for_each(|b| *b = 0),
        _ => {}
    }
    Bits::from_le_bytes(width, &bytes)
}

pub fn random_inputs(rng: &mut impl RngCore, iface: &Interface) -> HashMap<String, Bits> {
    iface.inputs.iter().map(|p| (p.name.clone(), random_bits(rng, p.width))).collect()
}

pub fn run_oracle(prog: &TypedProgram, inputs: &HashMap<String, Bits>) -> Outcome {
    let entry = resolve_entry(prog, None).unwrap();
    interpret(prog, entry, inputs, DEFAULT_FUEL).unwrap_or_else(|e| panic!("{e}"))
}

/// Obligation verdicts grouped by (kind, location): true when some
/// instance fails.
pub fn symex_failures(trace: &SsaTrace, v: &TraceValues) -> BTreeMap<(ObligationKind, SourceLoc), bool> {
    let mut m = BTreeMap::new();
    for (o, &bad) in trace.obligations.iter().zip(&v.violated) {
        *m.entry((o.kind, o.loc.clone())).or_insert(false) |= bad;
    }
    m
}

/// Whether the oracle saw a failure of the given kind at `loc`.
pub fn oracle_failed(o: &Outcome, kind: ObligationKind, loc: &SourceLoc, loop_id: Option<&str>, unwind: u32) -> bool {
    match kind {
        ObligationKind::UserAssert => o.asserts.iter().any(|a| &a.loc == loc && !a.held),
        ObligationKind::Unwinding => {
            o.loop_iterations.get(loop_id.unwrap_or_default()).is_some_and(|&n| n > unwind as u64)
        }
        k => o.violations.iter().any(|(vk, vl)| *vk == k && vl == loc),
    }
}

/// Compares outputs and every obligation group; returns a description of
/// the first disagreement.
pub fn agree(trace: &SsaTrace, v: &TraceValues, o: &Outcome, unwind: u32, checks: CheckSet) -> Result<(), String> {
    for ((name, ob), sv) in o.outputs.iter().zip(&v.outputs) {
        if ob != sv {
            return Err(format!("output {name}: oracle {} symex {}", ob.to_hex(), sv.to_hex()));
        }
    }
    let mut groups: BTreeMap<(ObligationKind, SourceLoc), (bool, Option<String>)> = BTreeMap::new();
    for (ob, &bad) in trace.obligations.iter().zip(&v.violated) {
        let e = groups.entry((ob.kind, ob.loc.clone())).or_insert((false, ob.loop_id.clone()));
        e.0 |= bad;
    }
    for ((kind, loc), (bad, loop_id)) in &groups {
        let ob = oracle_failed(o, *kind, loc, loop_id.as_deref(), unwind);
        if ob != *bad {
            return Err(format!("{kind} at {loc}: oracle failed={ob} symex failed={bad}"));
        }
    }
    // every oracle-side failure must have a matching obligation
    for a in o.asserts.iter().filter(|a| !a.held) {
        if !groups.contains_key(&(ObligationKind::UserAssert, a.loc.clone())) {
            return Err(format!("assert at {} failed in the oracle but has no obligation", a.loc));
        }
    }
    for (kind, loc) in &o.violations {
        let on = match kind {
            ObligationKind::DivByZero => checks.div,
            ObligationKind::Overshift => checks.shift,
            ObligationKind::Bounds => checks.bounds,
            ObligationKind::NullDeref => checks.null,
            _ => false,
        };
        if on && !groups.contains_key(&(*kind, loc.clone())) {
            return Err(format!("{kind} at {loc} failed in the oracle but has no obligation"));
        }
    }
    Ok(())
}
