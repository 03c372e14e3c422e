mod common;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use c2rtl::bvir::{Bits, ExprId, ExprPool, Op};
use c2rtl::cfront::tast::FIRST_FUNCTION_CODE;
use c2rtl::cfront::{compile_source, FrontendOptions, TypedProgram};
use c2rtl::equiv::{check_equiv, check_obligations, Verdict, DEFAULT_BUDGET};
use c2rtl::semantics::{CheckSet, ObligationKind};
use c2rtl::symex::{execute, SsaTrace, SymexOptions};
use c2rtl::vemit::emit_module;
use c2rtl::Code;
use common::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn compile(src: &str) -> TypedProgram {
    compile_source("t.c", src, &FrontendOptions::default()).unwrap_or_else(|e| panic!("{e}"))
}

fn trace(prog: &TypedProgram, opts: &SymexOptions) -> SsaTrace {
    execute(prog, None, opts).unwrap_or_else(|e| panic!("{e}"))
}

fn configs() -> Vec<SymexOptions> {
    vec![
        SymexOptions::default(),
        SymexOptions { checks: CheckSet::all(), ..SymexOptions::default() },
        SymexOptions { unwind: 2, unwinding_assertions: false, ..SymexOptions::default() },
    ]
}

fn free_vars(pool: &ExprPool, root: ExprId, out: &mut HashSet<Arc<str>>) {
    let mut stack = vec![root];
    let mut seen = HashSet::new();
    while let Some(e) = stack.pop() {
        if !seen.insert(e) {
            continue;
        }
        if let Op::Var(n) = pool.op(e) {
            out.insert(n.clone());
        }
        stack.extend(pool.op(e).children());
    }
}

/// Each name is defined once, and every right-hand side only mentions
/// inputs and names defined earlier.
fn assert_ssa(name: &str, t: &SsaTrace) {
    let mut known: HashSet<Arc<str>> = t.interface.inputs.iter().map(|p| Arc::from(p.name.as_str())).collect();
    for eq in &t.equations {
        let mut used = HashSet::new();
        free_vars(&t.pool, eq.rhs, &mut used);
        for u in &used {
            assert!(known.contains(u), "{name}: {} uses {u} before its definition", eq.name);
        }
        assert!(known.insert(eq.name.clone()), "{name}: {} defined twice", eq.name);
    }
    let mut roots: Vec<ExprId> = t.outputs.clone();
    roots.extend(t.obligations.iter().flat_map(|o| [o.guard, o.claim]));
    for r in roots {
        let mut used = HashSet::new();
        free_vars(&t.pool, r, &mut used);
        assert!(used.iter().all(|u| known.contains(u)), "{name}: output or obligation uses an undefined name");
    }
    t.check_ssa().unwrap_or_else(|e| panic!("{name}: {e}"));
}

#[test]
fn traces_are_single_assignment() {
    for name in CORPUS {
        let prog = load(name);
        for opts in configs() {
            let t = trace(&prog, &opts);
            assert_ssa(name, &t);
            assert_ssa(name, &t.slice());
        }
    }
}

#[test]
fn execution_is_deterministic() {
    for name in CORPUS {
        let prog = load(name);
        for opts in configs() {
            let (a, b) = (trace(&prog, &opts), trace(&prog, &opts));
            assert_eq!(a.interface, b.interface, "{name}");
            assert_eq!(a.dump(), b.dump(), "{name}");
        }
        assert_eq!(trace(&load(name), &SymexOptions::default()).dump(), trace(&prog, &SymexOptions::default()).dump());
    }
}

#[test]
fn slicing_is_idempotent_and_preserves_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in CORPUS {
        let prog = load(name);
        for opts in configs() {
            let t = trace(&prog, &opts);
            let s = t.slice();
            assert_eq!(s.slice().dump(), s.dump(), "{name}");
            assert!(s.equations.len() <= t.equations.len());
            let order: Vec<&Arc<str>> = t.equations.iter().map(|e| &e.name).collect();
            let mut last = 0;
            for eq in &s.equations {
                let at = order.iter().position(|n| **n == eq.name).expect("survivor exists in the original");
                assert!(at >= last, "{name}: slice reorders equations");
                last = at;
            }
            let (ev_t, ev_s) = (t.evaluator(), s.evaluator());
            for _ in 0..200 {
                let env = random_inputs(&mut rng, &t.interface);
                let (a, b) = (ev_t.run(&env).unwrap(), ev_s.run(&env).unwrap());
                assert_eq!(a.outputs, b.outputs, "{name}");
                assert_eq!(a.violated, b.violated, "{name}");
            }
        }
    }
}

#[test]
fn dead_temporaries_are_sliced_away() {
    let src = "#include <stdint.h>\nvoid top(void) {\n  uint32_t x;\n  C2V_SAMPLE_INPUT(uint32_t, x);\n  uint32_t unused = x * x + 7;\n  uint32_t r = 5;\n  C2V_DRIVE_OUTPUT(uint32_t, r);\n}\n";
    let s = trace(&compile(src), &SymexOptions::default()).slice();
    let mut used = HashSet::new();
    for eq in &s.equations {
        free_vars(&s.pool, eq.rhs, &mut used);
    }
    assert!(!used.contains("x"), "{}", s.dump());
    assert_eq!(s.eval(&[("x".to_string(), Bits::from_u64(32, 9))].into()).unwrap().outputs[0].to_u64(), 5);
}

fn definition(t: &SsaTrace, e: ExprId) -> ExprId {
    match t.pool.op(e) {
        Op::Var(n) => t.equations.iter().find(|q| &q.name == n).map(|q| definition(t, q.rhs)).unwrap_or(e),
        _ => e,
    }
}

#[test]
fn sum_loop_folds_to_a_constant() {
    let t = trace(&load("sum_loop.c"), &SymexOptions { unwind: 4, ..SymexOptions::default() }).slice();
    let out = definition(&t, t.output("s").unwrap());
    assert_eq!(t.pool.op(out), &Op::Const(Bits::from_u64(32, 6)), "{}", t.dump());
}

#[test]
fn short_unwinding_yields_a_falsifiable_obligation() {
    let t = trace(&load("sum_loop.c"), &SymexOptions { unwind: 2, ..SymexOptions::default() });
    let i = t.obligations.iter().position(|o| o.kind == ObligationKind::Unwinding).unwrap();
    assert!(matches!(check_obligations(&t, DEFAULT_BUDGET)[i], Verdict::Fails(_)));
    let off = trace(&load("sum_loop.c"), &SymexOptions { unwind: 2, unwinding_assertions: false, ..SymexOptions::default() });
    assert!(off.obligations.iter().all(|o| o.kind != ObligationKind::Unwinding));
}

#[test]
fn extra_unwinding_does_not_change_outputs() {
    for name in CORPUS {
        let prog = load(name);
        let base = SymexOptions::default();
        let t = trace(&prog, &base);
        let unwinding_holds = t
            .obligations
            .iter()
            .zip(check_obligations(&t, DEFAULT_BUDGET))
            .filter(|(o, _)| o.kind == ObligationKind::Unwinding)
            .all(|(_, v)| v == Verdict::Holds);
        assert!(unwinding_holds, "{name}: default bound too small for the corpus");
        let more = trace(&prog, &SymexOptions { unwind: base.unwind + 1, ..base.clone() });
        let (a, _) = emit_module(&t.slice(), "a").unwrap();
        let (b, _) = emit_module(&more.slice(), "b").unwrap();
        assert_eq!(check_equiv(&a, &b, &[], DEFAULT_BUDGET).unwrap(), Verdict::Holds, "{name}");
    }
}

#[test]
fn wrapper_interface_follows_the_macros() {
    let t = trace(&load("f32_add_wrapper.c"), &SymexOptions::default());
    let ports = |ps: &[c2rtl::semantics::Port]| ps.iter().map(|p| (p.name.clone(), p.width)).collect::<Vec<_>>();
    assert_eq!(ports(&t.interface.inputs), [("x".to_string(), 32), ("y".to_string(), 32)]);
    assert_eq!(ports(&t.interface.outputs), [("res".to_string(), 32)]);
    let fp = trace(&load("fnptr_select.c"), &SymexOptions::default());
    assert_eq!(ports(&fp.interface.inputs), [("sel".to_string(), 8), ("block".to_string(), 256)]);
}

const ROUND_TRIP: &str = "#include <stdint.h>
#include <assert.h>
void top(void) {
  uint32_t v;
  float x;
  C2V_SAMPLE_INPUT(uint32_t, v);
  uint32_t *p = (uint32_t *)&x;
  *p = v;
  float y = x;
  uint8_t *b = (uint8_t *)&y;
  uint32_t back = b[0] | (b[1] << 8) | (b[2] << 16) | ((uint32_t)b[3] << 24);
  assert(back == v);
  C2V_DRIVE_OUTPUT(uint32_t, back);
}
";

#[test]
fn punning_round_trip_is_the_identity() {
    let prog = compile(ROUND_TRIP);
    let t = trace(&prog, &SymexOptions::default()).slice();
    let ev = t.evaluator();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let patterns = (0..1u64 << 16).chain((0..100_000).map(|_| rng.next_u32() as u64));
    for v in patterns {
        let env: HashMap<String, Bits> = [("v".to_string(), Bits::from_u64(32, v))].into();
        assert_eq!(ev.run(&env).unwrap().outputs[0].to_u64(), v, "{v:#x}");
        if v % 97 == 0 {
            assert_eq!(run_oracle(&prog, &env).outputs[0].1.to_u64(), v, "{v:#x}");
        }
    }
    assert_eq!(check_obligations(&t, DEFAULT_BUDGET), vec![Verdict::Holds]);
}

#[test]
fn pointer_case_split_selects_the_right_object() {
    let src = "#include <stdint.h>
void top(void) {
  uint16_t a, b;
  uint8_t c;
  C2V_SAMPLE_INPUT(uint16_t, a);
  C2V_SAMPLE_INPUT(uint16_t, b);
  C2V_SAMPLE_INPUT(uint8_t, c);
  uint16_t *p = c ? &a : &b;
  *p = *p + 1;
  uint32_t r = ((uint32_t)a << 16) | b;
  C2V_DRIVE_OUTPUT(uint32_t, r);
}
";
    let prog = compile(src);
    let t = trace(&prog, &SymexOptions { checks: CheckSet::all(), ..SymexOptions::default() });
    assert!(check_obligations(&t, DEFAULT_BUDGET).iter().all(|v| *v == Verdict::Holds));
    let ev = t.evaluator();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let (a, b, c) = (rng.next_u32() as u16, rng.next_u32() as u16, (rng.next_u32() % 3) as u8);
        let want = if c != 0 { ((a.wrapping_add(1) as u32) << 16) | b as u32 } else { ((a as u32) << 16) | b.wrapping_add(1) as u32 };
        let env: HashMap<String, Bits> = [
            ("a".to_string(), Bits::from_u64(16, a as u64)),
            ("b".to_string(), Bits::from_u64(16, b as u64)),
            ("c".to_string(), Bits::from_u64(8, c as u64)),
        ]
        .into();
        assert_eq!(ev.run(&env).unwrap().outputs[0].to_u64(), want as u64);
    }
}

#[test]
fn function_codes_and_dispatch() {
    let src = "#include <stdint.h>
typedef uint32_t (*op_fn)(uint32_t);
static uint32_t inc(uint32_t v) { return v + 1; }
static uint32_t dbl(uint32_t v) { return v * 2; }
void top(void) {
  uint8_t s;
  uint32_t x;
  C2V_SAMPLE_INPUT(uint8_t, s);
  C2V_SAMPLE_INPUT(uint32_t, x);
  op_fn f = (s & 1) ? inc : dbl;
  uint32_t r = f(x);
  uint64_t code_inc = (uint64_t)inc;
  uint64_t code_dbl = (uint64_t)dbl;
  C2V_DRIVE_OUTPUT(uint32_t, r);
  C2V_DRIVE_OUTPUT(uint64_t, code_inc);
  C2V_DRIVE_OUTPUT(uint64_t, code_dbl);
}
";
    let prog = compile(src);
    let t = trace(&prog, &SymexOptions::default());
    for (s, x) in [(0u64, 10u64), (1, 10), (3, 0xFFFF_FFFF)] {
        let env: HashMap<String, Bits> =
            [("s".to_string(), Bits::from_u64(8, s)), ("x".to_string(), Bits::from_u64(32, x))].into();
        let v = t.eval(&env).unwrap();
        let want = if s & 1 == 1 { x.wrapping_add(1) } else { x.wrapping_mul(2) } & 0xFFFF_FFFF;
        assert_eq!(v.outputs[0].to_u64(), want);
        let (ci, cd) = (v.outputs[1].to_u64(), v.outputs[2].to_u64());
        assert!(ci >= FIRST_FUNCTION_CODE && cd >= FIRST_FUNCTION_CODE && ci != cd && ci < cd);
        assert_eq!(run_oracle(&prog, &env).outputs.iter().map(|o| o.1).collect::<Vec<_>>(), v.outputs);
    }

    let single = "#include <stdint.h>
typedef uint32_t (*op_fn)(uint32_t);
static uint32_t inc(uint32_t v) { return v + 1; }
void top(void) {
  uint32_t x;
  C2V_SAMPLE_INPUT(uint32_t, x);
  op_fn f = inc;
  uint32_t r = f(x);
  C2V_DRIVE_OUTPUT(uint32_t, r);
}
";
    let t = trace(&compile(single), &SymexOptions::default()).slice();
    let mut ites = 0;
    for eq in &t.equations {
        let mut stack = vec![eq.rhs];
        while let Some(e) = stack.pop() {
            ites += matches!(t.pool.op(e), Op::Ite(..)) as usize;
            stack.extend(t.pool.op(e).children());
        }
    }
    assert_eq!(ites, 0, "{}", t.dump());

    let none = "#include <stdint.h>
typedef uint32_t (*op_fn)(uint32_t);
typedef uint16_t (*narrow_fn)(uint16_t);
static uint16_t half(uint16_t v) { return v >> 1; }
void top(void) {
  uint32_t x;
  C2V_SAMPLE_INPUT(uint32_t, x);
  narrow_fn g = half;
  op_fn f = (op_fn)(uint64_t)x;
  uint32_t r = f(x) + g(1);
  C2V_DRIVE_OUTPUT(uint32_t, r);
}
";
    assert_eq!(execute(&compile(none), None, &SymexOptions::default()).unwrap_err().code, Code::NoCandidates);
}

#[test]
fn quiet_nan_absorbs_every_addend() {
    let src = "#include <SoftFloat.h>
#include <assert.h>
void top(void) {
  uint32_t y;
  C2V_SAMPLE_INPUT(uint32_t, y);
  float32_t a, b, r;
  a.v = 0x7FC00000;
  b.v = y;
  r = f32_add(a, b);
  assert(r.v == 0x7FC00000);
  uint32_t res = r.v;
  C2V_DRIVE_OUTPUT(uint32_t, res);
}
";
    let t = trace(&compile(src), &SymexOptions::default());
    assert_eq!(check_obligations(&t, DEFAULT_BUDGET), vec![Verdict::Holds]);
}

#[test]
fn double_arithmetic_is_rejected() {
    let src = "#include <stdint.h>
void top(void) {
  uint32_t x;
  C2V_SAMPLE_INPUT(uint32_t, x);
  double d = x;
  d = d * 2.5;
  uint32_t r = d;
  C2V_DRIVE_OUTPUT(uint32_t, r);
}
";
    let err = compile_source("t.c", src, &FrontendOptions::default())
        .and_then(|p| execute(&p, None, &SymexOptions::default()).map(|_| ()))
        .unwrap_err();
    assert_eq!(err.code, Code::UnsupportedFloat);
}
