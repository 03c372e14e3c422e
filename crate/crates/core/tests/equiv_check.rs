mod common;

use std::collections::HashMap;

use c2rtl::bvir::Bits;
use c2rtl::cfront::{compile_source, FrontendOptions};
use c2rtl::equiv::*;
use c2rtl::semantics::CheckSet;
use c2rtl::symex::{execute, SsaTrace, SymexOptions};
use c2rtl::vemit::*;
use c2rtl::Code;
use common::*;

fn trace_of(src: &str, opts: &SymexOptions) -> (c2rtl::cfront::TypedProgram, SsaTrace) {
    let prog = compile_source("t.c", src, &FrontendOptions::default()).unwrap_or_else(|e| panic!("{e}"));
    let trace = execute(&prog, None, opts).unwrap_or_else(|e| panic!("{e}"));
    (prog, trace)
}

fn with_assert(cond: &str) -> String {
    format!(
        "#include <stdint.h>\n#include <assert.h>\nvoid top(void) {{\n  uint32_t x;\n  C2V_SAMPLE_INPUT(uint32_t, x);\n  assert({cond});\n  uint32_t r = x;\n  C2V_DRIVE_OUTPUT(uint32_t, r);\n}}\n"
    )
}

fn single_verdict(cond: &str) -> (Verdict, bool) {
    let opts = SymexOptions::default();
    let (prog, trace) = trace_of(&with_assert(cond), &opts);
    assert_eq!(trace.obligations.len(), 1);
    let v = check_obligations(&trace, DEFAULT_BUDGET).remove(0);
    let confirmed = match &v {
        Verdict::Fails(cex) => confirm_with_oracle(&prog, None, &trace, 0, cex, &opts).unwrap(),
        _ => false,
    };
    (v, confirmed)
}

#[test]
fn increment_has_no_fixed_point() {
    assert_eq!(single_verdict("x + 1 != x").0, Verdict::Holds);
}

#[test]
fn doubling_equals_shift() {
    assert_eq!(single_verdict("x * 2 == x << 1").0, Verdict::Holds);
}

#[test]
fn bounded_claim_fails_with_validated_cex() {
    let (v, confirmed) = single_verdict("x < 100");
    let Verdict::Fails(cex) = v else { panic!("expected a counterexample") };
    assert!(cex["x"].to_u64() >= 100);
    assert!(confirmed);
    assert!(format_cex(&cex).starts_with("x=0x"));
}

#[test]
fn dispatch_asserts_hold() {
    let prog = load("fnptr_select.c");
    let trace = execute(&prog, None, &SymexOptions::default()).unwrap();
    let verdicts = check_obligations(&trace, DEFAULT_BUDGET);
    assert!(!verdicts.is_empty());
    for (o, v) in trace.obligations.iter().zip(&verdicts) {
        assert_eq!(*v, Verdict::Holds, "{} at {}", o.kind, o.loc);
    }
}

#[test]
fn unwinding_bound_decides_sum_loop() {
    let prog = load("sum_loop.c");
    for (bound, holds) in [(4, true), (2, false)] {
        let opts = SymexOptions { unwind: bound, ..SymexOptions::default() };
        let trace = execute(&prog, None, &opts).unwrap();
        let verdicts = check_obligations(&trace, DEFAULT_BUDGET);
        assert_eq!(verdicts.len(), 1);
        match &verdicts[0] {
            Verdict::Holds => assert!(holds, "bound {bound}"),
            Verdict::Fails(cex) => {
                assert!(!holds, "bound {bound}");
                assert!(cex.is_empty());
                assert!(confirm_with_oracle(&prog, None, &trace, 0, cex, &opts).unwrap());
            }
            Verdict::Unknown => panic!("bound {bound}: unknown"),
        }
    }
}

#[test]
fn tiny_budget_gives_unknown() {
    let src = "#include <stdint.h>\n#include <assert.h>\nvoid top(void) {\n  uint32_t x, y;\n  C2V_SAMPLE_INPUT(uint32_t, x);\n  C2V_SAMPLE_INPUT(uint32_t, y);\n  assert((x + y) * (x + y) == x * x + 2 * x * y + y * y);\n  uint32_t r = x;\n  C2V_DRIVE_OUTPUT(uint32_t, r);\n}\n";
    let (_, trace) = trace_of(src, &SymexOptions::default());
    assert_eq!(check_obligations(&trace, 1), vec![Verdict::Unknown]);
}

#[test]
fn checks_find_real_division_by_zero() {
    let src = "#include <stdint.h>\nvoid top(void) {\n  uint32_t x, y;\n  C2V_SAMPLE_INPUT(uint32_t, x);\n  C2V_SAMPLE_INPUT(uint32_t, y);\n  uint32_t q = x / y;\n  C2V_DRIVE_OUTPUT(uint32_t, q);\n}\n";
    let opts = SymexOptions { checks: CheckSet::all(), ..SymexOptions::default() };
    let (prog, trace) = trace_of(src, &opts);
    let verdicts = check_obligations(&trace, DEFAULT_BUDGET);
    let i = trace.obligations.iter().position(|o| o.kind == c2rtl::semantics::ObligationKind::DivByZero).unwrap();
    let Verdict::Fails(cex) = &verdicts[i] else { panic!("division by zero not found") };
    assert!(cex["y"].is_zero());
    assert!(confirm_with_oracle(&prog, None, &trace, i, cex, &opts).unwrap());
}

fn module_of(name: &str) -> VModule {
    let prog = load(name);
    let trace = execute(&prog, None, &SymexOptions::default()).unwrap();
    emit_module(&trace, name.trim_end_matches(".c")).unwrap().0
}

#[test]
fn equivalence_is_reflexive_on_the_corpus() {
    for name in CORPUS {
        let m = module_of(name);
        assert_eq!(check_equiv(&m, &m, &[], DEFAULT_BUDGET).unwrap(), Verdict::Holds, "{name}");
    }
}

#[test]
fn flipped_constant_bit_is_caught() {
    let m = module_of("punning.c");
    let text = render_text(&m).replace("32'h003FFFFF", "32'h003FFFFE");
    let flipped = parse_subset(&text).unwrap();
    let v = check_equiv(&m, &flipped, &[], DEFAULT_BUDGET).unwrap();
    let Verdict::Fails(cex) = v else { panic!("expected a difference") };
    assert_eq!(cex["x"].to_u64() & 1, 1);
    let env: HashMap<String, Bits> = cex.into_iter().collect();
    assert_ne!(eval_module(&m, &env).unwrap().outputs, eval_module(&flipped, &env).unwrap().outputs);
}

#[test]
fn port_map_renames_and_validates() {
    let m = module_of("punning.c");
    let text = render_text(&m).replace(" x", " xin").replace("(x ", "(xin ").replace("= x ", "= xin ");
    let renamed = parse_subset(&text).unwrap();
    assert!(renamed.inputs().any(|p| p.name == "xin"), "{text}");
    let map = vec![("x".to_string(), "xin".to_string())];
    assert_eq!(check_equiv(&m, &renamed, &map, DEFAULT_BUDGET).unwrap(), Verdict::Holds);
    assert_eq!(check_equiv(&m, &renamed, &[], DEFAULT_BUDGET).unwrap_err().code, Code::PortMismatch);
    let other = module_of("mf_add_norm.c");
    assert_eq!(check_equiv(&m, &other, &[], DEFAULT_BUDGET).unwrap_err().code, Code::PortMismatch);
}

/// Independent 1-4-3 reference: exact sum in units of 2^-9, rounded to
/// the nearest representable value with ties to an even fraction.
fn mf_reference(a: u8, b: u8) -> u8 {
    fn value(x: u8) -> Option<i64> {
        let e = ((x >> 3) & 15) as i64;
        let f = (x & 7) as i64;
        if e == 15 {
            return None;
        }
        let mag = if e == 0 { f } else { (8 + f) << (e - 1) };
        Some(if x & 0x80 != 0 { -mag } else { mag })
    }
    let is_nan = |x: u8| (x >> 3) & 15 == 15 && x & 7 != 0;
    let is_inf = |x: u8| (x >> 3) & 15 == 15 && x & 7 == 0;
    if is_nan(a) || is_nan(b) {
        return 0x7C;
    }
    match (is_inf(a), is_inf(b)) {
        (true, true) => return if a == b { a } else { 0x7C },
        (true, false) => return a,
        (false, true) => return b,
        _ => {}
    }
    let (va, vb) = (value(a).unwrap(), value(b).unwrap());
    let s = va + vb;
    if s == 0 {
        return if a & b & 0x80 != 0 { 0x80 } else { 0 };
    }
    let sign = if s < 0 { 0x80 } else { 0 };
    let m = s.abs();
    let mut best: Option<(u8, i64)> = None;
    for enc in 0u8..0x78 {
        let v = value(enc).unwrap();
        let d = (v - m).abs();
        let better = match best {
            None => true,
            Some((be, bd)) => d < bd || (d == bd && enc & 1 == 0 && be & 1 == 1),
        };
        if better {
            best = Some((enc, d));
        }
    }
    let (enc, _) = best.unwrap();
    let top = value(0x77).unwrap();
    let half_ulp = (value(0x77).unwrap() - value(0x76).unwrap()) / 2;
    if m >= top + half_ulp {
        return sign | 0x78;
    }
    sign | enc
}

#[test]
fn reference_spot_checks() {
    // 1.0 + 1.0 = 2.0; 1.0 is 0x38 and 2.0 is 0x40
    assert_eq!(mf_reference(0x38, 0x38), 0x40);
    assert_eq!(mf_reference(0x38, 0xB8), 0x00);
    assert_eq!(mf_reference(0x77, 0x77), 0x78);
    assert_eq!(mf_reference(0x78, 0xF8), 0x7C);
    assert_eq!(mf_reference(0x01, 0x01), 0x02);
}

#[test]
fn mini_float_adders_are_equivalent() {
    let norm = module_of("mf_add_norm.c");
    let shift = module_of("mf_add_shift.c");
    assert_eq!(check_equiv(&norm, &shift, &[], DEFAULT_BUDGET).unwrap(), Verdict::Holds);
    assert_eq!(check_equiv(&shift, &norm, &[], DEFAULT_BUDGET).unwrap(), Verdict::Holds);
    let cn = CompiledModule::new(&norm).unwrap();
    let cs = CompiledModule::new(&shift).unwrap();
    for a in 0..=255u8 {
        for b in 0..=255u8 {
            let env: HashMap<String, Bits> =
                [("a".to_string(), Bits::from_u64(8, a as u64)), ("b".to_string(), Bits::from_u64(8, b as u64))].into();
            let want = mf_reference(a, b) as u64;
            assert_eq!(cn.run(&env).unwrap().outputs[0].to_u64(), want, "norm {a:#04x} + {b:#04x}");
            assert_eq!(cs.run(&env).unwrap().outputs[0].to_u64(), want, "shift {a:#04x} + {b:#04x}");
        }
    }
}

#[test]
fn rounding_bug_is_found_in_both_directions() {
    let norm = module_of("mf_add_norm.c");
    let bad = module_of("mf_add_badround.c");
    for (x, y) in [(&norm, &bad), (&bad, &norm)] {
        let Verdict::Fails(cex) = check_equiv(x, y, &[], DEFAULT_BUDGET).unwrap() else { panic!("bug not found") };
        let (a, b) = (cex["a"].to_u64() as u8, cex["b"].to_u64() as u8);
        let env: HashMap<String, Bits> = cex.into_iter().collect();
        assert_eq!(eval_module(&norm, &env).unwrap().outputs[0].to_u64(), mf_reference(a, b) as u64);
        assert_ne!(eval_module(&bad, &env).unwrap().outputs[0].to_u64(), mf_reference(a, b) as u64);
    }
}

#[test]
fn non_predicate_blast_is_rejected() {
    let mut pool = c2rtl::bvir::ExprPool::new();
    let x = pool.var("x", 4);
    assert_eq!(bitblast(&pool, &HashMap::new(), x).err().map(|e| e.code), Some(Code::Width));
}
