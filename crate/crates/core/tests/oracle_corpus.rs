use std::collections::HashMap;
use std::path::PathBuf;

use c2rtl::bvir::Bits;
use c2rtl::cfront::tast::TypedProgram;
use c2rtl::cfront::{compile_file, FrontendOptions};
use c2rtl::oracle::{interpret, Outcome};
use c2rtl::semantics::{resolve_entry, DEFAULT_FUEL};
use c2rtl::Code;

fn load(name: &str) -> TypedProgram {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    compile_file(&p, &FrontendOptions::default()).unwrap_or_else(|e| panic!("{e}"))
}

fn run(prog: &TypedProgram, inputs: &[(&str, u32, u64)]) -> Outcome {
    let entry = resolve_entry(prog, None).unwrap();
    let env: HashMap<String, Bits> =
        inputs.iter().map(|(n, w, v)| (n.to_string(), Bits::from_u64(*w, *v))).collect();
    interpret(prog, entry, &env, DEFAULT_FUEL).unwrap_or_else(|e| panic!("{e}"))
}

fn out(o: &Outcome, name: &str) -> u64 {
    o.output(name).unwrap().to_u64()
}

#[test]
fn punning_masks_low_bits() {
    let p = load("punning.c");
    assert_eq!(out(&run(&p, &[("x", 32, 0x40490FDB)]), "res"), 0x00090FDB);
}

#[test]
fn f32_add_one_plus_two() {
    let p = load("f32_add_wrapper.c");
    let o = run(&p, &[("x", 32, 0x3F800000), ("y", 32, 0x40000000)]);
    assert_eq!(out(&o, "res"), 0x40400000);
}

#[test]
fn f32_mul_one_and_a_half_times_two() {
    let p = load("f32_mul_wrapper.c");
    let o = run(&p, &[("x", 32, 0x3FC00000), ("y", 32, 0x40000000)]);
    assert_eq!(out(&o, "res"), 0x40400000);
}

#[test]
fn sum_loop_counts_four_iterations() {
    let p = load("sum_loop.c");
    let o = run(&p, &[]);
    assert_eq!(out(&o, "s"), 6);
    assert_eq!(o.loop_iterations.values().copied().collect::<Vec<_>>(), vec![4]);
    assert!(o.exceeds_unwind(3));
    assert!(!o.exceeds_unwind(4));
}

#[test]
fn uint8_constant_wraps() {
    let p = load("struct_mix.c");
    let o = run(&p, &[("a", 32, 5), ("b", 32, 7), ("c", 8, 0xFE)]);
    assert_eq!(out(&o, "flags") >> 24 & 0xFF, 44);
    assert_eq!(out(&o, "flags") & 0xFF, 16);
    assert_eq!(out(&o, "a_out"), 6);
}

#[test]
fn fnptr_selector_asserts_hold() {
    let p = load("fnptr_select.c");
    for sel in 0..6u64 {
        let o = run(&p, &[("sel", 8, sel), ("block", 256, 0)]);
        assert!(o.all_asserts_held());
        assert!(o.violations.is_empty(), "{:?}", o.violations);
    }
}

#[test]
fn missing_input_is_reported() {
    let p = load("punning.c");
    let entry = resolve_entry(&p, None).unwrap();
    let e = interpret(&p, entry, &HashMap::new(), DEFAULT_FUEL).unwrap_err();
    assert_eq!(e.code, Code::MissingInput);
}
