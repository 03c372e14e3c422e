//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use c2rtl::bvir::Bits;
use c2rtl::cfront::{compile_file, FrontendOptions, TypedProgram};
use c2rtl::equiv::{sat, Cnf, Lit, SolveResult, DEFAULT_BUDGET};
use c2rtl::oracle::{Interpreter, Outcome};
use c2rtl::semantics::{resolve_entry, ObligationKind, DEFAULT_FUEL};
use c2rtl::symex::{execute, SymexOptions};
use c2rtl::vemit::{
    assert_groups, emit_module, has_expression_select, lower_module, parse_subset, render_text, CompiledModule,
};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &[&str] = &[
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

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn load(name: &str) -> TypedProgram {
    compile_file(&corpus(name), &FrontendOptions::default()).unwrap_or_else(|e| panic!("{e}"))
}

fn c2rtl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2rtl")).current_dir(dir).args(args).output().expect("binary runs")
}

fn require(o: &Output, code: i32) -> String {
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    if o.status.code() != Some(code) {
        panic!("exit {:?}, expected {code}\n{out}{}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    }
    out
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let t = start.elapsed();
    if t < limit {
        Ok(format!("{:.2}s", t.as_secs_f64()))
    } else {
        Err(format!("took {:.2}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn env_of(pairs: &[(&str, Bits)]) -> HashMap<String, Bits> {
    pairs.iter().map(|(n, v)| (n.to_string(), *v)).collect()
}

fn interface_fidelity(dir: &Path) -> Result<String, String> {
    let start = Instant::now();
    let src = corpus("f32_add_wrapper.c");
    let o = c2rtl(dir, &["c2v", src.to_str().unwrap(), "--entry", "f32_add_wrapper", "--unwind", "64", "-o", "f32_add.sv"]);
    require(&o, 0);
    let sv = fs::read_to_string(dir.join("f32_add.sv")).unwrap();
    let expected = [
        "input logic unsigned [31:0] x,",
        "input logic unsigned [31:0] y,",
        "output logic unsigned [31:0] res",
        ");",
    ];
    let lines: Vec<&str> = sv.lines().collect();
    if !lines[0].starts_with("module ") || !lines[0].ends_with('(') {
        return Err(format!("module line is '{}'", lines[0]));
    }
    for (got, want) in lines[1..5].iter().zip(expected) {
        if got.trim_start() != want {
            return Err(format!("port line '{got}' differs from '{want}'"));
        }
    }
    within(start, Duration::from_secs(10))
}

/// 1-4-3 reference: the exact sum in units of 2^-9 rounded to the nearest
/// encoding, ties to an even fraction.
fn minifloat_sum(a: u8, b: u8) -> u8 {
    fn value(x: u8) -> i64 {
        let e = ((x >> 3) & 15) as i64;
        let f = (x & 7) as i64;
        let mag = if e == 0 { f } else { (8 + f) << (e - 1) };
        if x & 0x80 != 0 {
            -mag
        } else {
            mag
        }
    }
    let nan = |x: u8| (x >> 3) & 15 == 15 && x & 7 != 0;
    let inf = |x: u8| (x >> 3) & 15 == 15 && x & 7 == 0;
    if nan(a) || nan(b) {
        return 0x7C;
    }
    match (inf(a), inf(b)) {
        (true, true) => return if a == b { a } else { 0x7C },
        (true, false) => return a,
        (false, true) => return b,
        _ => {}
    }
    let s = value(a) + value(b);
    if s == 0 {
        return if a & b & 0x80 != 0 { 0x80 } else { 0 };
    }
    let sign = if s < 0 { 0x80 } else { 0 };
    let m = s.abs();
    let top = value(0x77);
    if m >= top + (top - value(0x76)) / 2 {
        return sign | 0x78;
    }
    let mut best = 0u8;
    for enc in 1u8..0x78 {
        let (d, bd) = ((value(enc) - m).abs(), (value(best) - m).abs());
        if d < bd || (d == bd && enc & 1 == 0) {
            best = enc;
        }
    }
    sign | best
}

fn minifloat_equivalence(dir: &Path) -> Result<String, String> {
    let start = Instant::now();
    for name in ["mf_add_norm", "mf_add_shift"] {
        require(&c2rtl(dir, &["c2v", corpus(&format!("{name}.c")).to_str().unwrap(), "-o", name]), 0);
    }
    let verdict = require(&c2rtl(dir, &["equiv", "mf_add_norm.sv", "mf_add_shift.sv"]), 0);
    if verdict.trim() != "HOLDS" {
        return Err(format!("verdict '{}'", verdict.trim()));
    }
    for name in ["mf_add_norm", "mf_add_shift"] {
        let m = parse_subset(&fs::read_to_string(dir.join(format!("{name}.sv"))).unwrap()).map_err(|e| e.to_string())?;
        let cm = CompiledModule::new(&m).map_err(|e| e.to_string())?;
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                let env = env_of(&[("a", Bits::from_u64(8, a as u64)), ("b", Bits::from_u64(8, b as u64))]);
                let got = cm.run(&env).unwrap().outputs[0].to_u64() as u8;
                let want = minifloat_sum(a, b);
                if got != want {
                    return Err(format!("{name}: {a:#04x} + {b:#04x} = {got:#04x}, expected {want:#04x}"));
                }
            }
        }
    }
    within(start, Duration::from_secs(120)).map(|t| format!("HOLDS, 2^16 pairs enumerated per adder, {t}"))
}

const CANONICAL_NAN: u32 = 0x7FC0_0000;

fn directed_f32() -> Vec<u32> {
    vec![
        0x0000_0000, 0x8000_0000, // zeros
        0x7F80_0000, 0xFF80_0000, // infinities
        0x7FC0_0000, 0xFFC0_0001, 0x7FFF_FFFF, // quiet NaNs
        0x7F80_0001, 0xFFA0_0000, 0x7FBF_FFFF, // signaling NaNs
        0x0000_0001, 0x8000_0001, 0x007F_FFFF, 0x807F_FFFF, // subnormal extremes
        0x0080_0000, 0x8080_0000, 0x7F7F_FFFF, 0xFF7F_FFFF, // normal extremes
        0x3F80_0000, 0xBF80_0000, 0x3F80_0001, 0x3FFF_FFFF, 0x4000_0000, // around one and two
        0x3380_0000, 0x3380_0001, 0x33C0_0000, 0xB380_0000, // half ulp of one and neighbours
        0x3400_0000, 0x4B00_0000, 0x4B7F_FFFF, 0x3F00_0000, 0x1F80_0000, 0x2000_0000,
        0x0040_0000, 0x00FF_FFFF, 0x7F00_0000, 0x3FB5_04F3, 0x3FB5_04F4,
    ]
}

/// A pair biased towards nearby exponents so that alignment and rounding
/// paths are reached often.
fn random_pair(rng: &mut ChaCha8Rng) -> (u32, u32) {
    let x = rng.next_u32();
    let y = match rng.gen_range(0..4) {
        0 => rng.next_u32(),
        1 => {
            let e = ((x >> 23) & 0xFF) as i32 + rng.gen_range(-26..=26);
            (rng.next_u32() & 0x807F_FFFF) | ((e.clamp(0, 255) as u32) << 23)
        }
        2 => x ^ (rng.next_u32() & 0x8000_000F),
        _ => (rng.next_u32() & 0x807F_FFFF) | (((254 - ((x >> 23) & 0xFF) as i32 + rng.gen_range(-30..=30)).clamp(0, 255) as u32) << 23),
    };
    if rng.gen_ratio(1, 8) {
        (x & 0x807F_FFFF, y)
    } else {
        (x, y)
    }
}

fn host(op: &str, x: u32, y: u32) -> u32 {
    let (a, b) = (f32::from_bits(x), f32::from_bits(y));
    let r = if op == "add" { a + b } else { a * b };
    if r.is_nan() {
        CANONICAL_NAN
    } else {
        r.to_bits()
    }
}

fn softfloat_differential() -> Result<String, String> {
    let start = Instant::now();
    let mut checked = 0u64;
    for (op, file) in [("add", "f32_add_wrapper.c"), ("mul", "f32_mul_wrapper.c")] {
        let prog = load(file);
        let it = Interpreter::new(&prog, resolve_entry(&prog, None).unwrap()).map_err(|e| e.to_string())?;
        let mut env = env_of(&[("x", Bits::zero(32)), ("y", Bits::zero(32))]);
        let mut check = |x: u32, y: u32| -> Result<(), String> {
            env.insert("x".into(), Bits::from_u64(32, x as u64));
            env.insert("y".into(), Bits::from_u64(32, y as u64));
            let got = it.run(&env, DEFAULT_FUEL).map_err(|e| e.to_string())?.outputs[0].1.to_u64() as u32;
            let want = host(op, x, y);
            if got != want {
                return Err(format!("f32 {op} {x:#010x} {y:#010x}: got {got:#010x}, host {want:#010x}"));
            }
            checked += 1;
            Ok(())
        };
        let directed = directed_f32();
        for &x in &directed {
            for &y in &directed {
                check(x, y)?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0F32);
        for _ in 0..1_000_000 {
            let (x, y) = random_pair(&mut rng);
            check(x, y)?;
        }
    }
    within(start, Duration::from_secs(60)).map(|t| format!("{checked} pairs bit-exact, {t}"))
}

fn punning_three_ways() -> Result<String, String> {
    let prog = load("punning.c");
    let env = env_of(&[("x", Bits::from_u64(32, 0x4049_0FDB))]);
    let oracle = Interpreter::new(&prog, resolve_entry(&prog, None).unwrap()).unwrap().run(&env, DEFAULT_FUEL).unwrap();
    let trace = execute(&prog, None, &SymexOptions::default()).map_err(|e| e.to_string())?;
    let ssa = trace.evaluator().run(&env).unwrap();
    let (m, _) = emit_module(&trace, "punning").map_err(|e| e.to_string())?;
    let verilog = CompiledModule::new(&parse_subset(&render_text(&m)).unwrap()).unwrap().run(&env).unwrap();
    let got = [oracle.outputs[0].1.to_u64(), ssa.outputs[0].to_u64(), verilog.outputs[0].to_u64()];
    if got.iter().all(|&v| v == 0x0009_0FDB) {
        Ok("0x00090FDB on oracle, SSA and Verilog".into())
    } else {
        Err(format!("results {got:#010x?}"))
    }
}

fn dispatch(dir: &Path) -> Result<String, String> {
    let src = corpus("fnptr_select.c");
    let table = require(&c2rtl(dir, &["check", src.to_str().unwrap()]), 0);
    let rows: Vec<&str> = table.lines().filter(|l| l.contains("fnptr_select.c:")).collect();
    if rows.is_empty() || !rows.iter().all(|l| l.starts_with("HOLDS")) {
        return Err(format!("check table:\n{table}"));
    }
    require(&c2rtl(dir, &["c2v", src.to_str().unwrap(), "-o", "fnptr"]), 0);
    let sv = fs::read_to_string(dir.join("fnptr.sv")).unwrap();
    let text = fs::read_to_string(&src).unwrap();
    let source_asserts = text.matches("assert(").count();
    let emitted = sv.matches("always_comb assert").count();
    if emitted != source_asserts {
        return Err(format!("{emitted} always_comb asserts for {source_asserts} source asserts"));
    }
    Ok(format!("{} obligations HOLD, {emitted} asserts emitted", rows.len()))
}

fn emission_lint() -> Result<String, String> {
    let mut scanned = 0;
    for name in CORPUS {
        let prog = load(name);
        let trace = execute(&prog, None, &SymexOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let (m, _) = emit_module(&trace, "top").map_err(|e| format!("{name}: {e}"))?;
        let text = render_text(&m);
        if has_expression_select(&text) {
            return Err(format!("{name}: part-select of an expression"));
        }
        let mut assigned = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| l.starts_with("assign ")) {
            let lhs = line["assign ".len()..].split_whitespace().next().unwrap_or_default();
            *assigned.entry(lhs.to_string()).or_insert(0) += 1;
        }
        if let Some((w, n)) = assigned.iter().find(|(_, &n)| n != 1) {
            return Err(format!("{name}: '{w}' assigned {n} times"));
        }
        let reparsed = parse_subset(&text).map_err(|e| format!("{name}: {e}"))?;
        if reparsed != m || render_text(&reparsed) != text {
            return Err(format!("{name}: parse after render is not the identity"));
        }
        lower_module(&reparsed, &mut c2rtl::bvir::ExprPool::new()).map_err(|e| format!("{name}: {e}"))?;
        scanned += 1;
    }
    Ok(format!("{scanned} modules, zero violations"))
}

fn random_bits(rng: &mut ChaCha8Rng, width: u32) -> Bits {
    let mut bytes = vec![0u8; width.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    if rng.gen_ratio(1, 8) {
        bytes.iter_mut().skip(1).for_each(|b| *b = 0);
    }
    Bits::from_le_bytes(width, &bytes)
}

fn oracle_fails(o: &Outcome, kind: ObligationKind, loc: &c2rtl::SourceLoc, loop_id: Option<&str>, unwind: u32) -> bool {
    match kind {
        ObligationKind::UserAssert => o.asserts.iter().any(|a| &a.loc == loc && !a.held),
        ObligationKind::Unwinding => o.loop_iterations.get(loop_id.unwrap_or_default()).is_some_and(|&n| n > unwind as u64),
        k => o.violations.iter().any(|(vk, vl)| *vk == k && vl == loc),
    }
}

fn three_way_agreement() -> Result<String, String> {
    const VECTORS: usize = 10_000;
    let opts = SymexOptions::default();
    for name in CORPUS {
        let prog = load(name);
        let it = Interpreter::new(&prog, resolve_entry(&prog, None).unwrap()).unwrap();
        let trace = execute(&prog, None, &opts).map_err(|e| format!("{name}: {e}"))?;
        let (m, _) = emit_module(&trace, "top").map_err(|e| format!("{name}: {e}"))?;
        let cm = CompiledModule::new(&parse_subset(&render_text(&m)).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        let ev = trace.evaluator();
        let groups = assert_groups(&trace);
        let mut rng = ChaCha8Rng::seed_from_u64(name.bytes().map(u64::from).sum());
        for i in 0..VECTORS {
            let env: HashMap<String, Bits> =
                trace.interface.inputs.iter().map(|p| (p.name.clone(), random_bits(&mut rng, p.width))).collect();
            let o = it.run(&env, DEFAULT_FUEL).map_err(|e| format!("{name}: {e}"))?;
            let tv = ev.run(&env).map_err(|e| e.to_string())?;
            let mv = cm.run(&env).map_err(|e| e.to_string())?;
            let oracle_out: Vec<Bits> = o.outputs.iter().map(|p| p.1).collect();
            if oracle_out != tv.outputs || tv.outputs != mv.outputs {
                return Err(format!("{name}: outputs differ on vector {i}"));
            }
            for (g, &pass) in groups.iter().zip(&mv.asserts) {
                let ssa_bad = g.members.iter().any(|&k| tv.violated[k]);
                let first = &trace.obligations[g.members[0]];
                let oracle_bad = oracle_fails(&o, g.kind, &g.loc, first.loop_id.as_deref(), opts.unwind);
                if pass == ssa_bad || oracle_bad != ssa_bad {
                    return Err(format!("{name}: verdicts differ at {} on vector {i}", g.loc));
                }
            }
        }
    }
    Ok(format!("{} programs x {VECTORS} vectors bit-exact", CORPUS.len()))
}

fn pigeonhole(p: u32, h: u32) -> Cnf {
    let mut cnf = Cnf::new();
    for _ in 0..p * h {
        cnf.new_var();
    }
    let var = |i: u32, j: u32| Lit::new(i * h + j, true);
    for i in 0..p {
        cnf.add_clause((0..h).map(|j| var(i, j)).collect::<Vec<_>>());
    }
    for j in 0..h {
        for a in 0..p {
            for b in a + 1..p {
                cnf.add_clause(vec![!var(a, j), !var(b, j)]);
            }
        }
    }
    cnf
}

fn random_3sat(rng: &mut ChaCha8Rng, n: u32, m: usize) -> Cnf {
    let mut cnf = Cnf::new();
    for _ in 0..n {
        cnf.new_var();
    }
    for _ in 0..m {
        cnf.add_clause((0..3).map(|_| Lit::new(rng.gen_range(0..n), rng.gen())).collect::<Vec<_>>());
    }
    cnf
}

fn sat_sanity() -> Result<String, String> {
    let start = Instant::now();
    if sat::solve(&pigeonhole(5, 4), DEFAULT_BUDGET, 1) != SolveResult::Unsat {
        return Err("PHP(5,4) not UNSAT".into());
    }
    let php = within(start, Duration::from_secs(10))?;
    let mut rng = ChaCha8Rng::seed_from_u64(426);
    let (mut sat_count, mut unsat_count) = (0, 0);
    for k in 0..100 {
        let cnf = random_3sat(&mut rng, 100, 426);
        match sat::solve(&cnf, DEFAULT_BUDGET, 1) {
            SolveResult::Sat(model) if cnf.satisfied_by(&model) => sat_count += 1,
            SolveResult::Sat(_) => return Err(format!("instance {k}: model does not satisfy the formula")),
            SolveResult::Unsat => unsat_count += 1,
            SolveResult::Unknown => return Err(format!("instance {k}: budget exhausted")),
        }
    }
    let mut small = 0;
    for n in 3..=20u32 {
        for _ in 0..6 {
            let m = (n as f64 * rng.gen_range(3.0..5.5)) as usize;
            let cnf = random_3sat(&mut rng, n, m);
            let brute = (0u64..1 << n).any(|bits| {
                let model: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
                cnf.satisfied_by(&model)
            });
            let got = match sat::solve(&cnf, DEFAULT_BUDGET, 1) {
                SolveResult::Sat(model) if cnf.satisfied_by(&model) => true,
                SolveResult::Unsat => false,
                other => return Err(format!("n={n}: {other:?}")),
            };
            if got != brute {
                return Err(format!("n={n}: solver says {got}, enumeration says {brute}"));
            }
            small += 1;
        }
    }
    Ok(format!(
        "PHP(5,4) UNSAT in {php}; n=100 ratio 4.26: {sat_count} SAT, {unsat_count} UNSAT; {small} small instances match enumeration"
    ))
}

fn unwinding(dir: &Path) -> Result<String, String> {
    let src = corpus("sum_loop.c");
    let src = src.to_str().unwrap();
    let held = require(&c2rtl(dir, &["check", src, "--unwind", "4", "--unwinding-assertions"]), 0);
    if !held.lines().any(|l| l.starts_with("HOLDS") && l.contains("unwinding")) {
        return Err(format!("bound 4:\n{held}"));
    }
    let failed = require(&c2rtl(dir, &["check", src, "--unwind", "2", "--unwinding-assertions"]), 4);
    if !failed.lines().any(|l| l.starts_with("FAILS") && l.contains("unwinding")) || !failed.contains("falsified without inputs")
    {
        return Err(format!("bound 2:\n{failed}"));
    }
    Ok("HOLDS at 4, FAILS without inputs at 2".into())
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("scratch directory");
    let d = dir.path();
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Result<String, String> + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("interface fidelity", Box::new(|| interface_fidelity(d))),
        ("mini-float adder equivalence", Box::new(|| minifloat_equivalence(d))),
        ("soft-float differential", Box::new(softfloat_differential)),
        ("punning", Box::new(punning_three_ways)),
        ("function-pointer dispatch", Box::new(|| dispatch(d))),
        ("emission lint", Box::new(emission_lint)),
        ("three-way agreement", Box::new(three_way_agreement)),
        ("SAT engine sanity", Box::new(sat_sanity)),
        ("unwinding semantics", Box::new(|| unwinding(d))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
