use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn c2rtl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2rtl")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BOUNDED: &str = "#include <stdint.h>
#include <assert.h>
void top(void) {
  uint32_t x;
  C2V_SAMPLE_INPUT(uint32_t, x);
  assert(x < 100);
  uint32_t q = 1000 / x;
  C2V_DRIVE_OUTPUT(uint32_t, q);
}
";

const HARD: &str = "#include <stdint.h>
#include <assert.h>
void top(void) {
  uint32_t x, y;
  C2V_SAMPLE_INPUT(uint32_t, x);
  C2V_SAMPLE_INPUT(uint32_t, y);
  assert((x + y) * (x + y) == x * x + 2 * x * y + y * y);
  uint32_t r = x;
  C2V_DRIVE_OUTPUT(uint32_t, r);
}
";

fn scratch(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn c2v(dir: &Path, source: &str, out: &str, extra: &[&str]) {
    let src = corpus(source);
    let mut args = vec!["c2v", src.to_str().unwrap(), "-o", out];
    args.extend_from_slice(extra);
    let o = c2rtl(dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn c2v_writes_module_and_backmap_with_the_f32_interface() {
    let dir = scratch(&[]);
    c2v(dir.path(), "f32_add_wrapper.c", "f32_add.sv", &["--entry", "f32_add_wrapper", "--unwind", "64"]);
    let sv = fs::read_to_string(dir.path().join("f32_add.sv")).unwrap();
    let lines: Vec<&str> = sv.lines().take(5).collect();
    assert!(lines[0].starts_with("module "));
    assert_eq!(
        &lines[1..],
        [
            "  input logic unsigned [31:0] x,",
            "  input logic unsigned [31:0] y,",
            "  output logic unsigned [31:0] res",
            ");"
        ]
    );
    let map: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("f32_add.map.json")).unwrap()).unwrap();
    assert!(map.is_array() || map.is_object());
}

#[test]
fn c2v_summary_counts_check_obligations() {
    let dir = scratch(&[("q.c", BOUNDED)]);
    let o = c2rtl(dir.path(), &["c2v", "q.c", "--check", "div,shift,bounds,null", "-o", "q"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("1 inputs, 1 outputs"), "{}", stdout(&o));
    assert!(stdout(&o).contains("2 obligations"), "{}", stdout(&o));
    assert!(dir.path().join("q.sv").is_file() && dir.path().join("q.map.json").is_file());
}

#[test]
fn diagnostics_exit_one() {
    let dir = scratch(&[("q.c", BOUNDED), ("bad.c", "void top(void) { int x = ; }\n")]);
    let src = corpus("f32_add_wrapper.c");
    let o = c2rtl(dir.path(), &["c2v", src.to_str().unwrap(), "--entry", "missing"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("E_NO_ENTRY"));
    let o = c2rtl(dir.path(), &["c2v", "bad.c"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).starts_with("bad.c:1:"), "{}", stderr(&o));
    assert_eq!(code(&c2rtl(dir.path(), &["c2v", "absent.c"])), 1);
    assert_eq!(code(&c2rtl(dir.path(), &["c2v", "q.c", "--unwind", "0"])), 1);
    assert_eq!(code(&c2rtl(dir.path(), &["c2v", "q.c", "--check", "bogus"])), 1);
    assert_eq!(code(&c2rtl(dir.path(), &["frobnicate"])), 1);
}

#[test]
fn run_prints_outputs() {
    let dir = scratch(&[]);
    let p = corpus("punning.c");
    let o = c2rtl(dir.path(), &["run", p.to_str().unwrap(), "x=0x40490FDB"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "res=0x00090FDB\n");
    let f = corpus("f32_add_wrapper.c");
    let o = c2rtl(dir.path(), &["run", f.to_str().unwrap(), "x=0x3F800000", "y=0x40000000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "res=0x40400000\n");
}

#[test]
fn run_reports_failures_and_missing_inputs() {
    let dir = scratch(&[("q.c", BOUNDED)]);
    let o = c2rtl(dir.path(), &["run", "q.c", "x=0x200"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("q.c:6:"), "{}", stdout(&o));
    let o = c2rtl(dir.path(), &["run", "q.c", "x=0x0", "--check", "div"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("q.c:7:"));
    assert_eq!(code(&c2rtl(dir.path(), &["run", "q.c", "x=0x5"])), 0);
    let o = c2rtl(dir.path(), &["run", "q.c"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("E_MISSING_INPUT"));
    assert_eq!(code(&c2rtl(dir.path(), &["run", "q.c", "x=1", "z=2"])), 1);
    assert_eq!(code(&c2rtl(dir.path(), &["run", "q.c", "x=123456789"])), 1);
}

#[test]
fn check_exit_codes_follow_verdicts() {
    let dir = scratch(&[("q.c", BOUNDED), ("hard.c", HARD)]);
    let o = c2rtl(dir.path(), &["check", "q.c", "--check", "div"]);
    assert_eq!(code(&o), 4);
    let out = stdout(&o);
    assert!(out.contains("FAILS"), "{out}");
    assert!(out.contains("counterexample: x=0x"), "{out}");

    let fp = corpus("fnptr_select.c");
    let o = c2rtl(dir.path(), &["check", fp.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAILS") && stdout(&o).contains("HOLDS"));

    let o = c2rtl(dir.path(), &["check", "hard.c", "--budget", "1"]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("UNKNOWN"));
}

#[test]
fn check_respects_unwinding_assertions() {
    let dir = scratch(&[]);
    let s = corpus("sum_loop.c");
    let s = s.to_str().unwrap();
    let o = c2rtl(dir.path(), &["check", s, "--unwind", "2", "--unwinding-assertions"]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    let o = c2rtl(dir.path(), &["check", s, "--unwind", "4", "--unwinding-assertions"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn equiv_verdicts_and_errors() {
    let dir = scratch(&[("junk.sv", "module m (\n  input logic unsigned [3:0] a\n);\n  always_ff\nendmodule\n")]);
    let d = dir.path();
    for name in ["mf_add_norm", "mf_add_shift", "mf_add_badround", "punning"] {
        c2v(d, &format!("{name}.c"), name, &[]);
    }
    let o = c2rtl(d, &["equiv", "mf_add_norm.sv", "mf_add_norm.sv"]);
    assert_eq!((code(&o), stdout(&o)), (0, "HOLDS\n".to_string()));
    assert_eq!(code(&c2rtl(d, &["equiv", "mf_add_norm.sv", "mf_add_shift.sv"])), 0);
    let o = c2rtl(d, &["equiv", "mf_add_norm.sv", "mf_add_badround.sv"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).starts_with("FAILS a=0x"), "{}", stdout(&o));
    assert_eq!(code(&c2rtl(d, &["equiv", "mf_add_norm.sv", "punning.sv"])), 1);
    assert_eq!(code(&c2rtl(d, &["equiv", "mf_add_norm.sv", "junk.sv"])), 1);
    assert_eq!(code(&c2rtl(d, &["equiv", "mf_add_norm.sv", "absent.sv"])), 1);
}

#[test]
fn equiv_port_map_follows_renamed_ports() {
    let dir = scratch(&[]);
    let d = dir.path();
    c2v(d, "punning.c", "p", &[]);
    let text = fs::read_to_string(d.join("p.sv")).unwrap();
    let renamed = text.replace(" x,", " xin,").replace(" x;", " xin;").replace("= x ", "= xin ").replace("(x ", "(xin ");
    fs::write(d.join("r.sv"), &renamed).unwrap();
    assert_eq!(code(&c2rtl(d, &["equiv", "p.sv", "r.sv"])), 1);
    let o = c2rtl(d, &["equiv", "p.sv", "r.sv", "--map", "x=xin"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = scratch(&[]);
    let d = dir.path();
    let mut first = Vec::new();
    for round in 0..2 {
        c2v(d, "fnptr_select.c", "f", &["--check", "div,shift,bounds,null"]);
        c2v(d, "mf_add_norm.c", "n", &[]);
        c2v(d, "mf_add_shift.c", "s", &[]);
        let o = c2rtl(d, &["equiv", "n.sv", "s.sv", "--dump-cnf", "m.cnf", "--seed", "7"]);
        assert_eq!(code(&o), 0);
        let c = c2rtl(d, &["check", corpus("fnptr_select.c").to_str().unwrap(), "--seed", "7"]);
        let files: Vec<Vec<u8>> = ["f.sv", "f.map.json", "n.sv", "m.cnf"].iter().map(|f| fs::read(d.join(f)).unwrap()).collect();
        let snapshot = (files, o.stdout, c.stdout);
        if round == 0 {
            first.push(snapshot);
        } else {
            assert!(first[0] == snapshot, "outputs differ between runs");
        }
    }
    let cnf = fs::read_to_string(d.join("m.cnf")).unwrap();
    assert!(cnf.starts_with("p cnf "));
    assert!(cnf.lines().skip(1).all(|l| l.ends_with(" 0") || l == "0"));
}
