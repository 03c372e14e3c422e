//! `c2rtl`: translate bounded C to Verilog, run it, check it, and compare
//! emitted modules.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use c2rtl::bvir::Bits;
use c2rtl::cfront::{compile_file, FrontendOptions, TypedProgram};
use c2rtl::equiv::{self, Verdict, DEFAULT_BUDGET, DEFAULT_SEED};
use c2rtl::oracle::interpret;
use c2rtl::semantics::{interface, resolve_entry, CheckSet, ObligationKind, DEFAULT_FUEL, DEFAULT_UNWIND};
use c2rtl::symex::{execute, SsaTrace, SymexOptions};
use c2rtl::vemit::{emit_backmap, emit_module, parse_subset, render_text, VModule};
use c2rtl::{Code, Diagnostic};

const EXIT_OK: u8 = 0;
const EXIT_DIAG: u8 = 1;
const EXIT_INTERNAL: u8 = 2;
const EXIT_ASSERT: u8 = 3;
const EXIT_FAILS: u8 = 4;
const EXIT_UNKNOWN: u8 = 5;

#[derive(Parser)]
#[command(name = "c2rtl", version, about = "Bounded C to bit-level Verilog translation and checking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a C file into `<out>.sv` and `<out>.map.json`.
    C2v {
        #[command(flatten)]
        front: Front,
        #[command(flatten)]
        unroll: Unroll,
        /// Output path; a trailing `.sv` is optional.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Interpret the entry function on concrete inputs given as `name=HEX`.
    Run {
        #[command(flatten)]
        front: Front,
        /// Runtime checks to report, e.g. `div,shift,bounds,null`.
        #[arg(long = "check", value_name = "LIST")]
        check: Option<String>,
        #[arg(value_name = "NAME=HEX")]
        bindings: Vec<String>,
    },
    /// Prove or refute every assertion and enabled check.
    Check {
        #[command(flatten)]
        front: Front,
        #[command(flatten)]
        unroll: Unroll,
        #[command(flatten)]
        solver: Solver,
    },
    /// Decide combinational equivalence of two emitted modules.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        /// Port pairs `a_port=b_port`, comma separated; other ports pair by name.
        #[arg(long = "map", value_name = "PAIRS")]
        map: Option<String>,
        #[command(flatten)]
        solver: Solver,
        /// Write the miter CNF in DIMACS format.
        #[arg(long = "dump-cnf", value_name = "FILE")]
        dump_cnf: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Front {
    file: PathBuf,
    /// Entry function; needed when several functions drive outputs.
    #[arg(long)]
    entry: Option<String>,
    #[arg(short = 'I', value_name = "DIR")]
    include: Vec<PathBuf>,
    #[arg(short = 'D', value_name = "NAME[=VALUE]")]
    define: Vec<String>,
}

#[derive(Args)]
struct Unroll {
    #[arg(long, default_value_t = DEFAULT_UNWIND, value_parser = clap::value_parser!(u32).range(1..))]
    unwind: u32,
    /// Per-loop bounds `loop_id:N`, comma separated.
    #[arg(long = "unwindset", value_name = "LIST")]
    unwindset: Option<String>,
    /// Turn loops that may exceed the bound into failing obligations.
    #[arg(long = "unwinding-assertions")]
    unwinding_assertions: bool,
    /// Runtime checks, e.g. `div,shift,bounds,null`.
    #[arg(long = "check", value_name = "LIST")]
    check: Option<String>,
}

#[derive(Args)]
struct Solver {
    /// Conflict limit per query.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

/// A failure that maps onto an exit code.
enum Failure {
    Diag(Diagnostic),
    Usage(String),
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::Diag(d)
    }
}

type Outcome = Result<u8, Failure>;

fn frontend(f: &Front) -> Result<TypedProgram, Failure> {
    if !f.file.is_file() {
        return Err(Failure::Diag(Diagnostic::bare(Code::Io, format!("cannot read '{}'", f.file.display()))));
    }
    let defines = f
        .define
        .iter()
        .map(|d| match d.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => (d.clone(), "1".to_string()),
        })
        .collect();
    let opts = FrontendOptions { include_dirs: f.include.clone(), defines };
    Ok(compile_file(&f.file, &opts)?)
}

fn checks(list: &Option<String>) -> Result<CheckSet, Failure> {
    match list {
        None => Ok(CheckSet::default()),
        Some(l) => CheckSet::parse(l).map_err(Failure::Usage),
    }
}

fn symex_options(u: &Unroll) -> Result<SymexOptions, Failure> {
    let mut overrides = BTreeMap::new();
    for item in u.unwindset.iter().flat_map(|s| s.split(',')).filter(|s| !s.trim().is_empty()) {
        let (id, n) = item
            .trim()
            .rsplit_once(':')
            .ok_or_else(|| Failure::Usage(format!("expected loop_id:N in --unwindset, got '{item}'")))?;
        let n: u32 = n.parse().ok().filter(|&n| n >= 1).ok_or_else(|| Failure::Usage(format!("bad bound in '{item}'")))?;
        overrides.insert(id.to_string(), n);
    }
    Ok(SymexOptions {
        unwind: u.unwind,
        unwind_overrides: overrides,
        unwinding_assertions: u.unwinding_assertions,
        checks: checks(&u.check)?,
    })
}

fn translate(front: &Front, unroll: &Unroll) -> Result<(TypedProgram, SsaTrace, SymexOptions), Failure> {
    let prog = frontend(front)?;
    let opts = symex_options(unroll)?;
    let trace = execute(&prog, front.entry.as_deref(), &opts)?;
    Ok((prog, trace, opts))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::Diag(Diagnostic::bare(Code::Io, format!("cannot write '{}': {e}", path.display()))))
}

fn cmd_c2v(front: &Front, unroll: &Unroll, output: &Option<PathBuf>) -> Outcome {
    let (prog, trace, _) = translate(front, unroll)?;
    let trace = trace.slice();
    let entry = resolve_entry(&prog, front.entry.as_deref())?;
    let name = prog.functions[entry].name.to_string();
    let stem = match output {
        Some(p) if p.extension().is_some_and(|e| e == "sv") => p.with_extension(""),
        Some(p) => p.clone(),
        None => front.file.with_extension(""),
    };
    let (module, map) = emit_module(&trace, &name)?;
    let sv = PathBuf::from(format!("{}.sv", stem.display()));
    let json = PathBuf::from(format!("{}.map.json", stem.display()));
    write(&sv, &render_text(&module))?;
    write(&json, &emit_backmap(&map))?;
    println!("{}: {}", sv.display(), trace.summary());
    Ok(EXIT_OK)
}

fn parse_binding(text: &str) -> Result<(String, String), Failure> {
    let (n, v) = text.split_once('=').ok_or_else(|| Failure::Usage(format!("expected NAME=HEX, got '{text}'")))?;
    let digits = v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")).unwrap_or(v);
    Ok((n.to_string(), digits.to_string()))
}

fn cmd_run(front: &Front, check: &Option<String>, bindings: &[String]) -> Outcome {
    let prog = frontend(front)?;
    let enabled = checks(check)?;
    let entry = resolve_entry(&prog, front.entry.as_deref())?;
    let iface = interface(&prog, entry)?;
    let mut env = HashMap::new();
    for b in bindings {
        let (name, digits) = parse_binding(b)?;
        let port = iface.inputs.iter().find(|p| p.name == name).ok_or_else(|| {
            Failure::Diag(Diagnostic::bare(Code::MissingInput, format!("'{name}' is not an input of the entry")))
        })?;
        let value = Bits::from_hex(512, &digits)
            .filter(|v| v.extract(511, port.width.min(511)).is_zero() || port.width == 512)
            .ok_or_else(|| {
                Failure::Diag(Diagnostic::bare(
                    Code::WidthMismatch,
                    format!("'{b}' is not a hexadecimal value of at most {} bits", port.width),
                ))
            })?;
        env.insert(name, value.resize(port.width, false));
    }
    if let Some(p) = iface.inputs.iter().find(|p| !env.contains_key(&p.name)) {
        return Err(Diagnostic::bare(Code::MissingInput, format!("input '{}' is not bound", p.name)).into());
    }
    let out = interpret(&prog, entry, &env, DEFAULT_FUEL)?;
    for (name, v) in &out.outputs {
        println!("{name}=0x{}", v.to_hex());
    }
    let mut failed = false;
    for a in out.asserts.iter().filter(|a| !a.held) {
        println!("{}:{}: failed: {}", a.loc.file, a.loc.line, a.message);
        failed = true;
    }
    for (kind, loc) in &out.violations {
        let on = match kind {
            ObligationKind::DivByZero => enabled.div,
            ObligationKind::Overshift => enabled.shift,
            ObligationKind::Bounds => enabled.bounds,
            ObligationKind::NullDeref => enabled.null,
            _ => false,
        };
        if on {
            println!("{}:{}: {kind} check failed", loc.file, loc.line);
            failed = true;
        }
    }
    Ok(if failed { EXIT_ASSERT } else { EXIT_OK })
}

fn cmd_check(front: &Front, unroll: &Unroll, solver: &Solver) -> Outcome {
    let (prog, trace, opts) = translate(front, unroll)?;
    let verdicts = equiv::check_obligations_seeded(&trace, solver.budget, solver.seed);
    let (mut fails, mut unknown) = (0, 0);
    for (i, (o, v)) in trace.obligations.iter().zip(&verdicts).enumerate() {
        println!("{:<8} {:<10} {}:{}: {}", v.label(), o.kind.as_str(), o.loc.file, o.loc.line, o.message);
        match v {
            Verdict::Holds => {}
            Verdict::Unknown => unknown += 1,
            Verdict::Fails(cex) => {
                fails += 1;
                if !equiv::confirm_with_oracle(&prog, front.entry.as_deref(), &trace, i, cex, &opts)? {
                    eprintln!("internal error: the interpreter does not reproduce obligation {i}");
                    return Ok(EXIT_INTERNAL);
                }
                if cex.is_empty() {
                    println!("         falsified without inputs");
                } else {
                    println!("         counterexample: {}", equiv::format_cex(cex));
                }
            }
        }
    }
    println!(
        "{} obligations: {} hold, {fails} fail, {unknown} unknown",
        verdicts.len(),
        verdicts.len() - fails - unknown
    );
    Ok(if fails > 0 {
        EXIT_FAILS
    } else if unknown > 0 {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    })
}

fn load_module(path: &Path) -> Result<VModule, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Diag(Diagnostic::bare(Code::Io, format!("cannot read '{}': {e}", path.display()))))?;
    parse_subset(&text).map_err(|mut d| {
        if let Some(loc) = &mut d.loc {
            loc.file = path.display().to_string().into();
        }
        Failure::Diag(d)
    })
}

fn cmd_equiv(a: &Path, b: &Path, map: &Option<String>, solver: &Solver, dump: &Option<PathBuf>) -> Outcome {
    let ma = load_module(a)?;
    let mb = load_module(b)?;
    let mut pairs = Vec::new();
    for item in map.iter().flat_map(|m| m.split(',')).filter(|s| !s.trim().is_empty()) {
        let (x, y) = item
            .trim()
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("expected a_port=b_port in --map, got '{item}'")))?;
        pairs.push((x.to_string(), y.to_string()));
    }
    if let Some(path) = dump {
        let miter = equiv::build_miter(&ma, &mb, &pairs)?;
        let q = equiv::bitblast(&miter.pool, &HashMap::new(), miter.target)?;
        write(path, &q.cnf.to_dimacs())?;
    }
    let v = equiv::check_equiv_seeded(&ma, &mb, &pairs, solver.budget, solver.seed)?;
    match &v {
        Verdict::Fails(cex) => println!("FAILS {}", equiv::format_cex(cex)),
        other => println!("{}", other.label()),
    }
    Ok(match v {
        Verdict::Holds => EXIT_OK,
        Verdict::Fails(_) => EXIT_FAILS,
        Verdict::Unknown => EXIT_UNKNOWN,
    })
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::C2v { front, unroll, output } => cmd_c2v(front, unroll, output),
        Command::Run { front, check, bindings } => cmd_run(front, check, bindings),
        Command::Check { front, unroll, solver } => cmd_check(front, unroll, solver),
        Command::Equiv { a, b, map, solver, dump_cnf } => cmd_equiv(a, b, map, solver, dump_cnf),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_DIAG } else { EXIT_OK });
        }
    };
    let result = std::panic::catch_unwind(|| dispatch(&cli));
    let code = match result {
        Ok(Ok(code)) => code,
        Ok(Err(Failure::Diag(d))) => {
            eprintln!("{}", d.render());
            EXIT_DIAG
        }
        Ok(Err(Failure::Usage(msg))) => {
            eprintln!("error: {msg}");
            EXIT_DIAG
        }
        Err(_) => EXIT_INTERNAL,
    };
    ExitCode::from(code)
}
