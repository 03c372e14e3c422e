use std::collections::{BTreeSet, HashMap};

use c2rtl::bvir::{BinOp, Bits, ExprId, ExprPool, Op};
use c2rtl::semantics::{Interface, ObligationKind, Port};
use c2rtl::symex::{Equation, Obligation, SsaTrace};
use c2rtl::vemit::*;
use c2rtl::{Code, SourceLoc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: &[&str] = &["a", "b", "c_1", "d_2", "x", "res", "t_0", "aux_9"];

fn rand_bits(rng: &mut ChaCha8Rng, w: u32) -> Bits {
    let words: Vec<u64> = (0..w.div_ceil(64)).map(|_| rng.gen()).collect();
    Bits::from_words(w, &words)
}

fn rand_vexpr(rng: &mut ChaCha8Rng, depth: u32) -> VExpr {
    let name = |rng: &mut ChaCha8Rng| NAMES[rng.gen_range(0..NAMES.len())].to_string();
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => VExpr::Id(name(rng)),
            1 => {
                let w = rng.gen_range(1..=80);
                VExpr::Const(rand_bits(rng, w))
            }
            2 => VExpr::Signed(name(rng)),
            _ => {
                let lo = rng.gen_range(0..16);
                VExpr::Select(name(rng), lo + rng.gen_range(0..16), lo)
            }
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..4) {
        0 => VExpr::Unary(if rng.gen() { VUnOp::Not } else { VUnOp::Neg }, Box::new(rand_vexpr(rng, d))),
        1 => {
            const OPS: [VBinOp; 16] = [
                VBinOp::And,
                VBinOp::Or,
                VBinOp::Xor,
                VBinOp::Add,
                VBinOp::Sub,
                VBinOp::Mul,
                VBinOp::Div,
                VBinOp::Mod,
                VBinOp::Shl,
                VBinOp::Shr,
                VBinOp::Eq,
                VBinOp::Ne,
                VBinOp::Lt,
                VBinOp::Le,
                VBinOp::Gt,
                VBinOp::Ge,
            ];
            let op = OPS[rng.gen_range(0..OPS.len())];
            VExpr::Binary(op, Box::new(rand_vexpr(rng, d)), Box::new(rand_vexpr(rng, d)))
        }
        2 => VExpr::Ternary(Box::new(rand_vexpr(rng, d)), Box::new(rand_vexpr(rng, d)), Box::new(rand_vexpr(rng, d))),
        _ => VExpr::Concat((0..rng.gen_range(1..4)).map(|_| rand_vexpr(rng, d)).collect()),
    }
}

fn rand_message(rng: &mut ChaCha8Rng) -> String {
    const CHARS: &[char] = &['a', 'Z', ' ', ':', '"', '\\', '\n', '(', ')', '=', '0', 'é'];
    (0..rng.gen_range(0..20)).map(|_| CHARS[rng.gen_range(0..CHARS.len())]).collect()
}

fn rand_module(rng: &mut ChaCha8Rng) -> VModule {
    let mut names: Vec<&str> = NAMES.to_vec();
    let mut m = VModule { name: format!("m{}", rng.gen_range(0..100)), ..VModule::default() };
    for _ in 0..rng.gen_range(0..4) {
        let name = names.swap_remove(rng.gen_range(0..names.len())).to_string();
        let dir = if rng.gen() { Dir::Input } else { Dir::Output };
        m.ports.push(VPort { dir, name, width: rng.gen_range(1..=128) });
    }
    for _ in 0..rng.gen_range(0..4) {
        let name = names.swap_remove(rng.gen_range(0..names.len())).to_string();
        m.wires.push(VWire { name, width: rng.gen_range(1..=128) });
    }
    for _ in 0..rng.gen_range(0..5) {
        m.assigns.push(VAssign { lhs: NAMES[rng.gen_range(0..NAMES.len())].to_string(), rhs: rand_vexpr(rng, 4) });
    }
    for k in 0..rng.gen_range(0..3) {
        let label = rng.gen_bool(0.5).then(|| format!("c2v_check_div_{k}"));
        m.asserts.push(VAssert { expr: rand_vexpr(rng, 3), label, message: rand_message(rng) });
    }
    m
}

#[test]
fn random_modules_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1_000 {
        let m = rand_module(&mut rng);
        let text = render_text(&m);
        let back = parse_subset(&text).unwrap_or_else(|e| panic!("module {i}: {e}\n{text}"));
        assert_eq!(back, m, "module {i}\n{text}");
        assert_eq!(render_text(&back), text);
    }
}

#[test]
fn render_is_deterministic() {
    let mut a = ChaCha8Rng::seed_from_u64(3);
    let mut b = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        assert_eq!(render_text(&rand_module(&mut a)), render_text(&rand_module(&mut b)));
    }
}

#[test]
fn skeleton_has_five_lines() {
    let m = VModule {
        name: "m".into(),
        ports: vec![
            VPort { dir: Dir::Input, name: "a".into(), width: 8 },
            VPort { dir: Dir::Output, name: "b".into(), width: 8 },
        ],
        ..VModule::default()
    };
    let text = render_text(&m);
    assert_eq!(text, "module m (\n  input logic unsigned [7:0] a,\n  output logic unsigned [7:0] b\n);\nendmodule\n");
    let w = VModule { wires: vec![VWire { name: "f".into(), width: 1 }, VWire { name: "g".into(), width: 5 }], ..m };
    let text = render_text(&w);
    assert!(text.contains("\n  logic f;\n  logic unsigned [4:0] g;\n"));
}

#[test]
fn empty_backmap_is_empty_array() {
    assert_eq!(emit_backmap(&BackMap::default()).trim(), "[]");
}

struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<(String, u32)>,
}

impl Gen {
    fn leaf(&mut self, p: &mut ExprPool, w: u32) -> ExprId {
        let cands: Vec<(String, u32)> = self.vars.iter().filter(|v| v.1 == w).cloned().collect();
        if !cands.is_empty() && self.rng.gen_bool(0.6) {
            let (n, _) = &cands[self.rng.gen_range(0..cands.len())];
            return p.var(n, w);
        }
        let v = match self.rng.gen_range(0..4) {
            0 => Bits::zero(w),
            1 => Bits::ones(w),
            _ => rand_bits(&mut self.rng, w),
        };
        p.constant(v)
    }

    /// Unsimplified random expressions so that every operator reaches the
    /// emitter.
    fn expr(&mut self, p: &mut ExprPool, w: u32, depth: u32) -> ExprId {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf(p, w);
        }
        let d = depth - 1;
        let op = match self.rng.gen_range(0..9) {
            0 => Op::Not(self.expr(p, w, d)),
            1 => Op::Neg(self.expr(p, w, d)),
            2 | 3 => {
                let o = BinOp::ALL[self.rng.gen_range(0..13)];
                Op::Bin(o, self.expr(p, w, d), self.expr(p, w, d))
            }
            4 if w == 1 => {
                let o = BinOp::ALL[13 + self.rng.gen_range(0..5)];
                let ow = [1, 4, 8, 16, 33][self.rng.gen_range(0..5)];
                Op::Bin(o, self.expr(p, ow, d), self.expr(p, ow, d))
            }
            5 => Op::Ite(self.expr(p, 1, d), self.expr(p, w, d), self.expr(p, w, d)),
            6 if w < 40 => {
                let ow = self.rng.gen_range(w..=40);
                let lo = self.rng.gen_range(0..=ow - w);
                Op::Extract(lo + w - 1, lo, self.expr(p, ow, d))
            }
            7 if w >= 2 => {
                let split = self.rng.gen_range(1..w);
                Op::Concat(self.expr(p, w - split, d), self.expr(p, split, d))
            }
            8 if w >= 2 => {
                let ow = self.rng.gen_range(1..w);
                let a = self.expr(p, ow, d);
                return p.raw(if self.rng.gen() { Op::Zext(a) } else { Op::Sext(a) }, Some(w)).unwrap();
            }
            _ => Op::Bin(BinOp::Xor, self.expr(p, w, d), self.leaf(p, w)),
        };
        p.raw(op, Some(w)).unwrap()
    }
}

fn random_trace(rng: &mut ChaCha8Rng) -> SsaTrace {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(rng.gen()), vars: Vec::new() };
    let mut pool = ExprPool::new();
    let widths = [1u32, 4, 8, 16, 33];
    let mut iface = Interface::default();
    let mut inputs = Vec::new();
    for (i, &w) in widths.iter().enumerate().take(g.rng.gen_range(1..=5)) {
        let name = format!("in{i}");
        inputs.push(pool.var(&name, w));
        g.vars.push((name.clone(), w));
        iface.inputs.push(Port { name, width: w });
    }
    let loc = SourceLoc::new("gen.c", 1, 1);
    let mut equations = Vec::new();
    for k in 0..g.rng.gen_range(1..6) {
        let w = widths[g.rng.gen_range(0..widths.len())];
        let rhs = g.expr(&mut pool, w, 5);
        let name = format!("t_{k}");
        let var = pool.var(&name, w);
        g.vars.push((name.clone(), w));
        equations.push(Equation { name: name.into(), var, rhs, loc: loc.clone() });
    }
    let mut outputs = Vec::new();
    let mut output_locs = Vec::new();
    for k in 0..g.rng.gen_range(1..3) {
        let w = widths[g.rng.gen_range(0..widths.len())];
        outputs.push(g.expr(&mut pool, w, 4));
        output_locs.push(loc.clone());
        iface.outputs.push(Port { name: format!("out{k}"), width: w });
    }
    let mut obligations = Vec::new();
    for k in 0..g.rng.gen_range(0..4) {
        let guard = g.expr(&mut pool, 1, 3);
        let claim = g.expr(&mut pool, 1, 4);
        let kind = if k % 2 == 0 { ObligationKind::UserAssert } else { ObligationKind::DivByZero };
        obligations.push(Obligation {
            kind,
            guard,
            claim,
            loc: SourceLoc::new("gen.c", 1 + (k as u32 % 2), 1),
            message: "claim".into(),
            loop_id: None,
        });
    }
    let input_locs = vec![loc; inputs.len()];
    SsaTrace { pool, interface: iface, inputs, input_locs, outputs, output_locs, equations, obligations }
}

#[test]
fn emitted_verilog_preserves_random_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..2_000 {
        let trace = random_trace(&mut rng);
        trace.check_ssa().unwrap();
        let (m, _) = emit_module(&trace, "gen").unwrap();
        let text = render_text(&m);
        assert!(!has_expression_select(&text), "trace {i}\n{text}");
        let back = parse_subset(&text).unwrap_or_else(|e| panic!("trace {i}: {e}\n{text}"));
        assert_eq!(back, m);
        let cm = CompiledModule::new(&back).unwrap_or_else(|e| panic!("trace {i}: {e}\n{text}"));
        let ev = trace.evaluator();
        let groups = assert_groups(&trace);
        for _ in 0..50 {
            let env: HashMap<String, Bits> =
                trace.interface.inputs.iter().map(|p| (p.name.clone(), rand_bits(&mut rng, p.width))).collect();
            let tv = ev.run(&env).unwrap();
            let mv = cm.run(&env).unwrap();
            assert_eq!(mv.outputs, tv.outputs, "trace {i}\n{}\n{text}", trace.dump());
            for (g, ok) in groups.iter().zip(&mv.asserts) {
                assert_eq!(*ok, !g.members.iter().any(|&k| tv.violated[k]), "trace {i}\n{text}");
            }
        }
    }
}

#[test]
fn extract_of_sum_goes_through_an_aux_wire() {
    let mut pool = ExprPool::new();
    let a = pool.var("a_0", 16);
    let b = pool.var("b_0", 16);
    let sum = pool.add(a, b);
    let rhs = pool.extract(7, 0, sum);
    let t = pool.var("t_1", 8);
    let loc = SourceLoc::new("x.c", 3, 1);
    let trace = SsaTrace {
        pool,
        interface: Interface {
            inputs: vec![Port { name: "a_0".into(), width: 16 }, Port { name: "b_0".into(), width: 16 }],
            outputs: vec![Port { name: "r".into(), width: 8 }],
        },
        inputs: vec![a, b],
        input_locs: vec![loc.clone(), loc.clone()],
        outputs: vec![t],
        output_locs: vec![loc.clone()],
        equations: vec![Equation { name: "t_1".into(), var: t, rhs, loc }],
        obligations: vec![],
    };
    let (m, _) = emit_module(&trace, "m").unwrap();
    let text = render_text(&m);
    assert!(text.contains("  assign aux_0 = a_0 + b_0;\n  assign t_1 = aux_0[7:0];\n"), "{text}");
}

#[test]
fn reserved_words_are_escaped_and_collisions_rejected() {
    let mut pool = ExprPool::new();
    let x = pool.var("module", 8);
    let loc = SourceLoc::new("x.c", 1, 1);
    let mk = |inputs: Vec<&str>, pool: &ExprPool| SsaTrace {
        pool: pool.clone(),
        interface: Interface {
            inputs: inputs.iter().map(|n| Port { name: n.to_string(), width: 8 }).collect(),
            outputs: vec![Port { name: "out".into(), width: 8 }],
        },
        inputs: vec![x; inputs.len()],
        input_locs: vec![loc.clone(); inputs.len()],
        outputs: vec![x],
        output_locs: vec![loc.clone()],
        equations: vec![],
        obligations: vec![],
    };
    let (m, map) = emit_module(&mk(vec!["module"], &pool), "m").unwrap();
    assert_eq!(m.ports[0].name, "c2v_module");
    assert!(render_text(&m).contains("assign out = c2v_module;"));
    let ids: BTreeSet<&str> = map.entries.iter().map(|e| e.id.as_str()).collect();
    assert!(ids.contains("c2v_module"));
    let e = emit_module(&mk(vec!["module", "c2v_module"], &pool), "m").unwrap_err();
    assert_eq!(e.code, Code::NameCollision);
}
