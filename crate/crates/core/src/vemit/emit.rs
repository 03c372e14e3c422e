//! Trace to Verilog: one wire per equation, auxiliary wires for shared
//! nodes and for part-selects of compound operands.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use super::ast::*;
use super::source::Sources;
use crate::bvir::{BinOp, Bits, ExprId, ExprPool, Op};
use crate::diag::{Code, Diagnostic, SourceLoc};
use crate::semantics::ObligationKind;
use crate::symex::SsaTrace;

/// Inline expressions taller than this are cut into auxiliary wires.
const MAX_INLINE_HEIGHT: u32 = 12;

pub const ESCAPE_PREFIX: &str = "c2v_";

const RESERVED: &[&str] = &[
    "accept_on", "alias", "always", "always_comb", "always_ff", "always_latch", "and", "assert", "assign", "assume",
    "automatic", "before", "begin", "bind", "bins", "binsof", "bit", "break", "buf", "bufif0", "bufif1", "byte",
    "case", "casex", "casez", "cell", "chandle", "checker", "class", "clocking", "cmos", "config", "const",
    "constraint", "context", "continue", "cover", "covergroup", "coverpoint", "cross", "deassign", "default",
    "defparam", "design", "disable", "dist", "do", "edge", "else", "end", "endcase", "endchecker", "endclass",
    "endclocking", "endconfig", "endfunction", "endgenerate", "endgroup", "endinterface", "endmodule", "endpackage",
    "endprimitive", "endprogram", "endproperty", "endsequence", "endspecify", "endtable", "endtask", "enum", "event",
    "eventually", "expect", "export", "extends", "extern", "final", "first_match", "for", "force", "foreach",
    "forever", "fork", "forkjoin", "function", "generate", "genvar", "global", "highz0", "highz1", "if", "iff",
    "ifnone", "ignore_bins", "illegal_bins", "implements", "implies", "import", "incdir", "include", "initial",
    "inout", "input", "inside", "instance", "int", "integer", "interconnect", "interface", "intersect", "join",
    "join_any", "join_none", "large", "let", "liblist", "library", "local", "localparam", "logic", "longint",
    "macromodule", "matches", "medium", "modport", "module", "nand", "negedge", "nettype", "new", "nexttime",
    "nmos", "nor", "noshowcancelled", "not", "notif0", "notif1", "null", "or", "output", "package", "packed",
    "parameter", "pmos", "posedge", "primitive", "priority", "program", "property", "protected", "pull0", "pull1",
    "pulldown", "pullup", "pulsestyle_ondetect", "pulsestyle_onevent", "pure", "rand", "randc", "randcase",
    "randsequence", "rcmos", "real", "realtime", "ref", "reg", "reject_on", "release", "repeat", "restrict",
    "return", "rnmos", "rpmos", "rtran", "rtranif0", "rtranif1", "s_always", "s_eventually", "s_nexttime",
    "s_until", "s_until_with", "scalared", "sequence", "shortint", "shortreal", "showcancelled", "signed", "small",
    "soft", "solve", "specify", "specparam", "static", "string", "strong", "strong0", "strong1", "struct", "super",
    "supply0", "supply1", "sync_accept_on", "sync_reject_on", "table", "tagged", "task", "this", "throughout",
    "time", "timeprecision", "timeunit", "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior",
    "trireg", "type", "typedef", "union", "unique", "unique0", "unsigned", "until", "until_with", "untyped", "use",
    "uwire", "var", "vectored", "virtual", "void", "wait", "wait_order", "wand", "weak", "weak0", "weak1", "while",
    "wildcard", "wire", "with", "within", "wor", "xnor", "xor",
];

pub fn is_reserved(name: &str) -> bool {
    RESERVED.binary_search(&name).is_ok()
}

/// Applies the reserved-word escape.
pub fn escape_ident(name: &str) -> String {
    if is_reserved(name) {
        format!("{ESCAPE_PREFIX}{name}")
    } else {
        name.to_string()
    }
}

/// Obligations that share a kind and source location become one
/// assertion; this is the order and grouping used for emission.
pub struct AssertGroup {
    pub kind: ObligationKind,
    pub loc: SourceLoc,
    pub message: String,
    pub members: Vec<usize>,
}

pub fn assert_groups(trace: &SsaTrace) -> Vec<AssertGroup> {
    let mut groups: Vec<AssertGroup> = Vec::new();
    let mut index: HashMap<(ObligationKind, SourceLoc), usize> = HashMap::new();
    for (i, o) in trace.obligations.iter().enumerate() {
        let key = (o.kind, o.loc.clone());
        match index.get(&key) {
            Some(&g) => groups[g].members.push(i),
            None => {
                index.insert(key, groups.len());
                groups.push(AssertGroup { kind: o.kind, loc: o.loc.clone(), message: o.message.clone(), members: vec![i] });
            }
        }
    }
    groups
}

struct Emitter<'a> {
    pool: &'a ExprPool,
    names: HashMap<Arc<str>, String>,
    refs: HashMap<ExprId, u32>,
    done: HashMap<ExprId, (VExpr, u32)>,
    module: VModule,
    map: BackMap,
    used: HashSet<String>,
    next_aux: usize,
    loc: SourceLoc,
    text: String,
}

pub fn emit_module(trace: &SsaTrace, name: &str) -> Result<(VModule, BackMap), Diagnostic> {
    emit_module_with(trace, name, &mut Sources::new())
}

pub fn emit_module_with(trace: &SsaTrace, name: &str, sources: &mut Sources) -> Result<(VModule, BackMap), Diagnostic> {
    let mut pool = trace.pool.clone();
    let groups = assert_groups(trace);
    let mut assert_roots = Vec::new();
    for g in &groups {
        let mut acc = pool.tru();
        for &i in &g.members {
            let o = &trace.obligations[i];
            let ng = pool.not(o.guard);
            let ok = pool.or(ng, o.claim);
            acc = pool.and(acc, ok);
        }
        assert_roots.push(acc);
    }

    let mut roots: Vec<ExprId> = trace.equations.iter().map(|e| e.rhs).collect();
    roots.extend(&trace.outputs);
    roots.extend(&assert_roots);
    let mut refs: HashMap<ExprId, u32> = HashMap::new();
    for &r in &roots {
        *refs.entry(r).or_default() += 1;
    }
    for n in pool.postorder(&roots) {
        for c in pool.op(n).children() {
            *refs.entry(c).or_default() += 1;
        }
    }

    let mut module = VModule { name: escape_ident(name), ..VModule::default() };
    let mut used = HashSet::new();
    let mut names: HashMap<Arc<str>, String> = HashMap::new();
    let claim = |raw: &str, used: &mut HashSet<String>| -> Result<String, Diagnostic> {
        let id = escape_ident(raw);
        if !used.insert(id.clone()) {
            return Err(Diagnostic::bare(Code::NameCollision, format!("identifier '{id}' is emitted twice")));
        }
        Ok(id)
    };
    let mut map = BackMap::default();
    for (p, loc) in trace.interface.inputs.iter().zip(&trace.input_locs) {
        let id = claim(&p.name, &mut used)?;
        names.insert(p.name.as_str().into(), id.clone());
        module.ports.push(VPort { dir: Dir::Input, name: id.clone(), width: p.width });
        map.entries.push(entry(&id, loc, sources));
    }
    for (p, loc) in trace.interface.outputs.iter().zip(&trace.output_locs) {
        let id = claim(&p.name, &mut used)?;
        module.ports.push(VPort { dir: Dir::Output, name: id.clone(), width: p.width });
        map.entries.push(entry(&id, loc, sources));
    }
    for eq in &trace.equations {
        let id = claim(&eq.name, &mut used)?;
        names.insert(eq.name.clone(), id);
    }

    let mut em = Emitter {
        pool: &pool,
        names,
        refs,
        done: HashMap::new(),
        module,
        map,
        used,
        next_aux: 0,
        loc: SourceLoc::builtin(),
        text: String::new(),
    };

    for eq in &trace.equations {
        em.set_loc(&eq.loc, sources);
        let rhs = em.root(eq.rhs)?;
        let id = em.names[&eq.name].clone();
        let width = pool.width(eq.var);
        em.module.wires.push(VWire { name: id.clone(), width });
        em.map.entries.push(BackMapEntry {
            id: id.clone(),
            file: eq.loc.file.to_string(),
            line: eq.loc.line,
            col: eq.loc.col,
            expr: em.text.clone(),
        });
        em.module.assigns.push(VAssign { lhs: id, rhs });
    }
    let out_ports: Vec<String> = em.module.outputs().map(|p| p.name.clone()).collect();
    for ((&v, loc), port) in trace.outputs.iter().zip(&trace.output_locs).zip(out_ports) {
        em.set_loc(loc, sources);
        let rhs = em.root(v)?;
        em.module.assigns.push(VAssign { lhs: port, rhs });
    }
    let mut check_no = 0;
    for (g, &r) in groups.iter().zip(&assert_roots) {
        em.set_loc(&g.loc, sources);
        let expr = em.root(r)?;
        let label = if g.kind == ObligationKind::UserAssert {
            None
        } else {
            check_no += 1;
            Some(format!("{ESCAPE_PREFIX}check_{}_{}", g.kind, check_no - 1))
        };
        let message = format!("{}:{}: {}", g.loc.file, g.loc.line, g.message);
        em.module.asserts.push(VAssert { expr, label, message });
    }
    Ok((em.module, em.map))
}

fn entry(id: &str, loc: &SourceLoc, sources: &mut Sources) -> BackMapEntry {
    BackMapEntry {
        id: id.to_string(),
        file: loc.file.to_string(),
        line: loc.line,
        col: loc.col,
        expr: sources.snippet(loc),
    }
}

impl Emitter<'_> {
    fn set_loc(&mut self, loc: &SourceLoc, sources: &mut Sources) {
        self.loc = loc.clone();
        self.text = sources.snippet(loc);
    }

    fn aux(&mut self, e: VExpr, width: u32) -> String {
        let name = loop {
            let n = format!("aux_{}", self.next_aux);
            self.next_aux += 1;
            if !self.used.contains(&n) {
                break n;
            }
        };
        self.used.insert(name.clone());
        self.module.wires.push(VWire { name: name.clone(), width });
        self.module.assigns.push(VAssign { lhs: name.clone(), rhs: e });
        self.map.entries.push(BackMapEntry {
            id: name.clone(),
            file: self.loc.file.to_string(),
            line: self.loc.line,
            col: self.loc.col,
            expr: self.text.clone(),
        });
        name
    }

    fn as_id(&mut self, e: VExpr, width: u32) -> String {
        match e {
            VExpr::Id(n) => n,
            other => self.aux(other, width),
        }
    }

    fn root(&mut self, r: ExprId) -> Result<VExpr, Diagnostic> {
        let mut stack = vec![(r, false)];
        while let Some((e, expanded)) = stack.pop() {
            if self.done.contains_key(&e) {
                continue;
            }
            if !expanded {
                stack.push((e, true));
                for c in self.pool.op(e).children() {
                    if !self.done.contains_key(&c) {
                        stack.push((c, false));
                    }
                }
                continue;
            }
            let (v, h) = self.build(e)?;
            let leaf = matches!(v, VExpr::Id(_) | VExpr::Const(_));
            let shared = self.refs.get(&e).copied().unwrap_or(0) > 1;
            let entry = if !leaf && (shared || h > MAX_INLINE_HEIGHT) {
                let w = self.pool.width(e);
                (VExpr::Id(self.aux(v, w)), 0)
            } else {
                (v, h)
            };
            self.done.insert(e, entry);
        }
        Ok(self.done[&r].0.clone())
    }

    fn child(&self, e: ExprId) -> (VExpr, u32) {
        self.done[&e].clone()
    }

    fn build(&mut self, e: ExprId) -> Result<(VExpr, u32), Diagnostic> {
        let pool = self.pool;
        let w = pool.width(e);
        let b = |x: VExpr| Box::new(x);
        Ok(match pool.op(e) {
            Op::Const(k) => (VExpr::Const(*k), 0),
            Op::Var(n) => match self.names.get(n) {
                Some(id) => (VExpr::Id(id.clone()), 0),
                None => {
                    return Err(Diagnostic::bare(Code::UnboundVar, format!("variable '{n}' has no definition in the trace")))
                }
            },
            Op::Not(a) => {
                let (x, h) = self.child(*a);
                (VExpr::Unary(VUnOp::Not, b(x)), h + 1)
            }
            Op::Neg(a) => {
                let (x, h) = self.child(*a);
                (VExpr::Unary(VUnOp::Neg, b(x)), h + 1)
            }
            Op::Bin(op, l, r) => {
                let (x, hx) = self.child(*l);
                let (y, hy) = self.child(*r);
                let wl = pool.width(*l);
                let h = hx.max(hy) + 1;
                let plain = |o: VBinOp, x: VExpr, y: VExpr| VExpr::Binary(o, Box::new(x), Box::new(y));
                let v = match op {
                    BinOp::And => plain(VBinOp::And, x, y),
                    BinOp::Or => plain(VBinOp::Or, x, y),
                    BinOp::Xor => plain(VBinOp::Xor, x, y),
                    BinOp::Add => plain(VBinOp::Add, x, y),
                    BinOp::Sub => plain(VBinOp::Sub, x, y),
                    BinOp::Mul => plain(VBinOp::Mul, x, y),
                    BinOp::Shl => plain(VBinOp::Shl, x, y),
                    BinOp::Lshr => plain(VBinOp::Shr, x, y),
                    BinOp::Eq => plain(VBinOp::Eq, x, y),
                    BinOp::Ult => plain(VBinOp::Lt, x, y),
                    BinOp::Ule => plain(VBinOp::Le, x, y),
                    BinOp::Slt | BinOp::Sle => {
                        let a = self.as_id(x, wl);
                        let c = self.as_id(y, wl);
                        let o = if *op == BinOp::Slt { VBinOp::Lt } else { VBinOp::Le };
                        plain(o, VExpr::Signed(a), VExpr::Signed(c))
                    }
                    BinOp::Udiv | BinOp::Urem => {
                        let c = self.as_id(y, wl);
                        let zero_div = plain(VBinOp::Eq, VExpr::Id(c.clone()), VExpr::Const(Bits::zero(wl)));
                        if *op == BinOp::Udiv {
                            let q = plain(VBinOp::Div, x, VExpr::Id(c));
                            VExpr::Ternary(b(zero_div), b(VExpr::Const(Bits::ones(w))), b(q))
                        } else {
                            let a = self.as_id(x, wl);
                            let r = plain(VBinOp::Mod, VExpr::Id(a.clone()), VExpr::Id(c));
                            VExpr::Ternary(b(zero_div), b(VExpr::Id(a)), b(r))
                        }
                    }
                    BinOp::Sdiv | BinOp::Srem => {
                        let a = self.as_id(x, wl);
                        let c = self.as_id(y, wl);
                        let vop = if *op == BinOp::Sdiv { VBinOp::Div } else { VBinOp::Mod };
                        let core = self.aux(plain(vop, VExpr::Signed(a.clone()), VExpr::Signed(c.clone())), w);
                        let zero_div = plain(VBinOp::Eq, VExpr::Id(c), VExpr::Const(Bits::zero(wl)));
                        let on_zero = if *op == BinOp::Sdiv { VExpr::Const(Bits::ones(w)) } else { VExpr::Id(a) };
                        VExpr::Ternary(b(zero_div), b(on_zero), b(VExpr::Id(core)))
                    }
                    BinOp::Ashr => {
                        let a = self.as_id(x, wl);
                        let sign = VExpr::Select(a.clone(), wl - 1, wl - 1);
                        let inv = VExpr::Unary(VUnOp::Not, b(VExpr::Id(a.clone())));
                        let filled = VExpr::Unary(VUnOp::Not, b(plain(VBinOp::Shr, inv, y.clone())));
                        let plain_shift = plain(VBinOp::Shr, VExpr::Id(a), y);
                        VExpr::Ternary(b(sign), b(filled), b(plain_shift))
                    }
                };
                (v, h)
            }
            Op::Ite(c, t, f) => {
                let (x, hx) = self.child(*c);
                let (y, hy) = self.child(*t);
                let (z, hz) = self.child(*f);
                (VExpr::Ternary(b(x), b(y), b(z)), hx.max(hy).max(hz) + 1)
            }
            Op::Extract(h, l, a) => {
                let (x, _) = self.child(*a);
                let id = self.as_id(x, pool.width(*a));
                (VExpr::Select(id, *h, *l), 0)
            }
            Op::Concat(hi, lo) => {
                let (x, hx) = self.child(*hi);
                let (y, hy) = self.child(*lo);
                let mut parts = Vec::new();
                for p in [x, y] {
                    match p {
                        VExpr::Concat(ps) => parts.extend(ps),
                        other => parts.push(other),
                    }
                }
                (VExpr::Concat(parts), hx.max(hy) + 1)
            }
            Op::Zext(a) => {
                let (x, h) = self.child(*a);
                let wa = pool.width(*a);
                (VExpr::Concat(vec![VExpr::Const(Bits::zero(w - wa)), x]), h + 1)
            }
            Op::Sext(a) => {
                let (x, _) = self.child(*a);
                let wa = pool.width(*a);
                let id = self.as_id(x, wa);
                let k = w - wa;
                let fill = VExpr::Ternary(
                    b(VExpr::Select(id.clone(), wa - 1, wa - 1)),
                    b(VExpr::Const(Bits::ones(k))),
                    b(VExpr::Const(Bits::zero(k))),
                );
                (VExpr::Concat(vec![fill, VExpr::Id(id)]), 1)
            }
        })
    }
}
