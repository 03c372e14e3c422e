//! Concrete interpreter over the typed program. It shares every semantic
//! decision with symbolic execution and serves as the reference in
//! differential tests.

use std::collections::{BTreeMap, HashMap};

use crate::bvir::Bits;
use crate::cfront::tast::*;
use crate::cfront::types::CType;
use crate::diag::{Code, Diagnostic, SourceLoc};
use crate::semantics::{interface, Interface, ObjectMap, ObligationKind, OFFSET_MASK};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssertEvent {
    pub loc: SourceLoc,
    pub message: String,
    pub held: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// Output values in interface order; undriven outputs are zero.
    pub outputs: Vec<(String, Bits)>,
    pub asserts: Vec<AssertEvent>,
    /// Runtime check failures, in execution order.
    pub violations: Vec<(ObligationKind, SourceLoc)>,
    /// Largest iteration count observed per loop site.
    pub loop_iterations: BTreeMap<String, u64>,
    pub steps: u64,
}

impl Outcome {
    pub fn output(&self, name: &str) -> Option<&Bits> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    pub fn all_asserts_held(&self) -> bool {
        self.asserts.iter().all(|a| a.held)
    }

    /// Whether some loop ran more iterations than `unwind` allows.
    pub fn exceeds_unwind(&self, unwind: u32) -> bool {
        self.loop_iterations.values().any(|&n| n > unwind as u64)
    }
}

/// Runs `entry` on the given input bit patterns.
pub fn interpret(
    prog: &TypedProgram,
    entry: FuncId,
    inputs: &HashMap<String, Bits>,
    fuel: u64,
) -> Result<Outcome, Diagnostic> {
    Interpreter::new(prog, entry)?.run(inputs, fuel)
}

/// An entry point prepared for repeated runs.
pub struct Interpreter<'p> {
    prog: &'p TypedProgram,
    entry: FuncId,
    iface: Interface,
    objs: ObjectMap,
    helpers: HashMap<String, FuncId>,
}

impl<'p> Interpreter<'p> {
    pub fn new(prog: &'p TypedProgram, entry: FuncId) -> Result<Self, Diagnostic> {
        Ok(Interpreter {
            prog,
            entry,
            iface: interface(prog, entry)?,
            objs: ObjectMap::new(prog),
            helpers: prog.functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect(),
        })
    }

    pub fn interface(&self) -> &Interface {
        &self.iface
    }

    pub fn run(&self, inputs: &HashMap<String, Bits>, fuel: u64) -> Result<Outcome, Diagnostic> {
        let (prog, entry, iface) = (self.prog, self.entry, &self.iface);
        for p in &iface.inputs {
            match inputs.get(&p.name) {
                Some(b) if b.width() == p.width => {}
                Some(b) => {
                    return Err(Diagnostic::bare(
                        Code::MissingInput,
                        format!("input '{}' needs {} bits, got {}", p.name, p.width, b.width()),
                    ))
                }
                None => return Err(Diagnostic::bare(Code::MissingInput, format!("no value for input '{}'", p.name))),
            }
        }
        let mem = self.objs.objects.iter().map(|o| vec![0u8; o.size as usize]).collect();
        let mut m = Machine {
            prog,
            objs: &self.objs,
            mem,
            func: entry,
            entry,
            ret: None,
            current: Vec::new(),
            fuel,
            steps: 0,
            inputs,
            iface,
            outputs: HashMap::new(),
            asserts: Vec::new(),
            violations: Vec::new(),
            loops: BTreeMap::new(),
            helpers: &self.helpers,
        };
        for (g, global) in prog.globals.iter().enumerate() {
            for item in &global.init {
                let v = m.eval(&item.value)?;
                let base = m.objs.code(entry, VarRef::Global(g)) << 32;
                m.store(base + item.offset, &item.value.ty, v, &item.value.loc);
            }
        }
        m.call(entry, Vec::new(), &prog.functions[entry].loc)?;
        let outputs = iface
            .outputs
            .iter()
            .map(|p| (p.name.clone(), m.outputs.get(&p.name).copied().unwrap_or_else(|| Bits::zero(p.width))))
            .collect();
        Ok(Outcome { outputs, asserts: m.asserts, violations: m.violations, loop_iterations: m.loops, steps: m.steps })
    }
}

/// A runtime value: scalars and records of up to eight bytes are packed
/// little-endian into a word.
#[derive(Clone, Debug, PartialEq, Eq)]
enum V {
    W(u64),
    B(Vec<u8>),
}

impl V {
    fn word(&self) -> u64 {
        match self {
            V::W(w) => *w,
            V::B(_) => panic!("aggregate used as a scalar"),
        }
    }

    fn bytes(&self, size: usize) -> Vec<u8> {
        match self {
            V::W(w) => w.to_le_bytes()[..size].to_vec(),
            V::B(b) => b.clone(),
        }
    }

    fn from_bytes(b: &[u8]) -> V {
        if b.len() <= 8 {
            let mut w = [0u8; 8];
            w[..b.len()].copy_from_slice(b);
            V::W(u64::from_le_bytes(w))
        } else {
            V::B(b.to_vec())
        }
    }
}

enum Flow {
    Normal,
    Break,
    Continue,
    Return,
}

pub(crate) fn mask(v: u64, w: u32) -> u64 {
    if w >= 64 {
        v
    } else {
        v & ((1u64 << w) - 1)
    }
}

pub(crate) fn sext(v: u64, w: u32) -> i64 {
    if w >= 64 {
        v as i64
    } else {
        let s = 64 - w;
        ((v << s) as i64) >> s
    }
}

fn width_of(t: &CType) -> u32 {
    t.scalar_bits().unwrap_or(64)
}

/// Integer operator semantics on `w`-bit patterns, matching [`Bits`].
pub(crate) fn arith(op: ArithOp, a: u64, b: u64, w: u32, signed: bool, bw: u32) -> u64 {
    let r = match op {
        ArithOp::Add => a.wrapping_add(b),
        ArithOp::Sub => a.wrapping_sub(b),
        ArithOp::Mul => a.wrapping_mul(b),
        ArithOp::And => a & b,
        ArithOp::Or => a | b,
        ArithOp::Xor => a ^ b,
        ArithOp::Div | ArithOp::Rem if b == 0 => {
            if op == ArithOp::Div {
                u64::MAX
            } else {
                a
            }
        }
        ArithOp::Div if signed => (sext(a, w) as i128 / sext(b, w) as i128) as u64,
        ArithOp::Rem if signed => (sext(a, w) as i128 % sext(b, w) as i128) as u64,
        ArithOp::Div => a / b,
        ArithOp::Rem => a % b,
        ArithOp::Shl | ArithOp::Shr => {
            let n = mask(b, bw);
            if n >= w as u64 {
                if op == ArithOp::Shr && signed && sext(a, w) < 0 {
                    u64::MAX
                } else {
                    0
                }
            } else if op == ArithOp::Shl {
                a << n
            } else if signed {
                (sext(a, w) >> n) as u64
            } else {
                a >> n
            }
        }
    };
    mask(r, w)
}

pub(crate) fn compare(op: CmpOp, a: u64, b: u64, w: u32, signed: bool) -> bool {
    let ord = if signed { sext(a, w).cmp(&sext(b, w)) } else { a.cmp(&b) };
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
    }
}

/// Scalar conversion between types, as performed by a cast node.
pub(crate) fn convert(v: u64, from: &CType, to: &CType) -> u64 {
    match to {
        CType::Void => 0,
        CType::Bool => (v != 0) as u64,
        _ => {
            let (fw, tw) = (width_of(from), width_of(to));
            if from.is_signed() && tw > fw {
                mask(sext(v, fw) as u64, tw)
            } else {
                mask(v, tw)
            }
        }
    }
}

pub(crate) fn ptr_add(p: u64, idx: u64, size: u64) -> u64 {
    (p & !OFFSET_MASK) | (p.wrapping_add(idx.wrapping_mul(size)) & OFFSET_MASK)
}

pub(crate) fn ptr_diff(a: u64, b: u64, size: u64) -> u64 {
    let d = (a.wrapping_sub(b) & OFFSET_MASK) as u32 as i32 as i64;
    (d as i128 / size as i128) as u64
}

struct Machine<'p> {
    prog: &'p TypedProgram,
    objs: &'p ObjectMap,
    mem: Vec<Vec<u8>>,
    func: FuncId,
    entry: FuncId,
    ret: Option<V>,
    current: Vec<V>,
    fuel: u64,
    steps: u64,
    inputs: &'p HashMap<String, Bits>,
    iface: &'p Interface,
    outputs: HashMap<String, Bits>,
    asserts: Vec<AssertEvent>,
    violations: Vec<(ObligationKind, SourceLoc)>,
    loops: BTreeMap<String, u64>,
    helpers: &'p HashMap<String, FuncId>,
}

type R<T> = Result<T, Diagnostic>;

impl Machine<'_> {
    fn tick(&mut self, loc: &SourceLoc) -> R<()> {
        self.steps += 1;
        if self.steps > self.fuel {
            return Err(Diagnostic::at(Code::FuelExhausted, loc, format!("step budget of {} exhausted", self.fuel)));
        }
        Ok(())
    }

    fn size(&self, t: &CType) -> u64 {
        self.prog.size_of(t)
    }

    /// Resolves a pointer to (object index, offset) when `size` bytes are
    /// accessible there, logging a check failure otherwise.
    fn locate(&mut self, ptr: u64, size: u64, loc: &SourceLoc) -> Option<(usize, usize)> {
        let code = ptr >> 32;
        let off = ptr & OFFSET_MASK;
        if code == 0 {
            self.violations.push((ObligationKind::NullDeref, loc.clone()));
            return None;
        }
        let idx = (code - 1) as usize;
        if idx >= self.mem.len() || off + size > self.mem[idx].len() as u64 {
            self.violations.push((ObligationKind::Bounds, loc.clone()));
            return None;
        }
        Some((idx, off as usize))
    }

    fn load(&mut self, ptr: u64, t: &CType, loc: &SourceLoc) -> V {
        let size = self.size(t);
        match self.locate(ptr, size, loc) {
            Some((i, o)) => V::from_bytes(&self.mem[i][o..o + size as usize]),
            None => V::from_bytes(&vec![0; size as usize]),
        }
    }

    fn store(&mut self, ptr: u64, t: &CType, v: V, loc: &SourceLoc) {
        let size = self.size(t) as usize;
        if let Some((i, o)) = self.locate(ptr, size as u64, loc) {
            self.mem[i][o..o + size].copy_from_slice(&v.bytes(size));
        }
    }

    fn var_addr(&self, r: VarRef) -> u64 {
        self.objs.code(self.func, r) << 32
    }

    fn addr(&mut self, e: &TExpr) -> R<u64> {
        match &e.kind {
            TExprKind::Var(r) => Ok(self.var_addr(*r)),
            TExprKind::Deref(p) => Ok(self.eval(p)?.word()),
            TExprKind::Member(b, off) if b.is_lvalue() => Ok(ptr_add(self.addr(b)?, *off, 1)),
            _ => Err(Diagnostic::at(Code::Unsupported, &e.loc, "expression has no address")),
        }
    }

    fn zero(&self, t: &CType) -> V {
        V::from_bytes(&vec![0; self.size(t) as usize])
    }

    fn eval(&mut self, e: &TExpr) -> R<V> {
        use TExprKind::*;
        let w = width_of(&e.ty);
        Ok(match &e.kind {
            Const(v) => V::W(*v),
            Var(_) | Deref(_) => {
                let a = self.addr(e)?;
                self.load(a, &e.ty, &e.loc)
            }
            Member(b, off) => {
                if b.is_lvalue() {
                    let a = self.addr(e)?;
                    self.load(a, &e.ty, &e.loc)
                } else {
                    let bsize = self.size(&b.ty) as usize;
                    let bytes = self.eval(b)?.bytes(bsize);
                    let o = *off as usize;
                    V::from_bytes(&bytes[o..o + self.size(&e.ty) as usize])
                }
            }
            FuncAddr(id) => V::W(self.prog.functions[*id].code.unwrap()),
            AddrOf(a) | Decay(a) => V::W(self.addr(a)?),
            Unary(op, a) => {
                let v = self.eval(a)?.word();
                V::W(match op {
                    UnOp::Neg => mask(v.wrapping_neg(), w),
                    UnOp::BitNot => mask(!v, w),
                    UnOp::LogNot => (v == 0) as u64,
                })
            }
            Binary(op, a, b) => {
                let x = self.eval(a)?.word();
                let y = self.eval(b)?.word();
                let bw = width_of(&b.ty);
                match op {
                    ArithOp::Div | ArithOp::Rem if y == 0 => {
                        self.violations.push((ObligationKind::DivByZero, e.loc.clone()))
                    }
                    ArithOp::Shl | ArithOp::Shr if mask(y, bw) >= w as u64 => {
                        self.violations.push((ObligationKind::Overshift, e.loc.clone()))
                    }
                    _ => {}
                }
                V::W(arith(*op, x, y, w, e.ty.is_signed(), bw))
            }
            Compare(op, a, b) => {
                let x = self.eval(a)?.word();
                let y = self.eval(b)?.word();
                V::W(compare(*op, x, y, width_of(&a.ty), a.ty.is_signed()) as u64)
            }
            Logical(and, a, b) => {
                let x = self.eval(a)?.word() != 0;
                if x != *and {
                    V::W(x as u64)
                } else {
                    V::W((self.eval(b)?.word() != 0) as u64)
                }
            }
            PtrAdd(p, i, size) => {
                let p = self.eval(p)?.word();
                let i = self.eval(i)?.word();
                V::W(ptr_add(p, i, *size))
            }
            PtrDiff(a, b, size) => {
                let x = self.eval(a)?.word();
                let y = self.eval(b)?.word();
                V::W(ptr_diff(x, y, *size))
            }
            Cond(c, a, b) => {
                if self.eval(c)?.word() != 0 {
                    self.eval(a)?
                } else {
                    self.eval(b)?
                }
            }
            Update { lhs, value, yield_old } => {
                let a = self.addr(lhs)?;
                let old = self.load(a, &lhs.ty, &lhs.loc);
                self.current.push(old.clone());
                let v = self.eval(value);
                self.current.pop();
                let v = v?;
                self.store(a, &lhs.ty, v.clone(), &e.loc);
                if *yield_old {
                    old
                } else {
                    v
                }
            }
            Current => self.current.last().expect("current value outside an update").clone(),
            Cast(a) => {
                let v = self.eval(a)?;
                match (&a.ty, &e.ty) {
                    (from, to) if from == to => v,
                    (_, CType::Void) => V::W(0),
                    (from, to) => V::W(convert(v.word(), from, to)),
                }
            }
            Float(op, args) => {
                let id = self.helpers[op.helper()];
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                self.call(id, vals, &e.loc)?
            }
            Call(id, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                self.call(*id, vals, &e.loc)?
            }
            CallIndirect(fp, args) => {
                let target = self.eval(fp)?.word();
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                let sig = fp.ty.pointee().cloned();
                let callee = self.prog.functions.iter().position(|f| {
                    f.code == Some(target) && Some(CType::Function(f.sig.clone())) == sig
                });
                match callee {
                    Some(id) => self.call(id, vals, &e.loc)?,
                    None => {
                        self.violations.push((ObligationKind::NullDeref, e.loc.clone()));
                        self.zero(&e.ty)
                    }
                }
            }
            Comma(a, b) => {
                self.eval(a)?;
                self.eval(b)?
            }
        })
    }

    fn call(&mut self, id: FuncId, args: Vec<V>, loc: &SourceLoc) -> R<V> {
        self.tick(loc)?;
        let prog = self.prog;
        let f = &prog.functions[id];
        let saved = std::mem::replace(&mut self.func, id);
        for (k, v) in args.into_iter().enumerate() {
            let a = self.var_addr(VarRef::Local(k));
            self.store(a, &f.locals[k].ty, v, loc);
        }
        let saved_ret = self.ret.take();
        let flow = self.block(f.body.as_deref().unwrap_or(&[]));
        let ret = std::mem::replace(&mut self.ret, saved_ret);
        self.func = saved;
        flow?;
        Ok(match ret {
            Some(v) => v,
            None if f.sig.ret == CType::Void => V::W(0),
            None => self.zero(&f.sig.ret),
        })
    }

    fn block(&mut self, body: &[Stmt]) -> R<Flow> {
        for s in body {
            match self.stmt(s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt) -> R<Flow> {
        match s {
            Stmt::Expr(e) => {
                self.tick(&e.loc)?;
                self.eval(e)?;
            }
            Stmt::Decl { var, init, loc } => {
                self.tick(loc)?;
                let idx = self.objs.index(self.func, VarRef::Local(*var));
                self.mem[idx].fill(0);
                let base = self.var_addr(VarRef::Local(*var));
                for item in init {
                    let v = self.eval(&item.value)?;
                    self.store(base + item.offset, &item.value.ty, v, &item.value.loc);
                }
            }
            Stmt::If { cond, then, els, loc } => {
                self.tick(loc)?;
                return if self.eval(cond)?.word() != 0 { self.block(then) } else { self.block(els) };
            }
            Stmt::Loop { id, cond, step, body, test_first, loc } => {
                let mut iters = 0u64;
                let result = loop {
                    self.tick(loc)?;
                    if *test_first {
                        if let Some(c) = cond {
                            if self.eval(c)?.word() == 0 {
                                break Flow::Normal;
                            }
                        }
                    }
                    iters += 1;
                    match self.block(body)? {
                        Flow::Break => break Flow::Normal,
                        Flow::Return => break Flow::Return,
                        Flow::Normal | Flow::Continue => {}
                    }
                    if let Some(s) = step {
                        self.eval(s)?;
                    }
                    if !*test_first {
                        if let Some(c) = cond {
                            if self.eval(c)?.word() == 0 {
                                break Flow::Normal;
                            }
                        }
                    }
                };
                let e = self.loops.entry(id.clone()).or_insert(0);
                *e = (*e).max(iters);
                return Ok(result);
            }
            Stmt::Switch { disc, labels, body, loc } => {
                self.tick(loc)?;
                let v = self.eval(disc)?.word();
                let start = labels
                    .iter()
                    .find(|(k, _)| *k == Some(v))
                    .or_else(|| labels.iter().find(|(k, _)| k.is_none()))
                    .map(|(_, i)| *i);
                if let Some(i) = start {
                    return Ok(match self.block(&body[i..])? {
                        Flow::Break | Flow::Normal => Flow::Normal,
                        other => other,
                    });
                }
            }
            Stmt::Break(_) => return Ok(Flow::Break),
            Stmt::Continue(_) => return Ok(Flow::Continue),
            Stmt::Return(e, loc) => {
                self.tick(loc)?;
                if let Some(e) = e {
                    let v = self.eval(e)?;
                    if e.ty != CType::Void {
                        self.ret = Some(v);
                    }
                }
                return Ok(Flow::Return);
            }
            Stmt::Block(b) => return self.block(b),
            Stmt::Assert { cond, msg, loc } => {
                self.tick(loc)?;
                let held = self.eval(cond)?.word() != 0;
                self.asserts.push(AssertEvent { loc: loc.clone(), message: msg.clone(), held });
            }
            Stmt::Sample { target, name, loc } => {
                self.check_entry(loc)?;
                let bits = self.inputs[name];
                let a = self.addr(target)?;
                self.store(a, &target.ty, V::from_bytes(&bits.to_le_bytes()), loc);
            }
            Stmt::Drive { value, name, loc } => {
                self.check_entry(loc)?;
                let size = self.size(&value.ty) as usize;
                let bytes = self.eval(value)?.bytes(size);
                let width = self.iface.outputs.iter().find(|p| &p.name == name).unwrap().width;
                self.outputs.insert(name.clone(), Bits::from_le_bytes(width, &bytes));
            }
        }
        Ok(Flow::Normal)
    }

    fn check_entry(&self, loc: &SourceLoc) -> R<()> {
        if self.func != self.entry {
            return Err(Diagnostic::at(Code::Interface, loc, "interface macro outside the entry function"));
        }
        Ok(())
    }
}
