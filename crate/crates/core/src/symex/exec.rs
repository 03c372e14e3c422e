//! Guarded single-stream symbolic execution. Branches run on copies of the
//! state and are joined with `ite`; every changed cell gets a fresh SSA
//! name at stores and joins.

use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use super::layout::{cells_of, Cell, Namer};
use super::{Equation, Obligation, SsaTrace, SymexOptions};
use crate::bvir::{simplify_with, BinOp, ExprId, ExprPool, Op};
use crate::cfront::tast::*;
use crate::cfront::types::CType;
use crate::diag::{Code, Diagnostic, SourceLoc};
use crate::semantics::{interface, Interface, ObjectMap, ObligationKind, OFFSET_MASK};

type R<T> = Result<T, Diagnostic>;

/// Widest value the expression layer can carry.
const MAX_VALUE_BITS: u64 = 512;
/// Largest number of distinct values tracked for a pointer component.
const VALUE_SET_CAP: usize = 256;

#[derive(Clone)]
struct State {
    guard: ExprId,
    mem: Vec<Rc<Vec<ExprId>>>,
}

type ValueSet = Option<Rc<Vec<u64>>>;

struct Target {
    obj: usize,
    sel: ExprId,
}

struct Exec<'p> {
    prog: &'p TypedProgram,
    opts: &'p SymexOptions,
    pool: ExprPool,
    objs: ObjectMap,
    /// Objects reachable through pointers; return slots follow them.
    addressable: usize,
    ret_obj: Vec<Option<usize>>,
    cells: Vec<Vec<Cell>>,
    byte_cell: Vec<Vec<u32>>,
    versions: HashMap<Arc<str>, u32>,
    state: State,
    func: FuncId,
    breaks: Vec<Vec<State>>,
    continues: Vec<Vec<State>>,
    returns: Vec<Vec<State>>,
    current: Vec<ExprId>,
    equations: Vec<Equation>,
    defs: HashMap<Arc<str>, ExprId>,
    obligations: Vec<Obligation>,
    iface: Interface,
    outputs: HashMap<String, ExprId>,
    input_locs: HashMap<String, SourceLoc>,
    output_locs: HashMap<String, SourceLoc>,
    vs_memo: HashMap<(ExprId, u32, u32), ValueSet>,
    simp_memo: HashMap<ExprId, ExprId>,
    helpers: HashMap<&'p str, FuncId>,
    loc: SourceLoc,
}

pub(super) fn run(prog: &TypedProgram, entry: FuncId, opts: &SymexOptions) -> R<SsaTrace> {
    let iface = interface(prog, entry)?;
    let objs = ObjectMap::new(prog);
    let mut pool = ExprPool::new();
    let ports: Vec<String> = iface.inputs.iter().chain(&iface.outputs).map(|p| p.name.clone()).collect();
    let mut namer = Namer::new(ports);

    let mut types: Vec<(String, CType)> = Vec::new();
    for g in &prog.globals {
        types.push((g.decl.name.clone(), g.decl.ty.clone()));
    }
    for (fi, f) in prog.functions.iter().enumerate() {
        for l in &f.locals {
            let base = if fi == entry { l.name.clone() } else { format!("{}_{}", f.name, l.name) };
            types.push((base, l.ty.clone()));
        }
    }
    debug_assert_eq!(types.len(), objs.len());
    let addressable = types.len();
    let mut ret_obj = vec![None; prog.functions.len()];
    for (fi, f) in prog.functions.iter().enumerate() {
        if f.sig.ret != CType::Void && f.body.is_some() {
            ret_obj[fi] = Some(types.len());
            types.push((format!("{}_ret", f.name), f.sig.ret.clone()));
        }
    }

    let mut cells = Vec::with_capacity(types.len());
    let mut byte_cell = Vec::with_capacity(types.len());
    let mut mem = Vec::with_capacity(types.len());
    let zero8 = pool.zero(8);
    for (base, ty) in &types {
        let size = prog.size_of(ty) as usize;
        let mut cs = Vec::new();
        let mut owner = vec![0u32; size];
        for (start, len, name) in cells_of(&prog.types, ty, base) {
            for b in &mut owner[start..start + len] {
                *b = cs.len() as u32;
            }
            cs.push(Cell { start, len, base: namer.fresh(&name) });
        }
        cells.push(cs);
        byte_cell.push(owner);
        mem.push(Rc::new(vec![zero8; size]));
    }

    let helpers = prog.functions.iter().enumerate().map(|(i, f)| (f.name.as_str(), i)).collect();
    let tru = pool.tru();
    let mut x = Exec {
        prog,
        opts,
        pool,
        objs,
        addressable,
        ret_obj,
        cells,
        byte_cell,
        versions: HashMap::new(),
        state: State { guard: tru, mem },
        func: entry,
        breaks: Vec::new(),
        continues: Vec::new(),
        returns: Vec::new(),
        current: Vec::new(),
        equations: Vec::new(),
        defs: HashMap::new(),
        obligations: Vec::new(),
        iface,
        outputs: HashMap::new(),
        input_locs: HashMap::new(),
        output_locs: HashMap::new(),
        vs_memo: HashMap::new(),
        simp_memo: HashMap::new(),
        helpers,
        loc: prog.functions[entry].loc.clone(),
    };

    for (g, global) in prog.globals.iter().enumerate() {
        for item in &global.init {
            x.loc = item.value.loc.clone();
            let v = x.eval(&item.value)?;
            let obj = x.objs.index(entry, VarRef::Global(g));
            x.write(obj, item.offset as usize, v);
        }
    }
    let loc = prog.functions[entry].loc.clone();
    x.call(entry, Vec::new(), &loc)?;

    let mut outputs = Vec::new();
    let mut output_locs = Vec::new();
    for p in &x.iface.outputs {
        let v = match x.outputs.get(&p.name) {
            Some(v) => *v,
            None => x.pool.zero(p.width),
        };
        outputs.push(v);
        output_locs.push(x.output_locs.get(&p.name).cloned().unwrap_or_else(|| loc.clone()));
    }
    let mut inputs = Vec::new();
    let mut input_locs = Vec::new();
    for p in &x.iface.inputs {
        inputs.push(x.pool.var(&p.name, p.width));
        input_locs.push(x.input_locs.get(&p.name).cloned().unwrap_or_else(|| loc.clone()));
    }
    Ok(SsaTrace {
        pool: x.pool,
        interface: x.iface,
        inputs,
        input_locs,
        outputs,
        output_locs,
        equations: x.equations,
        obligations: x.obligations,
    })
}

fn bits_of(size: u64) -> u32 {
    (size * 8) as u32
}

impl Exec<'_> {
    fn dead(&self) -> bool {
        self.pool.is_false(self.state.guard)
    }

    fn size(&self, t: &CType) -> u64 {
        self.prog.size_of(t)
    }

    fn width(&self, t: &CType, loc: &SourceLoc) -> R<u32> {
        let size = self.size(t);
        if size * 8 > MAX_VALUE_BITS {
            return Err(Diagnostic::at(
                Code::Unsupported,
                loc,
                format!("value of type '{}' is wider than {MAX_VALUE_BITS} bits", self.prog.types.display(t)),
            ));
        }
        Ok(bits_of(size.max(1)))
    }

    // ---- cells and equations ----

    fn trivial(&self, e: ExprId) -> bool {
        match self.pool.op(e) {
            Op::Const(_) | Op::Var(_) => true,
            Op::Extract(_, _, x) => matches!(self.pool.op(*x), Op::Var(_)),
            _ => false,
        }
    }

    /// Names `rhs` with the next version of `base` unless it is trivial.
    fn define(&mut self, base: &Arc<str>, rhs: ExprId) -> ExprId {
        let rhs = simplify_with(&mut self.pool, rhs, &mut self.simp_memo);
        if self.trivial(rhs) {
            return rhs;
        }
        let v = self.versions.entry(base.clone()).or_insert(0);
        *v += 1;
        let name: Arc<str> = format!("{base}_{v}").into();
        let w = self.pool.width(rhs);
        let var = self.pool.var(&name, w);
        self.equations.push(Equation { name: name.clone(), var, rhs, loc: self.loc.clone() });
        self.defs.insert(name, rhs);
        var
    }

    fn concat_bytes(&mut self, bytes: &[ExprId]) -> ExprId {
        let mut acc = bytes[0];
        for &b in &bytes[1..] {
            acc = self.pool.concat(b, acc);
        }
        acc
    }

    fn split_bytes(&mut self, v: ExprId, n: usize) -> Vec<ExprId> {
        (0..n).map(|k| self.pool.extract(8 * k as u32 + 7, 8 * k as u32, v)).collect()
    }

    /// Re-names the cells of `obj` overlapping bytes `lo..hi`.
    fn settle(&mut self, obj: usize, lo: usize, hi: usize) {
        if lo >= hi {
            return;
        }
        let first = self.byte_cell[obj][lo] as usize;
        let last = self.byte_cell[obj][hi - 1] as usize;
        for ci in first..=last {
            let (start, len, base) = {
                let c = &self.cells[obj][ci];
                (c.start, c.len, c.base.clone())
            };
            let bytes = self.state.mem[obj][start..start + len].to_vec();
            let value = self.concat_bytes(&bytes);
            if self.trivial(value) {
                continue;
            }
            let var = self.define(&base, value);
            let parts = self.split_bytes(var, len);
            Rc::make_mut(&mut self.state.mem[obj])[start..start + len].copy_from_slice(&parts);
        }
    }

    fn read(&mut self, obj: usize, off: usize, n: usize) -> ExprId {
        let bytes = self.state.mem[obj][off..off + n].to_vec();
        self.concat_bytes(&bytes)
    }

    fn write(&mut self, obj: usize, off: usize, v: ExprId) {
        let n = (self.pool.width(v) / 8) as usize;
        let parts = self.split_bytes(v, n);
        Rc::make_mut(&mut self.state.mem[obj])[off..off + n].copy_from_slice(&parts);
        self.settle(obj, off, off + n);
    }

    fn obj_size(&self, obj: usize) -> usize {
        self.state.mem[obj].len()
    }

    /// Joins states whose selectors are disjoint under the joined guard;
    /// the last state's selector is implied.
    fn merge(&mut self, arms: Vec<(ExprId, State)>) -> State {
        let mut live: Vec<(ExprId, State)> = arms.into_iter().filter(|(_, s)| !self.pool.is_false(s.guard)).collect();
        if live.is_empty() {
            let mut s = self.state.clone();
            s.guard = self.pool.fals();
            return s;
        }
        if live.len() == 1 {
            return live.pop().unwrap().1;
        }
        let mut guard = live[0].1.guard;
        for (_, s) in &live[1..] {
            guard = self.pool.or(guard, s.guard);
        }
        let mut mem = live[0].1.mem.clone();
        for obj in 0..mem.len() {
            if live[1..].iter().all(|(_, s)| Rc::ptr_eq(&s.mem[obj], &live[0].1.mem[obj])) {
                continue;
            }
            let ncells = self.cells[obj].len();
            let mut out = (*live[0].1.mem[obj]).clone();
            for ci in 0..ncells {
                let (start, len, base) = {
                    let c = &self.cells[obj][ci];
                    (c.start, c.len, c.base.clone())
                };
                let r = start..start + len;
                let same = live[1..].iter().all(|(_, s)| s.mem[obj][r.clone()] == live[0].1.mem[obj][r.clone()]);
                if same {
                    continue;
                }
                let last = live.len() - 1;
                let bytes = live[last].1.mem[obj][r.clone()].to_vec();
                let mut acc = self.concat_bytes(&bytes);
                for i in (0..last).rev() {
                    let bytes = live[i].1.mem[obj][r.clone()].to_vec();
                    let v = self.concat_bytes(&bytes);
                    acc = self.pool.ite(live[i].0, v, acc);
                }
                let var = self.define(&base, acc);
                let parts = self.split_bytes(var, len);
                out[r].copy_from_slice(&parts);
            }
            mem[obj] = Rc::new(out);
        }
        State { guard, mem }
    }

    /// Joins states using their own guards as selectors.
    fn merge_by_guard(&mut self, states: Vec<State>) -> State {
        let arms = states.into_iter().map(|s| (s.guard, s)).collect();
        self.merge(arms)
    }

    fn with_guard(&mut self, base: &State, cond: ExprId) -> State {
        let mut s = base.clone();
        s.guard = self.pool.and(base.guard, cond);
        s
    }

    // ---- obligations ----

    fn oblige(&mut self, kind: ObligationKind, claim: ExprId, loc: &SourceLoc, message: String, loop_id: Option<String>) {
        if self.dead() {
            return;
        }
        if kind != ObligationKind::UserAssert && self.pool.is_true(claim) {
            return;
        }
        self.obligations.push(Obligation { kind, guard: self.state.guard, claim, loc: loc.clone(), message, loop_id });
    }

    // ---- value sets ----

    /// Possible values of bits `hi..=lo` of `e`, or `None` when unknown.
    fn value_set(&mut self, e: ExprId, hi: u32, lo: u32) -> ValueSet {
        if let Some(v) = self.vs_memo.get(&(e, hi, lo)) {
            return v.clone();
        }
        let r = self.value_set_uncached(e, hi, lo);
        self.vs_memo.insert((e, hi, lo), r.clone());
        r
    }

    fn value_set_uncached(&mut self, e: ExprId, hi: u32, lo: u32) -> ValueSet {
        let single = |v: u64| Some(Rc::new(vec![v]));
        match self.pool.op(e).clone() {
            Op::Const(b) => single(b.extract(hi, lo).to_u64()),
            Op::Var(n) => {
                let d = *self.defs.get(&n)?;
                self.value_set(d, hi, lo)
            }
            Op::Ite(_, a, b) => {
                let x = self.value_set(a, hi, lo)?;
                let y = self.value_set(b, hi, lo)?;
                union(&x, &y)
            }
            Op::Extract(_, l, a) => self.value_set(a, hi + l, lo + l),
            Op::Concat(h, l) => {
                let wl = self.pool.width(l);
                if hi < wl {
                    self.value_set(l, hi, lo)
                } else if lo >= wl {
                    self.value_set(h, hi - wl, lo - wl)
                } else {
                    let top = self.value_set(h, hi - wl, 0)?;
                    let bottom = self.value_set(l, wl - 1, lo)?;
                    let shift = wl - lo;
                    combine(&top, &bottom, |t, b| (t << shift) | b)
                }
            }
            Op::Sext(a) if hi < self.pool.width(a) => self.value_set(a, hi, lo),
            Op::Bin(BinOp::And, a, b) | Op::Bin(BinOp::Or, a, b) | Op::Bin(BinOp::Xor, a, b) => {
                let op = match self.pool.op(e) {
                    Op::Bin(o, ..) => *o,
                    _ => unreachable!(),
                };
                let x = self.value_set(a, hi, lo)?;
                let y = self.value_set(b, hi, lo)?;
                combine(&x, &y, |p, q| match op {
                    BinOp::And => p & q,
                    BinOp::Or => p | q,
                    _ => p ^ q,
                })
            }
            Op::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) if lo == 0 => {
                let x = self.value_set(a, hi, 0)?;
                let y = self.value_set(b, hi, 0)?;
                let m = if hi >= 63 { u64::MAX } else { (1u64 << (hi + 1)) - 1 };
                combine(&x, &y, |p, q| if op == BinOp::Add { p.wrapping_add(q) & m } else { p.wrapping_sub(q) & m })
            }
            _ => None,
        }
    }

    // ---- memory access ----

    /// Resolves `ptr` for an access of `n` bytes, emitting null and bounds
    /// obligations.
    fn resolve(&mut self, ptr: ExprId, n: usize, loc: &SourceLoc) -> R<(ExprId, Vec<Target>)> {
        let code = self.pool.extract(63, 32, ptr);
        let off = self.pool.extract(31, 0, ptr);
        let set = self.value_set(ptr, 63, 32);
        let codes: Vec<u64> = match &set {
            Some(v) => v.to_vec(),
            None => (0..=self.addressable as u64).collect(),
        };
        let null_possible = codes.contains(&0);
        let valid: Vec<u64> = codes.iter().copied().filter(|&c| c != 0 && c as usize <= self.addressable).collect();
        if valid.is_empty() && !null_possible {
            return Err(Diagnostic::at(Code::WildPointer, loc, "pointer does not refer to any object"));
        }
        let exact = set.is_some() && valid.len() == 1 && codes.len() == 1;
        let mut targets = Vec::new();
        for c in valid {
            let sel = if exact {
                self.pool.tru()
            } else {
                let k = self.pool.const_u64(32, c);
                self.pool.eq(code, k)
            };
            targets.push(Target { obj: c as usize - 1, sel });
        }
        if self.opts.checks.null {
            let z = self.pool.zero(32);
            let claim = self.pool.ne(code, z);
            self.oblige(ObligationKind::NullDeref, claim, loc, "null pointer dereference".into(), None);
        }
        if self.opts.checks.bounds {
            let z = self.pool.zero(32);
            let mut claim = self.pool.eq(code, z);
            for t in &targets {
                let inb = self.in_bounds(t.obj, off, n);
                let ok = self.pool.and(t.sel, inb);
                claim = self.pool.or(claim, ok);
            }
            self.oblige(ObligationKind::Bounds, claim, loc, "pointer dereference out of bounds".into(), None);
        }
        Ok((off, targets))
    }

    fn in_bounds(&mut self, obj: usize, off: ExprId, n: usize) -> ExprId {
        let size = self.obj_size(obj);
        if n > size {
            return self.pool.fals();
        }
        let k = self.pool.const_u64(32, (size - n) as u64);
        self.pool.ule(off, k)
    }

    fn const_ptr(&self, ptr: ExprId) -> Option<(u64, u64)> {
        let p = self.pool.as_const(ptr)?.to_u64();
        Some((p >> 32, p & OFFSET_MASK))
    }

    /// The accessible object and offset for a constant pointer, if valid.
    fn const_target(&self, code: u64, off: u64, n: usize) -> Option<usize> {
        if code == 0 || code as usize > self.addressable {
            return None;
        }
        let obj = code as usize - 1;
        (off + n as u64 <= self.obj_size(obj) as u64).then_some(obj)
    }

    fn load(&mut self, ptr: ExprId, n: usize, loc: &SourceLoc) -> R<ExprId> {
        if let Some((code, off)) = self.const_ptr(ptr) {
            if let Some(obj) = self.const_target(code, off, n) {
                return Ok(self.read(obj, off as usize, n));
            }
        }
        let (off, targets) = self.resolve(ptr, n, loc)?;
        let w = bits_of(n as u64);
        let mut acc = self.pool.zero(w);
        for t in targets.iter().rev() {
            let v = self.read_at(t.obj, off, n);
            acc = self.pool.ite(t.sel, v, acc);
        }
        Ok(acc)
    }

    /// Reads `n` bytes at a symbolic offset; zero when out of bounds.
    fn read_at(&mut self, obj: usize, off: ExprId, n: usize) -> ExprId {
        let size = self.obj_size(obj);
        let w = bits_of(n as u64);
        if n > size {
            return self.pool.zero(w);
        }
        if let Some(o) = self.pool.as_const(off).map(|b| b.to_u64()) {
            return if o as usize + n <= size { self.read(obj, o as usize, n) } else { self.pool.zero(w) };
        }
        let inb = self.in_bounds(obj, off, n);
        let zero = self.pool.zero(w);
        let wide = bits_of(size as u64);
        let v = if wide as u64 <= MAX_VALUE_BITS {
            let content = self.read(obj, 0, size);
            let amt = self.byte_shift(off, wide);
            let shifted = self.pool.bin(BinOp::Lshr, content, amt);
            self.pool.extract(w - 1, 0, shifted)
        } else {
            let mut acc = zero;
            for o in (0..=size - n).rev() {
                let k = self.pool.const_u64(32, o as u64);
                let hit = self.pool.eq(off, k);
                let v = self.read(obj, o, n);
                acc = self.pool.ite(hit, v, acc);
            }
            acc
        };
        self.pool.ite(inb, v, zero)
    }

    /// `8 * off` in `width` bits.
    fn byte_shift(&mut self, off: ExprId, width: u32) -> ExprId {
        let o = self.pool.resize(off, width, false);
        let three = self.pool.const_u64(width, 3);
        self.pool.bin(BinOp::Shl, o, three)
    }

    fn store(&mut self, ptr: ExprId, v: ExprId, loc: &SourceLoc) -> R<()> {
        let n = (self.pool.width(v) / 8) as usize;
        if let Some((code, off)) = self.const_ptr(ptr) {
            if let Some(obj) = self.const_target(code, off, n) {
                self.write(obj, off as usize, v);
                return Ok(());
            }
        }
        let (off, targets) = self.resolve(ptr, n, loc)?;
        for t in targets {
            self.write_at(t.obj, off, v, t.sel);
        }
        Ok(())
    }

    fn write_at(&mut self, obj: usize, off: ExprId, v: ExprId, sel: ExprId) {
        let size = self.obj_size(obj);
        let n = (self.pool.width(v) / 8) as usize;
        if n > size {
            return;
        }
        if let Some(o) = self.pool.as_const(off).map(|b| b.to_u64() as usize) {
            if o + n <= size {
                self.write_bytes_if(obj, o, v, sel);
            }
            return;
        }
        let inb = self.in_bounds(obj, off, n);
        let cond = self.pool.and(sel, inb);
        let wide = bits_of(size as u64);
        if wide as u64 <= MAX_VALUE_BITS {
            let content = self.read(obj, 0, size);
            let amt = self.byte_shift(off, wide);
            let ones = self.pool.ones(bits_of(n as u64));
            let mask = self.pool.zext(ones, wide);
            let mask = self.pool.bin(BinOp::Shl, mask, amt);
            let hole = self.pool.not(mask);
            let kept = self.pool.and(content, hole);
            let ext = self.pool.zext(v, wide);
            let ins = self.pool.bin(BinOp::Shl, ext, amt);
            let updated = self.pool.or(kept, ins);
            let next = self.pool.ite(cond, updated, content);
            self.write(obj, 0, next);
        } else {
            for o in 0..=size - n {
                let k = self.pool.const_u64(32, o as u64);
                let hit = self.pool.eq(off, k);
                let c = self.pool.and(cond, hit);
                self.write_bytes_if(obj, o, v, c);
            }
        }
    }

    fn write_bytes_if(&mut self, obj: usize, o: usize, v: ExprId, cond: ExprId) {
        let n = (self.pool.width(v) / 8) as usize;
        if self.pool.is_true(cond) {
            self.write(obj, o, v);
            return;
        }
        let old = self.read(obj, o, n);
        let next = self.pool.ite(cond, v, old);
        self.write(obj, o, next);
    }

    fn var_ptr(&mut self, r: VarRef) -> ExprId {
        let code = self.objs.code(self.func, r);
        self.pool.const_u64(64, code << 32)
    }

    fn lvalue(&mut self, e: &TExpr) -> R<ExprId> {
        match &e.kind {
            TExprKind::Var(r) => Ok(self.var_ptr(*r)),
            TExprKind::Deref(p) => self.eval(p),
            TExprKind::Member(b, off) if b.is_lvalue() => {
                let p = self.lvalue(b)?;
                Ok(self.ptr_add(p, *off))
            }
            _ => Err(Diagnostic::at(Code::Unsupported, &e.loc, "expression has no address")),
        }
    }

    fn ptr_add(&mut self, p: ExprId, bytes: u64) -> ExprId {
        let k = self.pool.const_u64(32, bytes & OFFSET_MASK);
        self.ptr_add_expr(p, k)
    }

    fn ptr_add_expr(&mut self, p: ExprId, delta32: ExprId) -> ExprId {
        let hi = self.pool.extract(63, 32, p);
        let lo = self.pool.extract(31, 0, p);
        let lo = self.pool.add(lo, delta32);
        self.pool.concat(hi, lo)
    }

    // ---- expressions ----

    /// Whether evaluating `e` can neither change state nor raise an
    /// obligation, so it may run unconditionally.
    fn simple(&self, e: &TExpr) -> bool {
        let checks = self.opts.checks;
        let mut ok = true;
        e.walk(&mut |x| match &x.kind {
            TExprKind::Update { .. } | TExprKind::Call(..) | TExprKind::CallIndirect(..) | TExprKind::Float(..) => {
                ok = false
            }
            TExprKind::Deref(_) if checks.null || checks.bounds => ok = false,
            TExprKind::Binary(ArithOp::Div | ArithOp::Rem, ..) if checks.div => ok = false,
            TExprKind::Binary(ArithOp::Shl | ArithOp::Shr, ..) if checks.shift => ok = false,
            _ => {}
        });
        ok
    }

    /// Evaluates `a` under `c` and `b` under its negation, then joins.
    fn fork(&mut self, c: ExprId, a: &TExpr, b: Option<&TExpr>, wb: u32) -> R<(ExprId, ExprId)> {
        let base = self.state.clone();
        let nc = self.pool.not(c);
        self.state = self.with_guard(&base, c);
        let va = if self.dead() { self.dummy(&a.ty, &a.loc)? } else { self.eval(a)? };
        let other = self.with_guard(&base, nc);
        let sa = std::mem::replace(&mut self.state, other);
        let vb = match b {
            Some(b) if !self.dead() => self.eval(b)?,
            _ => self.pool.zero(wb),
        };
        let sb = std::mem::replace(&mut self.state, base);
        self.state = self.merge(vec![(c, sa), (nc, sb)]);
        Ok((va, vb))
    }

    fn dummy(&mut self, t: &CType, loc: &SourceLoc) -> R<ExprId> {
        let w = if *t == CType::Void { 8 } else { self.width(t, loc)? };
        Ok(self.pool.zero(w))
    }

    fn eval(&mut self, e: &TExpr) -> R<ExprId> {
        use TExprKind::*;
        Ok(match &e.kind {
            Const(v) => {
                let w = self.width(&e.ty, &e.loc)?;
                self.pool.const_u64(w, *v)
            }
            Var(_) | Deref(_) => {
                let a = self.lvalue(e)?;
                let n = self.size(&e.ty) as usize;
                self.width(&e.ty, &e.loc)?;
                self.load(a, n, &e.loc)?
            }
            Member(b, off) => {
                let n = self.size(&e.ty) as usize;
                if b.is_lvalue() {
                    self.width(&e.ty, &e.loc)?;
                    let a = self.lvalue(e)?;
                    self.load(a, n, &e.loc)?
                } else {
                    let v = self.eval(b)?;
                    let lo = (*off * 8) as u32;
                    self.pool.extract(lo + bits_of(n as u64) - 1, lo, v)
                }
            }
            FuncAddr(id) => self.pool.const_u64(64, self.prog.functions[*id].code.unwrap_or(0)),
            AddrOf(a) | Decay(a) => self.lvalue(a)?,
            Unary(op, a) => {
                let v = self.eval(a)?;
                match op {
                    UnOp::Neg => self.pool.neg(v),
                    UnOp::BitNot => self.pool.not(v),
                    UnOp::LogNot => {
                        let w = self.width(&e.ty, &e.loc)?;
                        let z = self.pool.zero(self.pool.width(v));
                        let b = self.pool.eq(v, z);
                        self.pool.zext(b, w)
                    }
                }
            }
            Binary(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                self.binary(*op, x, y, e)?
            }
            Compare(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                let s = a.ty.is_signed();
                let (lt, le) = if s { (BinOp::Slt, BinOp::Sle) } else { (BinOp::Ult, BinOp::Ule) };
                let r = match op {
                    CmpOp::Eq => self.pool.eq(x, y),
                    CmpOp::Ne => self.pool.ne(x, y),
                    CmpOp::Lt => self.pool.bin(lt, x, y),
                    CmpOp::Le => self.pool.bin(le, x, y),
                    CmpOp::Gt => self.pool.bin(lt, y, x),
                    CmpOp::Ge => self.pool.bin(le, y, x),
                };
                let w = self.width(&e.ty, &e.loc)?;
                self.pool.zext(r, w)
            }
            Logical(and, a, b) => {
                let va = self.eval(a)?;
                let xa = self.pool.nonzero(va);
                let r = if self.simple(b) {
                    let vb = self.eval(b)?;
                    let xb = self.pool.nonzero(vb);
                    if *and {
                        self.pool.and(xa, xb)
                    } else {
                        self.pool.or(xa, xb)
                    }
                } else {
                        let c = if *and { xa } else { self.pool.not(xa) };
                    let xb = if self.pool.is_false(c) {
                        self.pool.fals()
                    } else {
                        let wb = self.width(&b.ty, &b.loc)?;
                        let (vb, _) = self.fork(c, b, None, wb)?;
                        self.pool.nonzero(vb)
                    };
                    if *and {
                        self.pool.and(xa, xb)
                    } else {
                        self.pool.or(xa, xb)
                    }
                };
                let w = self.width(&e.ty, &e.loc)?;
                self.pool.zext(r, w)
            }
            PtrAdd(p, i, size) => {
                let pv = self.eval(p)?;
                let iv = self.eval(i)?;
                let i32v = self.pool.resize(iv, 32, false);
                let k = self.pool.const_u64(32, *size & OFFSET_MASK);
                let d = self.pool.bin(BinOp::Mul, i32v, k);
                self.ptr_add_expr(pv, d)
            }
            PtrDiff(a, b, size) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                let xl = self.pool.extract(31, 0, x);
                let yl = self.pool.extract(31, 0, y);
                let d = self.pool.sub(xl, yl);
                let d = self.pool.sext(d, 64);
                if *size == 1 {
                    d
                } else {
                    let k = self.pool.const_u64(64, *size);
                    self.pool.bin(BinOp::Sdiv, d, k)
                }
            }
            Cond(c, a, b) => {
                let vc = self.eval(c)?;
                let xc = self.pool.nonzero(vc);
                if let Some(k) = self.pool.as_const(xc).map(|k| k.bit(0)) {
                    return if k { self.eval(a) } else { self.eval(b) };
                }
                if e.ty == CType::Void {
                    self.fork(xc, a, Some(b), 8)?;
                    return Ok(self.pool.zero(8));
                }
                let (va, vb) = if self.simple(a) && self.simple(b) {
                    (self.eval(a)?, self.eval(b)?)
                } else {
                    let wb = self.width(&b.ty, &b.loc)?;
                    self.fork(xc, a, Some(b), wb)?
                };
                self.pool.ite(xc, va, vb)
            }
            Update { lhs, value, yield_old } => {
                let a = self.lvalue(lhs)?;
                let n = self.size(&lhs.ty) as usize;
                self.width(&lhs.ty, &lhs.loc)?;
                let old = self.load(a, n, &lhs.loc)?;
                self.current.push(old);
                let v = self.eval(value);
                self.current.pop();
                let v = v?;
                self.loc = e.loc.clone();
                self.store(a, v, &e.loc)?;
                if *yield_old {
                    old
                } else {
                    v
                }
            }
            Current => *self.current.last().expect("current value outside an update"),
            Cast(a) => {
                let v = self.eval(a)?;
                match (&a.ty, &e.ty) {
                    (from, to) if from == to => v,
                    (_, CType::Void) => self.pool.zero(8),
                    (_, CType::Bool) => {
                        let b = self.pool.nonzero(v);
                        self.pool.zext(b, 8)
                    }
                    (from, to) => {
                        let w = self.width(to, &e.loc)?;
                        self.pool.resize(v, w, from.is_signed())
                    }
                }
            }
            Float(op, args) => {
                let id = *self.helpers.get(op.helper()).ok_or_else(|| {
                    Diagnostic::at(Code::Unsupported, &e.loc, format!("missing float helper '{}'", op.helper()))
                })?;
                let vals = self.eval_args(args)?;
                self.call(id, vals, &e.loc)?
            }
            Call(id, args) => {
                let vals = self.eval_args(args)?;
                self.call(*id, vals, &e.loc)?
            }
            CallIndirect(fp, args) => {
                let fv = self.eval(fp)?;
                let vals = self.eval_args(args)?;
                self.call_indirect(fv, fp, vals, e)?
            }
            Comma(a, b) => {
                self.eval(a)?;
                self.eval(b)?
            }
        })
    }

    fn eval_args(&mut self, args: &[TExpr]) -> R<Vec<ExprId>> {
        args.iter().map(|a| self.eval(a)).collect()
    }

    fn binary(&mut self, op: ArithOp, x: ExprId, y: ExprId, e: &TExpr) -> R<ExprId> {
        let signed = e.ty.is_signed();
        Ok(match op {
            ArithOp::Add => self.pool.add(x, y),
            ArithOp::Sub => self.pool.sub(x, y),
            ArithOp::Mul => self.pool.bin(BinOp::Mul, x, y),
            ArithOp::And => self.pool.and(x, y),
            ArithOp::Or => self.pool.or(x, y),
            ArithOp::Xor => self.pool.xor(x, y),
            ArithOp::Div | ArithOp::Rem => {
                if self.opts.checks.div {
                    let claim = self.pool.nonzero(y);
                    self.oblige(ObligationKind::DivByZero, claim, &e.loc, "division by zero".into(), None);
                }
                let o = match (op, signed) {
                    (ArithOp::Div, true) => BinOp::Sdiv,
                    (ArithOp::Div, false) => BinOp::Udiv,
                    (_, true) => BinOp::Srem,
                    (_, false) => BinOp::Urem,
                };
                self.pool.bin(o, x, y)
            }
            ArithOp::Shl | ArithOp::Shr => {
                let w = self.pool.width(x);
                let bw = self.pool.width(y);
                let wk = self.pool.const_u64(bw, w as u64);
                let fits = self.pool.ult(y, wk);
                if self.opts.checks.shift {
                    self.oblige(ObligationKind::Overshift, fits, &e.loc, "shift amount exceeds the operand width".into(), None);
                }
                let amt = if bw <= w {
                    self.pool.zext(y, w)
                } else {
                    let low = self.pool.extract(w - 1, 0, y);
                    let sat = self.pool.const_u64(w, w as u64);
                    self.pool.ite(fits, low, sat)
                };
                let o = match (op, signed) {
                    (ArithOp::Shl, _) => BinOp::Shl,
                    (_, true) => BinOp::Ashr,
                    (_, false) => BinOp::Lshr,
                };
                self.pool.bin(o, x, amt)
            }
        })
    }

    fn call_indirect(&mut self, fv: ExprId, fp: &TExpr, args: Vec<ExprId>, e: &TExpr) -> R<ExprId> {
        let sig = fp.ty.pointee().cloned();
        let all: Vec<FuncId> = self
            .prog
            .functions
            .iter()
            .enumerate()
            .filter(|(_, f)| f.address_taken && f.code.is_some() && Some(CType::Function(f.sig.clone())) == sig)
            .map(|(i, _)| i)
            .collect();
        if all.is_empty() {
            return Err(Diagnostic::at(
                Code::NoCandidates,
                &e.loc,
                "no address-taken function matches the type of this indirect call",
            ));
        }
        let codes: Vec<(FuncId, u64)> = all.iter().map(|&f| (f, self.prog.functions[f].code.unwrap())).collect();
        if self.opts.checks.null {
            let mut claim = self.pool.fals();
            for &(_, c) in &codes {
                let k = self.pool.const_u64(64, c);
                let hit = self.pool.eq(fv, k);
                claim = self.pool.or(claim, hit);
            }
            self.oblige(ObligationKind::NullDeref, claim, &e.loc, "indirect call matches no candidate".into(), None);
        }
        let set = self.value_set(fv, 63, 0);
        let (cands, default_possible) = match &set {
            None => (codes.clone(), true),
            Some(vals) => (
                codes.iter().copied().filter(|(_, c)| vals.contains(c)).collect::<Vec<_>>(),
                vals.iter().any(|v| !codes.iter().any(|(_, c)| c == v)),
            ),
        };
        let exact = cands.len() == 1 && !default_possible;
        let w = if e.ty == CType::Void { 8 } else { self.width(&e.ty, &e.loc)? };
        let base = self.state.clone();
        let mut arms: Vec<(ExprId, State, ExprId)> = Vec::new();
        for &(f, c) in &cands {
            let sel = if exact {
                self.pool.tru()
            } else {
                let k = self.pool.const_u64(64, c);
                self.pool.eq(fv, k)
            };
            self.state = self.with_guard(&base, sel);
            if self.dead() {
                continue;
            }
            let v = self.call(f, args.clone(), &e.loc)?;
            let v = if e.ty == CType::Void { self.pool.zero(8) } else { v };
            arms.push((sel, std::mem::replace(&mut self.state, base.clone()), v));
        }
        if default_possible {
            let mut none = self.pool.tru();
            for &(_, c) in &cands {
                let k = self.pool.const_u64(64, c);
                let miss = self.pool.ne(fv, k);
                none = self.pool.and(none, miss);
            }
            let s = self.with_guard(&base, none);
            let z = self.pool.zero(w);
            arms.push((none, s, z));
        }
        let arms: Vec<_> = arms.into_iter().filter(|(_, s, _)| !self.pool.is_false(s.guard)).collect();
        if arms.is_empty() {
            let mut s = base;
            s.guard = self.pool.fals();
            self.state = s;
            return Ok(self.pool.zero(w));
        }
        let mut value = arms.last().unwrap().2;
        for (sel, _, v) in arms[..arms.len() - 1].iter().rev() {
            value = self.pool.ite(*sel, *v, value);
        }
        let states = arms.into_iter().map(|(sel, s, _)| (sel, s)).collect();
        self.state = self.merge(states);
        Ok(value)
    }

    fn call(&mut self, id: FuncId, args: Vec<ExprId>, loc: &SourceLoc) -> R<ExprId> {
        let prog = self.prog;
        let f = &prog.functions[id];
        let body = f.body.as_deref().ok_or_else(|| {
            Diagnostic::at(Code::Unsupported, loc, format!("function '{}' has no body", f.name))
        })?;
        let saved = std::mem::replace(&mut self.func, id);
        for (k, v) in args.into_iter().enumerate() {
            let obj = self.objs.index(id, VarRef::Local(k));
            self.loc = loc.clone();
            self.write(obj, 0, v);
        }
        if let Some(r) = self.ret_obj[id] {
            let n = self.obj_size(r);
            let z = self.pool.zero(bits_of(n as u64));
            self.write(r, 0, z);
        }
        self.returns.push(Vec::new());
        let saved_breaks = std::mem::take(&mut self.breaks);
        let saved_conts = std::mem::take(&mut self.continues);
        let result = self.block(body);
        self.breaks = saved_breaks;
        self.continues = saved_conts;
        let mut rets = self.returns.pop().unwrap();
        result?;
        self.loc = f.loc.clone();
        if !rets.is_empty() {
            rets.push(self.state.clone());
            self.state = self.merge_by_guard(rets);
        }
        self.func = saved;
        Ok(match self.ret_obj[id] {
            Some(r) => {
                let n = self.obj_size(r);
                self.read(r, 0, n)
            }
            None => self.pool.zero(8),
        })
    }

    // ---- statements ----

    fn block(&mut self, body: &[Stmt]) -> R<()> {
        for s in body {
            if self.dead() {
                break;
            }
            self.stmt(s)?;
        }
        Ok(())
    }

    fn cond_exit(&mut self, cond: &Option<TExpr>, exits: &mut Vec<State>) -> R<()> {
        if let Some(c) = cond {
            let v = self.eval(c)?;
            let b = self.pool.nonzero(v);
            let nb = self.pool.not(b);
            let st = self.state.clone();
            exits.push(self.with_guard(&st, nb));
            self.state = self.with_guard(&st, b);
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> R<()> {
        match s {
            Stmt::Expr(e) => {
                self.loc = e.loc.clone();
                self.eval(e)?;
            }
            Stmt::Decl { var, init, loc } => {
                self.loc = loc.clone();
                let obj = self.objs.index(self.func, VarRef::Local(*var));
                let z = self.pool.zero(8);
                let n = self.obj_size(obj);
                Rc::make_mut(&mut self.state.mem[obj]).fill(z);
                self.settle(obj, 0, n);
                for item in init {
                    let v = self.eval(&item.value)?;
                    self.loc = item.value.loc.clone();
                    self.write(obj, item.offset as usize, v);
                }
            }
            Stmt::If { cond, then, els, loc } => {
                self.loc = loc.clone();
                let v = self.eval(cond)?;
                let c = self.pool.nonzero(v);
                if let Some(k) = self.pool.as_const(c).map(|k| k.bit(0)) {
                    return self.block(if k { then } else { els });
                }
                let base = self.state.clone();
                let nc = self.pool.not(c);
                self.state = self.with_guard(&base, c);
                self.block(then)?;
                let other = self.with_guard(&base, nc);
                let st = std::mem::replace(&mut self.state, other);
                self.block(els)?;
                let se = std::mem::replace(&mut self.state, base);
                self.loc = loc.clone();
                self.state = self.merge(vec![(c, st), (nc, se)]);
            }
            Stmt::Loop { id, cond, step, body, test_first, loc } => {
                let bound = self.opts.unwind_overrides.get(id).copied().unwrap_or(self.opts.unwind);
                let mut exits = Vec::new();
                for _ in 0..bound {
                    if self.dead() {
                        break;
                    }
                    self.loc = loc.clone();
                    if *test_first {
                        self.cond_exit(cond, &mut exits)?;
                        if self.dead() {
                            break;
                        }
                    }
                    self.breaks.push(Vec::new());
                    self.continues.push(Vec::new());
                    let r = self.block(body);
                    let mut conts = self.continues.pop().unwrap();
                    let brks = self.breaks.pop().unwrap();
                    r?;
                    exits.extend(brks);
                    self.loc = loc.clone();
                    if !conts.is_empty() {
                        conts.push(self.state.clone());
                        self.state = self.merge_by_guard(conts);
                    }
                    if self.dead() {
                        break;
                    }
                    if let Some(st) = step {
                        self.eval(st)?;
                    }
                    if !*test_first {
                        self.cond_exit(cond, &mut exits)?;
                    }
                }
                if !self.dead() {
                    self.loc = loc.clone();
                    if *test_first {
                        self.cond_exit(cond, &mut exits)?;
                    }
                    if self.opts.unwinding_assertions {
                        let f = self.pool.fals();
                        self.oblige(
                            ObligationKind::Unwinding,
                            f,
                            loc,
                            format!("unwinding assertion loop {id}"),
                            Some(id.clone()),
                        );
                    }
                    self.state.guard = self.pool.fals();
                }
                if self.opts.unwinding_assertions
                    && !self.obligations.iter().any(|o| o.loop_id.as_deref() == Some(id.as_str()))
                {
                    // the bound suffices on every path; keep the site visible
                    let f = self.pool.fals();
                    self.obligations.push(Obligation {
                        kind: ObligationKind::Unwinding,
                        guard: f,
                        claim: f,
                        loc: loc.clone(),
                        message: format!("unwinding assertion loop {id}"),
                        loop_id: Some(id.clone()),
                    });
                }
                self.loc = loc.clone();
                exits.push(self.state.clone());
                self.state = self.merge_by_guard(exits);
            }
            Stmt::Switch { disc, labels, body, loc } => {
                self.loc = loc.clone();
                let v = self.eval(disc)?;
                let w = self.pool.width(v);
                let base = self.state.clone();
                let mut hits = Vec::new();
                for (k, _) in labels {
                    if let Some(k) = k {
                        let kc = self.pool.const_u64(w, *k);
                        hits.push(self.pool.eq(v, kc));
                    }
                }
                let mut any = self.pool.fals();
                for &h in &hits {
                    any = self.pool.or(any, h);
                }
                let no_match = self.pool.not(any);
                let mut cur = base.clone();
                cur.guard = self.pool.fals();
                self.breaks.push(Vec::new());
                let mut hit_iter = 0;
                let mut label_cond: Vec<Option<ExprId>> = vec![None; body.len() + 1];
                for (k, at) in labels {
                    let c = match k {
                        Some(_) => {
                            hit_iter += 1;
                            hits[hit_iter - 1]
                        }
                        None => no_match,
                    };
                    label_cond[*at] = Some(match label_cond[*at] {
                        Some(prev) => self.pool.or(prev, c),
                        None => c,
                    });
                }
                let mut result = Ok(());
                for (i, st) in body.iter().enumerate() {
                    if let Some(c) = label_cond[i] {
                        let entry = self.with_guard(&base, c);
                        self.loc = loc.clone();
                        cur = self.merge_by_guard(vec![cur, entry]);
                    }
                    self.state = cur;
                    if !self.dead() {
                        if let Err(err) = self.stmt(st) {
                            result = Err(err);
                            cur = self.state.clone();
                            break;
                        }
                    }
                    cur = self.state.clone();
                }
                let mut states = self.breaks.pop().unwrap();
                result?;
                states.push(cur);
                if !labels.iter().any(|(k, _)| k.is_none()) {
                    states.push(self.with_guard(&base, no_match));
                }
                self.loc = loc.clone();
                self.state = self.merge_by_guard(states);
            }
            Stmt::Break(_) => {
                let st = self.state.clone();
                self.breaks.last_mut().expect("break outside a loop or switch").push(st);
                self.state.guard = self.pool.fals();
            }
            Stmt::Continue(_) => {
                let st = self.state.clone();
                self.continues.last_mut().expect("continue outside a loop").push(st);
                self.state.guard = self.pool.fals();
            }
            Stmt::Return(e, loc) => {
                self.loc = loc.clone();
                if let Some(e) = e {
                    let v = self.eval(e)?;
                    if let (Some(r), false) = (self.ret_obj[self.func], e.ty == CType::Void) {
                        self.write(r, 0, v);
                    }
                }
                let st = self.state.clone();
                self.returns.last_mut().expect("return outside a function").push(st);
                self.state.guard = self.pool.fals();
            }
            Stmt::Block(b) => self.block(b)?,
            Stmt::Assert { cond, msg, loc } => {
                self.loc = loc.clone();
                let v = self.eval(cond)?;
                let claim = self.pool.nonzero(v);
                self.oblige(ObligationKind::UserAssert, claim, loc, msg.clone(), None);
            }
            Stmt::Sample { target, name, loc } => {
                self.loc = loc.clone();
                let w = self.width(&target.ty, loc)?;
                let input = self.pool.var(name, w);
                let a = self.lvalue(target)?;
                self.store(a, input, loc)?;
                self.input_locs.entry(name.clone()).or_insert_with(|| loc.clone());
            }
            Stmt::Drive { value, name, loc } => {
                self.loc = loc.clone();
                let v = self.eval(value)?;
                let width = self.iface.outputs.iter().find(|p| &p.name == name).map(|p| p.width).unwrap_or(0);
                let v = self.pool.resize(v, width, false);
                let prev = match self.outputs.get(name) {
                    Some(p) => *p,
                    None => self.pool.zero(width),
                };
                let next = self.pool.ite(self.state.guard, v, prev);
                self.outputs.insert(name.clone(), next);
                self.output_locs.entry(name.clone()).or_insert_with(|| loc.clone());
            }
        }
        Ok(())
    }
}

fn union(x: &Rc<Vec<u64>>, y: &Rc<Vec<u64>>) -> ValueSet {
    let mut v: Vec<u64> = x.iter().chain(y.iter()).copied().collect();
    v.sort_unstable();
    v.dedup();
    (v.len() <= VALUE_SET_CAP).then(|| Rc::new(v))
}

fn combine(x: &Rc<Vec<u64>>, y: &Rc<Vec<u64>>, f: impl Fn(u64, u64) -> u64) -> ValueSet {
    if x.len() * y.len() > VALUE_SET_CAP * 4 {
        return None;
    }
    let mut v: Vec<u64> = Vec::with_capacity(x.len() * y.len());
    for &a in x.iter() {
        for &b in y.iter() {
            v.push(f(a, b));
        }
    }
    v.sort_unstable();
    v.dedup();
    (v.len() <= VALUE_SET_CAP).then(|| Rc::new(v))
}
