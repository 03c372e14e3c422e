//! Hash-consed bitvector expression DAG.

use std::collections::HashMap;
use std::sync::Arc;

use super::bits::{Bits, MAX_WIDTH};
use crate::diag::{Code, Diagnostic, SourceLoc};

/// Handle to a node inside an [`ExprPool`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(pub(crate) u32);

impl ExprId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Mul,
    Udiv,
    Urem,
    Sdiv,
    Srem,
    Shl,
    Lshr,
    Ashr,
    Eq,
    Ult,
    Ule,
    Slt,
    Sle,
}

impl BinOp {
    pub const ALL: [BinOp; 18] = [
        BinOp::And,
        BinOp::Or,
        BinOp::Xor,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Udiv,
        BinOp::Urem,
        BinOp::Sdiv,
        BinOp::Srem,
        BinOp::Shl,
        BinOp::Lshr,
        BinOp::Ashr,
        BinOp::Eq,
        BinOp::Ult,
        BinOp::Ule,
        BinOp::Slt,
        BinOp::Sle,
    ];

    pub fn is_predicate(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ult | BinOp::Ule | BinOp::Slt | BinOp::Sle)
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Xor | BinOp::Add | BinOp::Mul | BinOp::Eq)
    }

    pub fn name(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Xor => "xor",
            BinOp::Add => "add",
            BinOp::Sub => "sub",
            BinOp::Mul => "mul",
            BinOp::Udiv => "udiv",
            BinOp::Urem => "urem",
            BinOp::Sdiv => "sdiv",
            BinOp::Srem => "srem",
            BinOp::Shl => "shl",
            BinOp::Lshr => "lshr",
            BinOp::Ashr => "ashr",
            BinOp::Eq => "eq",
            BinOp::Ult => "ult",
            BinOp::Ule => "ule",
            BinOp::Slt => "slt",
            BinOp::Sle => "sle",
        }
    }

    pub fn apply(self, a: &Bits, b: &Bits) -> Bits {
        match self {
            BinOp::And => a.and(b),
            BinOp::Or => a.or(b),
            BinOp::Xor => a.xor(b),
            BinOp::Add => a.add(b),
            BinOp::Sub => a.sub(b),
            BinOp::Mul => a.mul(b),
            BinOp::Udiv => a.udiv(b),
            BinOp::Urem => a.urem(b),
            BinOp::Sdiv => a.sdiv(b),
            BinOp::Srem => a.srem(b),
            BinOp::Shl => a.shl(b),
            BinOp::Lshr => a.lshr(b),
            BinOp::Ashr => a.ashr(b),
            BinOp::Eq => Bits::from_bool(a == b),
            BinOp::Ult => Bits::from_bool(a.ult(b)),
            BinOp::Ule => Bits::from_bool(a.ule(b)),
            BinOp::Slt => Bits::from_bool(a.slt(b)),
            BinOp::Sle => Bits::from_bool(a.sle(b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Const(Bits),
    Var(Arc<str>),
    Not(ExprId),
    Neg(ExprId),
    Bin(BinOp, ExprId, ExprId),
    Ite(ExprId, ExprId, ExprId),
    /// `hi`, `lo`, operand.
    Extract(u32, u32, ExprId),
    /// High part, low part.
    Concat(ExprId, ExprId),
    /// Zero extension to the node width.
    Zext(ExprId),
    /// Sign extension to the node width.
    Sext(ExprId),
}

impl Op {
    pub fn children(&self) -> impl Iterator<Item = ExprId> {
        let v: [Option<ExprId>; 3] = match *self {
            Op::Const(_) | Op::Var(_) => [None, None, None],
            Op::Not(a) | Op::Neg(a) | Op::Extract(_, _, a) | Op::Zext(a) | Op::Sext(a) => [Some(a), None, None],
            Op::Bin(_, a, b) | Op::Concat(a, b) => [Some(a), Some(b), None],
            Op::Ite(c, a, b) => [Some(c), Some(a), Some(b)],
        };
        v.into_iter().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub width: u32,
}

/// Owns every node of one compilation context. Structurally equal nodes
/// share one id.
#[derive(Clone, Debug, Default)]
pub struct ExprPool {
    nodes: Vec<Node>,
    table: HashMap<Node, ExprId>,
    locs: Vec<Option<SourceLoc>>,
    cur_loc: Option<SourceLoc>,
}

fn mismatch(msg: String) -> Diagnostic {
    Diagnostic::bare(Code::WidthMismatch, msg)
}

impl ExprPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, e: ExprId) -> &Node {
        &self.nodes[e.index()]
    }

    pub fn op(&self, e: ExprId) -> &Op {
        &self.nodes[e.index()].op
    }

    pub fn width(&self, e: ExprId) -> u32 {
        self.nodes[e.index()].width
    }

    pub fn loc(&self, e: ExprId) -> Option<&SourceLoc> {
        self.locs[e.index()].as_ref()
    }

    /// Location attached to nodes created from now on.
    pub fn set_loc(&mut self, loc: Option<SourceLoc>) {
        self.cur_loc = loc;
    }

    pub fn as_const(&self, e: ExprId) -> Option<&Bits> {
        match &self.nodes[e.index()].op {
            Op::Const(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_true(&self, e: ExprId) -> bool {
        matches!(self.as_const(e), Some(b) if b.width() == 1 && b.bit(0))
    }

    pub fn is_false(&self, e: ExprId) -> bool {
        matches!(self.as_const(e), Some(b) if b.width() == 1 && !b.bit(0))
    }

    pub fn var_name(&self, e: ExprId) -> Option<&Arc<str>> {
        match &self.nodes[e.index()].op {
            Op::Var(n) => Some(n),
            _ => None,
        }
    }

    fn intern(&mut self, node: Node) -> ExprId {
        if let Some(&id) = self.table.get(&node) {
            return id;
        }
        let id = ExprId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.locs.push(self.cur_loc.clone());
        self.table.insert(node, id);
        id
    }

    /// Computes the sort of `op`, checking every width rule.
    pub fn sort_of(&self, op: &Op, target_width: Option<u32>) -> Result<u32, Diagnostic> {
        let w = |e: ExprId| self.width(e);
        let width = match *op {
            Op::Const(b) => b.width(),
            Op::Var(_) => target_width.ok_or_else(|| mismatch("variable needs an explicit width".into()))?,
            Op::Not(a) | Op::Neg(a) => w(a),
            Op::Bin(bop, a, b) => {
                if w(a) != w(b) {
                    return Err(mismatch(format!("{} operands have widths {} and {}", bop.name(), w(a), w(b))));
                }
                if bop.is_predicate() {
                    1
                } else {
                    w(a)
                }
            }
            Op::Ite(c, a, b) => {
                if w(c) != 1 {
                    return Err(mismatch(format!("ite condition has width {}", w(c))));
                }
                if w(a) != w(b) {
                    return Err(mismatch(format!("ite arms have widths {} and {}", w(a), w(b))));
                }
                w(a)
            }
            Op::Extract(hi, lo, a) => {
                if lo > hi || hi >= w(a) {
                    return Err(mismatch(format!("extract [{hi}:{lo}] of width {}", w(a))));
                }
                hi - lo + 1
            }
            Op::Concat(a, b) => w(a) + w(b),
            Op::Zext(a) | Op::Sext(a) => {
                let t = target_width.ok_or_else(|| mismatch("extension needs a target width".into()))?;
                if t < w(a) {
                    return Err(mismatch(format!("extension from {} to {t}", w(a))));
                }
                t
            }
        };
        if width == 0 || width > MAX_WIDTH {
            return Err(mismatch(format!("width {width} outside 1..={MAX_WIDTH}")));
        }
        if let Some(t) = target_width {
            if t != width {
                return Err(mismatch(format!("expected width {t}, got {width}")));
            }
        }
        Ok(width)
    }

    /// Interns `op` as-is after checking its sort. `width` is required for
    /// variables and extensions and otherwise checked against the result.
    pub fn raw(&mut self, op: Op, width: Option<u32>) -> Result<ExprId, Diagnostic> {
        let width = self.sort_of(&op, width)?;
        if let Op::Const(b) = &op {
            debug_assert_eq!(b.width(), width);
        }
        Ok(self.intern(Node { op, width }))
    }

    pub fn constant(&mut self, b: Bits) -> ExprId {
        let width = b.width();
        self.intern(Node { op: Op::Const(b), width })
    }

    pub fn const_u64(&mut self, width: u32, v: u64) -> ExprId {
        self.constant(Bits::from_u64(width, v))
    }

    pub fn tru(&mut self) -> ExprId {
        self.const_u64(1, 1)
    }

    pub fn fals(&mut self) -> ExprId {
        self.const_u64(1, 0)
    }

    pub fn zero(&mut self, width: u32) -> ExprId {
        self.constant(Bits::zero(width))
    }

    pub fn ones(&mut self, width: u32) -> ExprId {
        self.constant(Bits::ones(width))
    }

    pub fn var(&mut self, name: &str, width: u32) -> ExprId {
        assert!((1..=MAX_WIDTH).contains(&width), "variable {name} has width {width}");
        self.intern(Node { op: Op::Var(Arc::from(name)), width })
    }

    /// Re-interns a node through the simplifying constructors.
    pub fn build(&mut self, op: Op, width: u32) -> ExprId {
        match op {
            Op::Const(b) => self.constant(b),
            Op::Var(n) => self.intern(Node { op: Op::Var(n), width }),
            Op::Not(a) => self.not(a),
            Op::Neg(a) => self.neg(a),
            Op::Bin(o, a, b) => self.bin(o, a, b),
            Op::Ite(c, a, b) => self.ite(c, a, b),
            Op::Extract(h, l, a) => self.extract(h, l, a),
            Op::Concat(a, b) => self.concat(a, b),
            Op::Zext(a) => self.zext(a, width),
            Op::Sext(a) => self.sext(a, width),
        }
    }

    pub fn not(&mut self, a: ExprId) -> ExprId {
        if let Some(c) = self.as_const(a) {
            let r = c.not();
            return self.constant(r);
        }
        if let Op::Not(x) = *self.op(a) {
            return x;
        }
        let width = self.width(a);
        self.intern(Node { op: Op::Not(a), width })
    }

    pub fn neg(&mut self, a: ExprId) -> ExprId {
        if let Some(c) = self.as_const(a) {
            let r = c.neg();
            return self.constant(r);
        }
        if let Op::Neg(x) = *self.op(a) {
            return x;
        }
        let width = self.width(a);
        self.intern(Node { op: Op::Neg(a), width })
    }

    pub fn and(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::And, a, b)
    }
    pub fn or(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Or, a, b)
    }
    pub fn xor(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Xor, a, b)
    }
    pub fn add(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Add, a, b)
    }
    pub fn sub(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Sub, a, b)
    }
    pub fn eq(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Eq, a, b)
    }
    pub fn ne(&mut self, a: ExprId, b: ExprId) -> ExprId {
        let e = self.eq(a, b);
        self.not(e)
    }
    pub fn ult(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Ult, a, b)
    }
    pub fn ule(&mut self, a: ExprId, b: ExprId) -> ExprId {
        self.bin(BinOp::Ule, a, b)
    }
    pub fn implies(&mut self, a: ExprId, b: ExprId) -> ExprId {
        let na = self.not(a);
        self.or(na, b)
    }

    /// `e != 0` as a width-1 expression.
    pub fn nonzero(&mut self, e: ExprId) -> ExprId {
        if self.width(e) == 1 {
            return e;
        }
        let z = self.zero(self.width(e));
        self.ne(e, z)
    }

    pub fn bin(&mut self, op: BinOp, a: ExprId, b: ExprId) -> ExprId {
        let w = self.width(a);
        debug_assert_eq!(w, self.width(b), "{} width mismatch", op.name());
        let (mut a, mut b) = (a, b);
        if op.is_commutative() {
            let (ca, cb) = (self.as_const(a).is_some(), self.as_const(b).is_some());
            if (ca && !cb) || (ca == cb && a > b) {
                std::mem::swap(&mut a, &mut b);
            }
        }
        if let (Some(x), Some(y)) = (self.as_const(a), self.as_const(b)) {
            let r = op.apply(x, y);
            return self.constant(r);
        }
        if let Some(r) = self.rewrite_bin(op, a, b, w) {
            return r;
        }
        let width = if op.is_predicate() { 1 } else { w };
        self.intern(Node { op: Op::Bin(op, a, b), width })
    }

    fn complementary(&self, a: ExprId, b: ExprId) -> bool {
        matches!(*self.op(a), Op::Not(x) if x == b) || matches!(*self.op(b), Op::Not(x) if x == a)
    }

    fn rewrite_bin(&mut self, op: BinOp, a: ExprId, b: ExprId, w: u32) -> Option<ExprId> {
        // after normalisation a constant operand of a commutative op sits in `b`
        let cb = self.as_const(b).copied();
        let ca = self.as_const(a).copied();
        let b_zero = cb.is_some_and(|c| c.is_zero());
        let b_ones = cb.is_some_and(|c| c.is_ones());
        let b_one = cb.is_some_and(|c| c.fits_u64() && c.to_u64() == 1);
        match op {
            BinOp::And => {
                if b_zero || self.complementary(a, b) {
                    return Some(self.zero(w));
                }
                if b_ones || a == b {
                    return Some(a);
                }
            }
            BinOp::Or => {
                if b_ones || self.complementary(a, b) {
                    return Some(self.ones(w));
                }
                if b_zero || a == b {
                    return Some(a);
                }
            }
            BinOp::Xor => {
                if a == b {
                    return Some(self.zero(w));
                }
                if b_zero {
                    return Some(a);
                }
                if b_ones {
                    return Some(self.not(a));
                }
            }
            BinOp::Add => {
                if b_zero {
                    return Some(a);
                }
            }
            BinOp::Sub => {
                if b_zero {
                    return Some(a);
                }
                if a == b {
                    return Some(self.zero(w));
                }
            }
            BinOp::Mul => {
                if b_zero {
                    return Some(self.zero(w));
                }
                if b_one {
                    return Some(a);
                }
            }
            BinOp::Udiv | BinOp::Sdiv => {
                if b_one {
                    return Some(a);
                }
            }
            BinOp::Urem => {
                if b_one {
                    return Some(self.zero(w));
                }
            }
            BinOp::Srem => {
                if b_one {
                    return Some(self.zero(w));
                }
            }
            BinOp::Shl | BinOp::Lshr | BinOp::Ashr => {
                if b_zero {
                    return Some(a);
                }
                if ca.is_some_and(|c| c.is_zero()) {
                    return Some(a);
                }
                let over = cb.is_some_and(|c| !c.fits_u64() || c.to_u64() >= w as u64);
                if over && op != BinOp::Ashr {
                    return Some(self.zero(w));
                }
            }
            BinOp::Eq => {
                if a == b {
                    return Some(self.tru());
                }
                if w == 1 {
                    if let Some(c) = cb {
                        return Some(if c.bit(0) { a } else { self.not(a) });
                    }
                }
                if self.complementary(a, b) {
                    return Some(self.fals());
                }
                if let (Op::Ite(c, x, y), Some(k)) = (self.op(a).clone(), cb) {
                    if let (Some(kx), Some(ky)) = (self.as_const(x).copied(), self.as_const(y).copied()) {
                        let (ex, ey) = (self.constant(Bits::from_bool(kx == k)), self.constant(Bits::from_bool(ky == k)));
                        return Some(self.ite(c, ex, ey));
                    }
                }
            }
            BinOp::Ult => {
                if a == b || b_zero {
                    return Some(self.fals());
                }
            }
            BinOp::Ule => {
                if a == b || b_ones || ca.is_some_and(|c| c.is_zero()) {
                    return Some(self.tru());
                }
            }
            BinOp::Slt => {
                if a == b {
                    return Some(self.fals());
                }
            }
            BinOp::Sle => {
                if a == b {
                    return Some(self.tru());
                }
            }
        }
        None
    }

    pub fn ite(&mut self, c: ExprId, a: ExprId, b: ExprId) -> ExprId {
        debug_assert_eq!(self.width(c), 1);
        debug_assert_eq!(self.width(a), self.width(b));
        if let Some(k) = self.as_const(c) {
            return if k.bit(0) { a } else { b };
        }
        if a == b {
            return a;
        }
        if let Op::Not(nc) = *self.op(c) {
            return self.ite(nc, b, a);
        }
        if let Op::Ite(c2, x, _) = *self.op(a) {
            if c2 == c {
                return self.ite(c, x, b);
            }
        }
        if let Op::Ite(c2, _, y) = *self.op(b) {
            if c2 == c {
                return self.ite(c, a, y);
            }
        }
        if self.width(a) == 1 {
            match (self.as_const(a).map(|k| k.bit(0)), self.as_const(b).map(|k| k.bit(0))) {
                (Some(true), Some(false)) => return c,
                (Some(false), Some(true)) => return self.not(c),
                (Some(true), None) => return self.or(c, b),
                (Some(false), None) => {
                    let nc = self.not(c);
                    return self.and(nc, b);
                }
                (None, Some(false)) => return self.and(c, a),
                (None, Some(true)) => {
                    let nc = self.not(c);
                    return self.or(nc, a);
                }
                _ => {}
            }
        }
        let width = self.width(a);
        self.intern(Node { op: Op::Ite(c, a, b), width })
    }

    pub fn extract(&mut self, hi: u32, lo: u32, a: ExprId) -> ExprId {
        let wa = self.width(a);
        debug_assert!(lo <= hi && hi < wa, "extract [{hi}:{lo}] of width {wa}");
        if lo == 0 && hi + 1 == wa {
            return a;
        }
        if let Some(k) = self.as_const(a) {
            let r = k.extract(hi, lo);
            return self.constant(r);
        }
        match *self.op(a) {
            Op::Extract(_, l2, x) => return self.extract(hi + l2, lo + l2, x),
            Op::Concat(h, l) => {
                let wl = self.width(l);
                if hi < wl {
                    return self.extract(hi, lo, l);
                }
                if lo >= wl {
                    return self.extract(hi - wl, lo - wl, h);
                }
                let top = self.extract(hi - wl, 0, h);
                let bottom = self.extract(wl - 1, lo, l);
                return self.concat(top, bottom);
            }
            Op::Zext(x) => {
                let wx = self.width(x);
                if hi < wx {
                    return self.extract(hi, lo, x);
                }
                if lo >= wx {
                    return self.zero(hi - lo + 1);
                }
            }
            Op::Sext(x) => {
                if hi < self.width(x) {
                    return self.extract(hi, lo, x);
                }
            }
            Op::Ite(c, x, y)
                if self.as_const(x).is_some() && self.as_const(y).is_some() => {
                    let ex = self.extract(hi, lo, x);
                    let ey = self.extract(hi, lo, y);
                    return self.ite(c, ex, ey);
                }
            _ => {}
        }
        self.intern(Node { op: Op::Extract(hi, lo, a), width: hi - lo + 1 })
    }

    /// Merges two adjacent parts into a single non-concat node when a local
    /// rule applies.
    fn fuse(&mut self, h: ExprId, l: ExprId) -> Option<ExprId> {
        if let (Some(x), Some(y)) = (self.as_const(h), self.as_const(l)) {
            let r = x.concat(y);
            return Some(self.constant(r));
        }
        match (self.op(h).clone(), self.op(l).clone()) {
            (Op::Extract(h1, l1, x), Op::Extract(h2, l2, y)) if x == y && l1 == h2 + 1 => Some(self.extract(h1, l2, x)),
            (Op::Ite(c1, a1, b1), Op::Ite(c2, a2, b2)) if c1 == c2 => {
                let t = self.concat(a1, a2);
                let e = self.concat(b1, b2);
                Some(self.ite(c1, t, e))
            }
            _ => None,
        }
    }

    pub fn concat(&mut self, h: ExprId, l: ExprId) -> ExprId {
        if let Some(r) = self.fuse(h, l) {
            return r;
        }
        // right-nested normal form
        if let Op::Concat(hh, hl) = *self.op(h) {
            let inner = self.concat(hl, l);
            return self.concat(hh, inner);
        }
        if let Op::Concat(m, rest) = *self.op(l) {
            if let Some(f) = self.fuse(h, m) {
                return self.concat(f, rest);
            }
        }
        let width = self.width(h) + self.width(l);
        self.intern(Node { op: Op::Concat(h, l), width })
    }

    pub fn zext(&mut self, a: ExprId, width: u32) -> ExprId {
        let wa = self.width(a);
        debug_assert!(width >= wa);
        if width == wa {
            return a;
        }
        let z = self.zero(width - wa);
        self.concat(z, a)
    }

    pub fn sext(&mut self, a: ExprId, width: u32) -> ExprId {
        let wa = self.width(a);
        debug_assert!(width >= wa);
        if width == wa {
            return a;
        }
        if let Some(k) = self.as_const(a) {
            let r = k.sext(width);
            return self.constant(r);
        }
        if let Op::Sext(x) = *self.op(a) {
            return self.sext(x, width);
        }
        self.intern(Node { op: Op::Sext(a), width })
    }

    /// Truncates or extends `a` to `width` (zero or sign fill).
    pub fn resize(&mut self, a: ExprId, width: u32, signed: bool) -> ExprId {
        let wa = self.width(a);
        if width < wa {
            self.extract(width - 1, 0, a)
        } else if signed {
            self.sext(a, width)
        } else {
            self.zext(a, width)
        }
    }

    /// Nodes reachable from `roots`, children before parents.
    pub fn postorder(&self, roots: &[ExprId]) -> Vec<ExprId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack: Vec<(ExprId, bool)> = roots.iter().rev().map(|&r| (r, false)).collect();
        while let Some((e, expanded)) = stack.pop() {
            if expanded {
                out.push(e);
                continue;
            }
            if seen[e.index()] {
                continue;
            }
            seen[e.index()] = true;
            stack.push((e, true));
            let kids: Vec<ExprId> = self.op(e).children().collect();
            for k in kids.into_iter().rev() {
                if !seen[k.index()] {
                    stack.push((k, false));
                }
            }
        }
        out
    }

    /// Variables reachable from `roots` in first-visit order.
    pub fn vars(&self, roots: &[ExprId]) -> Vec<ExprId> {
        self.postorder(roots).into_iter().filter(|e| matches!(self.op(*e), Op::Var(_))).collect()
    }

    /// Copies `e` from `other` into this pool through the simplifying
    /// constructors.
    pub fn import(&mut self, other: &ExprPool, e: ExprId, memo: &mut HashMap<ExprId, ExprId>) -> ExprId {
        for n in other.postorder(&[e]) {
            if memo.contains_key(&n) {
                continue;
            }
            let node = other.node(n);
            let m = |x: ExprId| memo[&x];
            let op = match &node.op {
                Op::Const(b) => Op::Const(*b),
                Op::Var(v) => Op::Var(v.clone()),
                Op::Not(a) => Op::Not(m(*a)),
                Op::Neg(a) => Op::Neg(m(*a)),
                Op::Bin(o, a, b) => Op::Bin(*o, m(*a), m(*b)),
                Op::Ite(c, a, b) => Op::Ite(m(*c), m(*a), m(*b)),
                Op::Extract(h, l, a) => Op::Extract(*h, *l, m(*a)),
                Op::Concat(a, b) => Op::Concat(m(*a), m(*b)),
                Op::Zext(a) => Op::Zext(m(*a)),
                Op::Sext(a) => Op::Sext(m(*a)),
            };
            let id = self.build(op, node.width);
            memo.insert(n, id);
        }
        memo[&e]
    }
}
