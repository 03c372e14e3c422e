//! Tseitin bit-blasting of expression DAGs into CNF.
//!
//! Gates are structurally hashed and constant-propagated, so identical
//! sub-circuits share literals. Adders are ripple-carry, multipliers
//! shift-and-add, dividers restoring arrays, shifters logarithmic mux
//! ladders, and comparisons inspect the borrow of a subtraction.

use std::collections::HashMap;
use std::sync::Arc;

use super::sat::{Cnf, Lit};
use crate::bvir::{BinOp, ExprId, ExprPool, Op};

pub struct Blaster<'a> {
    pool: &'a ExprPool,
    defs: &'a HashMap<Arc<str>, ExprId>,
    pub cnf: Cnf,
    tru: Lit,
    /// Literal vector per blasted node, bit 0 first.
    pub bits: HashMap<ExprId, Vec<Lit>>,
    inputs: Vec<(Arc<str>, Vec<Lit>)>,
    input_index: HashMap<Arc<str>, usize>,
    and_cache: HashMap<(Lit, Lit), Lit>,
    xor_cache: HashMap<(Lit, Lit), Lit>,
    mux_cache: HashMap<(Lit, Lit, Lit), Lit>,
}

impl<'a> Blaster<'a> {
    /// `defs` maps defined variables to their right-hand sides; every other
    /// variable is a free input.
    pub fn new(pool: &'a ExprPool, defs: &'a HashMap<Arc<str>, ExprId>) -> Self {
        let mut cnf = Cnf::new();
        let t = cnf.new_var();
        let tru = Lit::new(t, true);
        cnf.add_clause(vec![tru]);
        Blaster {
            pool,
            defs,
            cnf,
            tru,
            bits: HashMap::new(),
            inputs: Vec::new(),
            input_index: HashMap::new(),
            and_cache: HashMap::new(),
            xor_cache: HashMap::new(),
            mux_cache: HashMap::new(),
        }
    }

    pub fn tru(&self) -> Lit {
        self.tru
    }

    pub fn fals(&self) -> Lit {
        !self.tru
    }

    fn konst(&self, b: bool) -> Lit {
        if b {
            self.tru
        } else {
            !self.tru
        }
    }

    fn is_const(&self, l: Lit) -> Option<bool> {
        if l == self.tru {
            Some(true)
        } else if l == !self.tru {
            Some(false)
        } else {
            None
        }
    }

    /// Free variables met so far with their bit literals.
    pub fn inputs(&self) -> &[(Arc<str>, Vec<Lit>)] {
        &self.inputs
    }

    fn fresh(&mut self) -> Lit {
        Lit::new(self.cnf.new_var(), true)
    }

    pub fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.is_const(a), self.is_const(b)) {
            (Some(false), _) | (_, Some(false)) => return self.fals(),
            (Some(true), _) => return b,
            (_, Some(true)) => return a,
            _ => {}
        }
        if a == b {
            return a;
        }
        if a == !b {
            return self.fals();
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&g) = self.and_cache.get(&key) {
            return g;
        }
        let g = self.fresh();
        self.cnf.add_clause(vec![!g, a]);
        self.cnf.add_clause(vec![!g, b]);
        self.cnf.add_clause(vec![g, !a, !b]);
        self.and_cache.insert(key, g);
        g
    }

    pub fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and2(!a, !b)
    }

    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        match (self.is_const(a), self.is_const(b)) {
            (Some(x), _) => return if x { !b } else { b },
            (_, Some(y)) => return if y { !a } else { a },
            _ => {}
        }
        if a == b {
            return self.fals();
        }
        if a == !b {
            return self.tru;
        }
        // normalise polarity so that xor(a, b) and xor(!a, !b) share a gate
        let (mut a, mut b, mut neg) = (a, b, false);
        if !a.is_positive() {
            a = !a;
            neg = !neg;
        }
        if !b.is_positive() {
            b = !b;
            neg = !neg;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        let g = if let Some(&g) = self.xor_cache.get(&key) {
            g
        } else {
            let g = self.fresh();
            self.cnf.add_clause(vec![!g, a, b]);
            self.cnf.add_clause(vec![!g, !a, !b]);
            self.cnf.add_clause(vec![g, !a, b]);
            self.cnf.add_clause(vec![g, a, !b]);
            self.xor_cache.insert(key, g);
            g
        };
        if neg {
            !g
        } else {
            g
        }
    }

    /// `s ? a : b`.
    pub fn mux(&mut self, s: Lit, a: Lit, b: Lit) -> Lit {
        if let Some(c) = self.is_const(s) {
            return if c { a } else { b };
        }
        if a == b {
            return a;
        }
        match (self.is_const(a), self.is_const(b)) {
            (Some(true), _) => return self.or2(s, b),
            (Some(false), _) => return self.and2(!s, b),
            (_, Some(true)) => return self.or2(!s, a),
            (_, Some(false)) => return self.and2(s, a),
            _ => {}
        }
        if a == !b {
            return !self.xor2(s, a);
        }
        let key = (s, a, b);
        if let Some(&g) = self.mux_cache.get(&key) {
            return g;
        }
        let g = self.fresh();
        self.cnf.add_clause(vec![!s, !a, g]);
        self.cnf.add_clause(vec![!s, a, !g]);
        self.cnf.add_clause(vec![s, !b, g]);
        self.cnf.add_clause(vec![s, b, !g]);
        // redundant but helps propagation
        self.cnf.add_clause(vec![!a, !b, g]);
        self.cnf.add_clause(vec![a, b, !g]);
        self.mux_cache.insert(key, g);
        g
    }

    /// Sum and carry of a full adder.
    fn full_add(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let ab = self.xor2(a, b);
        let sum = self.xor2(ab, c);
        let t1 = self.and2(a, b);
        let t2 = self.and2(ab, c);
        let carry = self.or2(t1, t2);
        (sum, carry)
    }

    /// Ripple-carry `a + b + cin`; returns sum bits and the carry out.
    fn adder(&mut self, a: &[Lit], b: &[Lit], cin: Lit) -> (Vec<Lit>, Lit) {
        let mut carry = cin;
        let mut out = Vec::with_capacity(a.len());
        for (x, y) in a.iter().zip(b) {
            let (s, c) = self.full_add(*x, *y, carry);
            out.push(s);
            carry = c;
        }
        (out, carry)
    }

    fn sub(&mut self, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Lit) {
        let nb: Vec<Lit> = b.iter().map(|l| !*l).collect();
        let t = self.tru;
        self.adder(a, &nb, t)
    }

    fn neg(&mut self, a: &[Lit]) -> Vec<Lit> {
        let zero = vec![self.fals(); a.len()];
        self.sub(&zero, a).0
    }

    fn ult(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        // a - b borrows iff a < b; the adder carry is the inverted borrow
        !self.sub(a, b).1
    }

    fn eq(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        let mut acc = self.tru;
        for (x, y) in a.iter().zip(b) {
            let d = self.xor2(*x, *y);
            acc = self.and2(acc, !d);
        }
        acc
    }

    fn mul(&mut self, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        let mut acc = vec![self.fals(); w];
        for i in 0..w {
            if self.is_const(b[i]) == Some(false) {
                continue;
            }
            let pp: Vec<Lit> = (0..w - i).map(|k| self.and2(a[k], b[i])).collect();
            let f = self.fals();
            let (sum, _) = self.adder(&acc[i..], &pp, f);
            acc[i..].copy_from_slice(&sum);
        }
        acc
    }

    /// Restoring division; a zero divisor yields (all-ones, dividend).
    fn udivrem(&mut self, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let w = a.len();
        let mut q = vec![self.fals(); w];
        let mut r = vec![self.fals(); w];
        let mut bx = b.to_vec();
        bx.push(self.fals());
        for i in (0..w).rev() {
            let mut shifted = Vec::with_capacity(w + 1);
            shifted.push(a[i]);
            shifted.extend_from_slice(&r);
            let (diff, no_borrow) = self.sub(&shifted, &bx);
            q[i] = no_borrow;
            r = (0..w).map(|k| self.mux(no_borrow, diff[k], shifted[k])).collect();
        }
        (q, r)
    }

    fn abs(&mut self, a: &[Lit]) -> Vec<Lit> {
        let sign = *a.last().unwrap();
        let n = self.neg(a);
        a.iter().zip(&n).map(|(x, y)| self.mux(sign, *y, *x)).collect()
    }

    fn cond_neg(&mut self, c: Lit, a: &[Lit]) -> Vec<Lit> {
        let n = self.neg(a);
        a.iter().zip(&n).map(|(x, y)| self.mux(c, *y, *x)).collect()
    }

    fn is_zero(&mut self, a: &[Lit]) -> Lit {
        let mut acc = self.tru;
        for x in a {
            acc = self.and2(acc, !*x);
        }
        acc
    }

    fn shift(&mut self, a: &[Lit], amt: &[Lit], op: BinOp) -> Vec<Lit> {
        let w = a.len();
        let fill = match op {
            BinOp::Ashr => *a.last().unwrap(),
            _ => self.fals(),
        };
        let mut cur = a.to_vec();
        let mut over = self.fals();
        for (k, &s) in amt.iter().enumerate() {
            let dist = if k < 32 { 1usize << k } else { usize::MAX };
            if dist >= w {
                over = self.or2(over, s);
                continue;
            }
            let shifted: Vec<Lit> = (0..w)
                .map(|i| match op {
                    BinOp::Shl => {
                        if i >= dist {
                            cur[i - dist]
                        } else {
                            fill
                        }
                    }
                    _ => {
                        if i + dist < w {
                            cur[i + dist]
                        } else {
                            fill
                        }
                    }
                })
                .collect();
            cur = (0..w).map(|i| self.mux(s, shifted[i], cur[i])).collect();
        }
        cur.iter().map(|&x| self.mux(over, fill, x)).collect()
    }

    fn var_bits(&mut self, name: &Arc<str>, width: u32) -> Vec<Lit> {
        if let Some(&i) = self.input_index.get(name) {
            return self.inputs[i].1.clone();
        }
        let bits: Vec<Lit> = (0..width).map(|_| self.fresh()).collect();
        self.input_index.insert(name.clone(), self.inputs.len());
        self.inputs.push((name.clone(), bits.clone()));
        bits
    }

    /// Literal vector for `root`, blasting whatever is not cached yet.
    pub fn blast(&mut self, root: ExprId) -> Vec<Lit> {
        let mut stack = vec![(root, false)];
        while let Some((e, expanded)) = stack.pop() {
            if self.bits.contains_key(&e) {
                continue;
            }
            let op = self.pool.op(e).clone();
            if !expanded {
                stack.push((e, true));
                let kids: Vec<ExprId> = match &op {
                    Op::Var(n) => self.defs.get(n).copied().into_iter().collect(),
                    other => other.children().collect(),
                };
                for k in kids.into_iter().rev() {
                    if !self.bits.contains_key(&k) {
                        stack.push((k, false));
                    }
                }
                continue;
            }
            let width = self.pool.width(e);
            let g = |x: &ExprId, s: &Self| s.bits[x].clone();
            let out: Vec<Lit> = match &op {
                Op::Const(b) => (0..width).map(|i| self.konst(b.bit(i))).collect(),
                Op::Var(n) => match self.defs.get(n) {
                    Some(d) => g(d, self),
                    None => self.var_bits(n, width),
                },
                Op::Not(a) => g(a, self).iter().map(|l| !*l).collect(),
                Op::Neg(a) => {
                    let a = g(a, self);
                    self.neg(&a)
                }
                Op::Bin(o, a, b) => {
                    let (a, b) = (g(a, self), g(b, self));
                    self.bin(*o, &a, &b)
                }
                Op::Ite(c, a, b) => {
                    let c = g(c, self)[0];
                    let (a, b) = (g(a, self), g(b, self));
                    a.iter().zip(&b).map(|(x, y)| self.mux(c, *x, *y)).collect()
                }
                Op::Extract(h, l, a) => g(a, self)[*l as usize..=*h as usize].to_vec(),
                Op::Concat(h, l) => {
                    let mut v = g(l, self);
                    v.extend(g(h, self));
                    v
                }
                Op::Zext(a) => {
                    let mut v = g(a, self);
                    v.resize(width as usize, self.fals());
                    v
                }
                Op::Sext(a) => {
                    let mut v = g(a, self);
                    let s = *v.last().unwrap();
                    v.resize(width as usize, s);
                    v
                }
            };
            debug_assert_eq!(out.len(), width as usize);
            self.bits.insert(e, out);
        }
        self.bits[&root].clone()
    }

    fn bin(&mut self, o: BinOp, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let w = a.len();
        match o {
            BinOp::And => a.iter().zip(b).map(|(x, y)| self.and2(*x, *y)).collect(),
            BinOp::Or => a.iter().zip(b).map(|(x, y)| self.or2(*x, *y)).collect(),
            BinOp::Xor => a.iter().zip(b).map(|(x, y)| self.xor2(*x, *y)).collect(),
            BinOp::Add => {
                let f = self.fals();
                self.adder(a, b, f).0
            }
            BinOp::Sub => self.sub(a, b).0,
            BinOp::Mul => self.mul(a, b),
            BinOp::Udiv => self.udivrem(a, b).0,
            BinOp::Urem => self.udivrem(a, b).1,
            BinOp::Sdiv => {
                let (sa, sb) = (a[w - 1], b[w - 1]);
                let (ua, ub) = (self.abs(a), self.abs(b));
                let (q, _) = self.udivrem(&ua, &ub);
                let flip = self.xor2(sa, sb);
                let q = self.cond_neg(flip, &q);
                let bz = self.is_zero(b);
                let t = self.tru;
                q.iter().map(|&x| self.mux(bz, t, x)).collect()
            }
            BinOp::Srem => {
                let sa = a[w - 1];
                let (ua, ub) = (self.abs(a), self.abs(b));
                let (_, r) = self.udivrem(&ua, &ub);
                self.cond_neg(sa, &r)
            }
            BinOp::Shl | BinOp::Lshr | BinOp::Ashr => self.shift(a, b, o),
            BinOp::Eq => vec![self.eq(a, b)],
            BinOp::Ult => vec![self.ult(a, b)],
            BinOp::Ule => vec![!self.ult(b, a)],
            BinOp::Slt | BinOp::Sle => {
                let mut fa = a.to_vec();
                let mut fb = b.to_vec();
                fa[w - 1] = !fa[w - 1];
                fb[w - 1] = !fb[w - 1];
                if o == BinOp::Slt {
                    vec![self.ult(&fa, &fb)]
                } else {
                    vec![!self.ult(&fb, &fa)]
                }
            }
        }
    }
}
