//! Bottom-up rewriting to the pool's normal form.

use std::collections::HashMap;

use super::expr::{ExprId, ExprPool, Op};

/// Rebuilds `e` through the simplifying constructors until it no longer
/// changes. The result is equivalent to `e` for every assignment and has
/// the same width.
pub fn simplify(pool: &mut ExprPool, e: ExprId) -> ExprId {
    let mut memo = HashMap::new();
    simplify_with(pool, e, &mut memo)
}

/// Like [`simplify`], sharing `memo` across several roots.
pub fn simplify_with(pool: &mut ExprPool, e: ExprId, memo: &mut HashMap<ExprId, ExprId>) -> ExprId {
    let mut cur = e;
    // each pass strictly shrinks or stabilises; the bound only guards bugs
    for _ in 0..pool.len().max(4) {
        let next = rebuild(pool, cur, memo);
        if next == cur {
            return cur;
        }
        cur = next;
    }
    cur
}

fn rebuild(pool: &mut ExprPool, e: ExprId, memo: &mut HashMap<ExprId, ExprId>) -> ExprId {
    for n in pool.postorder(&[e]) {
        if memo.contains_key(&n) {
            continue;
        }
        let node = pool.node(n).clone();
        let m = |x: ExprId| *memo.get(&x).unwrap_or(&x);
        let op = match node.op {
            Op::Const(_) | Op::Var(_) => {
                memo.insert(n, n);
                continue;
            }
            Op::Not(a) => Op::Not(m(a)),
            Op::Neg(a) => Op::Neg(m(a)),
            Op::Bin(o, a, b) => Op::Bin(o, m(a), m(b)),
            Op::Ite(c, a, b) => Op::Ite(m(c), m(a), m(b)),
            Op::Extract(h, l, a) => Op::Extract(h, l, m(a)),
            Op::Concat(a, b) => Op::Concat(m(a), m(b)),
            Op::Zext(a) => Op::Zext(m(a)),
            Op::Sext(a) => Op::Sext(m(a)),
        };
        let id = pool.build(op, node.width);
        memo.insert(n, id);
    }
    memo[&e]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvir::{BinOp, Bits};

    #[test]
    fn annihilator() {
        let mut p = ExprPool::new();
        let x = p.var("x", 8);
        let z = p.const_u64(8, 0);
        let e = p.raw(Op::Bin(BinOp::And, x, z), None).unwrap();
        assert_eq!(simplify(&mut p, e), z);
    }

    #[test]
    fn constant_condition() {
        let mut p = ExprPool::new();
        let (a, b) = (p.var("a", 8), p.var("b", 8));
        let t = p.const_u64(1, 1);
        let e = p.raw(Op::Ite(t, a, b), None).unwrap();
        assert_eq!(simplify(&mut p, e), a);
    }

    #[test]
    fn extract_of_concat() {
        let mut p = ExprPool::new();
        let (x, y) = (p.var("x", 8), p.var("y", 8));
        let c = p.raw(Op::Concat(y, x), None).unwrap();
        let e = p.raw(Op::Extract(7, 0, c), None).unwrap();
        assert_eq!(simplify(&mut p, e), x);
    }

    #[test]
    fn xor_self_and_double_negation() {
        let mut p = ExprPool::new();
        let x = p.var("x", 16);
        let e = p.raw(Op::Bin(BinOp::Xor, x, x), None).unwrap();
        let r = simplify(&mut p, e);
        assert_eq!(p.as_const(r), Some(&Bits::zero(16)));
        let n1 = p.raw(Op::Not(x), None).unwrap();
        let n2 = p.raw(Op::Not(n1), None).unwrap();
        assert_eq!(simplify(&mut p, n2), x);
    }

    #[test]
    fn byte_concat_fuses_back() {
        let mut p = ExprPool::new();
        let x = p.var("x", 32);
        let bytes: Vec<ExprId> = (0..4).map(|k| p.extract(8 * k + 7, 8 * k, x)).collect();
        let mut acc = bytes[0];
        for b in &bytes[1..] {
            acc = p.concat(*b, acc);
        }
        assert_eq!(acc, x);
        // the same bytes merged under one condition also fuse
        let y = p.var("y", 32);
        let c = p.var("c", 1);
        let merged: Vec<ExprId> = (0..4)
            .map(|k| {
                let bx = p.extract(8 * k + 7, 8 * k, x);
                let by = p.extract(8 * k + 7, 8 * k, y);
                p.ite(c, bx, by)
            })
            .collect();
        let mut acc = merged[0];
        for b in &merged[1..] {
            acc = p.concat(*b, acc);
        }
        let want = p.ite(c, x, y);
        assert_eq!(acc, want);
    }
}
