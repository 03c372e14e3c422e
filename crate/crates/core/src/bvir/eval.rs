//! Concrete evaluation of expression DAGs.

use std::collections::HashMap;
use std::sync::Arc;

use super::bits::Bits;
use super::expr::{BinOp, ExprId, ExprPool, Op};
use crate::diag::{Code, Diagnostic};

/// Evaluates `e` under `env`, which must bind every free variable.
pub fn eval(pool: &ExprPool, e: ExprId, env: &HashMap<String, Bits>) -> Result<Bits, Diagnostic> {
    let plan = Plan::new(pool, &[e], &HashMap::new());
    let vals = plan.run_env(env)?;
    Ok(vals[0])
}

#[derive(Clone, Debug)]
enum Step {
    Const(Bits),
    Input(usize),
    Not(usize),
    Neg(usize),
    Bin(BinOp, usize, usize),
    Ite(usize, usize, usize),
    Extract(u32, u32, usize),
    Concat(usize, usize),
    Zext(u32, usize),
    Sext(u32, usize),
}

/// A compiled evaluation order for a fixed set of roots. Variables listed
/// in `defs` are replaced by their defining expressions; the remaining
/// variables become plan inputs.
#[derive(Clone, Debug)]
pub struct Plan {
    steps: Vec<Step>,
    inputs: Vec<(Arc<str>, u32)>,
    roots: Vec<usize>,
}

impl Plan {
    pub fn new(pool: &ExprPool, roots: &[ExprId], defs: &HashMap<Arc<str>, ExprId>) -> Plan {
        let mut slot: HashMap<ExprId, usize> = HashMap::new();
        let mut steps = Vec::new();
        let mut inputs: Vec<(Arc<str>, u32)> = Vec::new();
        let mut input_slot: HashMap<Arc<str>, usize> = HashMap::new();

        let kids = |e: ExprId| -> Vec<ExprId> {
            match pool.op(e) {
                Op::Var(n) => defs.get(n).copied().into_iter().collect(),
                op => op.children().collect(),
            }
        };

        for &root in roots {
            let mut stack = vec![(root, false)];
            while let Some((e, expanded)) = stack.pop() {
                if slot.contains_key(&e) {
                    continue;
                }
                if !expanded {
                    stack.push((e, true));
                    for k in kids(e).into_iter().rev() {
                        if !slot.contains_key(&k) {
                            stack.push((k, false));
                        }
                    }
                    continue;
                }
                let node = pool.node(e);
                let s = |x: &ExprId| slot[x];
                let step = match &node.op {
                    Op::Const(b) => Step::Const(*b),
                    Op::Var(n) => {
                        if let Some(d) = defs.get(n) {
                            slot.insert(e, slot[d]);
                            continue;
                        }
                        let idx = *input_slot.entry(n.clone()).or_insert_with(|| {
                            inputs.push((n.clone(), node.width));
                            inputs.len() - 1
                        });
                        Step::Input(idx)
                    }
                    Op::Not(a) => Step::Not(s(a)),
                    Op::Neg(a) => Step::Neg(s(a)),
                    Op::Bin(o, a, b) => Step::Bin(*o, s(a), s(b)),
                    Op::Ite(c, a, b) => Step::Ite(s(c), s(a), s(b)),
                    Op::Extract(h, l, a) => Step::Extract(*h, *l, s(a)),
                    Op::Concat(a, b) => Step::Concat(s(a), s(b)),
                    Op::Zext(a) => Step::Zext(node.width, s(a)),
                    Op::Sext(a) => Step::Sext(node.width, s(a)),
                };
                steps.push(step);
                slot.insert(e, steps.len() - 1);
            }
        }
        let roots = roots.iter().map(|r| slot[r]).collect();
        Plan { steps, inputs, roots }
    }

    /// Free variables in first-use order.
    pub fn inputs(&self) -> &[(Arc<str>, u32)] {
        &self.inputs
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Evaluates with inputs given positionally; returns root values.
    pub fn run(&self, inputs: &[Bits], scratch: &mut Vec<Bits>) -> Vec<Bits> {
        scratch.clear();
        scratch.reserve(self.steps.len());
        for step in &self.steps {
            let v = match *step {
                Step::Const(b) => b,
                Step::Input(i) => inputs[i],
                Step::Not(a) => scratch[a].not(),
                Step::Neg(a) => scratch[a].neg(),
                Step::Bin(o, a, b) => o.apply(&scratch[a], &scratch[b]),
                Step::Ite(c, a, b) => {
                    if scratch[c].bit(0) {
                        scratch[a]
                    } else {
                        scratch[b]
                    }
                }
                Step::Extract(h, l, a) => scratch[a].extract(h, l),
                Step::Concat(a, b) => scratch[a].concat(&scratch[b]),
                Step::Zext(w, a) => scratch[a].zext(w),
                Step::Sext(w, a) => scratch[a].sext(w),
            };
            scratch.push(v);
        }
        self.roots.iter().map(|&r| scratch[r]).collect()
    }

    /// Evaluates with inputs looked up by name.
    pub fn run_env(&self, env: &HashMap<String, Bits>) -> Result<Vec<Bits>, Diagnostic> {
        let mut vals = Vec::with_capacity(self.inputs.len());
        for (name, width) in &self.inputs {
            let v = env
                .get(name.as_ref())
                .ok_or_else(|| Diagnostic::bare(Code::UnboundVar, format!("variable `{name}` is not bound")))?;
            if v.width() != *width {
                return Err(Diagnostic::bare(
                    Code::WidthMismatch,
                    format!("variable `{name}` has width {width} but is bound to a {}-bit value", v.width()),
                ));
            }
            vals.push(*v);
        }
        let mut scratch = Vec::new();
        Ok(self.run(&vals, &mut scratch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, Bits)]) -> HashMap<String, Bits> {
        pairs.iter().map(|(n, b)| (n.to_string(), *b)).collect()
    }

    #[test]
    fn wraparound_add() {
        let mut p = ExprPool::new();
        let (a, b) = (p.var("a", 8), p.var("b", 8));
        let e = p.raw(Op::Bin(BinOp::Add, a, b), None).unwrap();
        let r = eval(&p, e, &env(&[("a", Bits::from_u64(8, 200)), ("b", Bits::from_u64(8, 100))])).unwrap();
        assert_eq!(r.to_u64(), 44);
    }

    #[test]
    fn extract_low_mantissa() {
        let mut p = ExprPool::new();
        let k = p.const_u64(32, 0x40490FDB);
        let e = p.raw(Op::Extract(22, 0, k), None).unwrap();
        assert_eq!(eval(&p, e, &HashMap::new()).unwrap().to_u64(), 0x490FDB);
    }

    #[test]
    fn overshift_is_zero() {
        let mut p = ExprPool::new();
        let (a, b) = (p.const_u64(8, 0xFF), p.const_u64(8, 9));
        let e = p.raw(Op::Bin(BinOp::Lshr, a, b), None).unwrap();
        assert_eq!(eval(&p, e, &HashMap::new()).unwrap().to_u64(), 0);
        let e = p.raw(Op::Bin(BinOp::Ashr, a, b), None).unwrap();
        assert_eq!(eval(&p, e, &HashMap::new()).unwrap().to_u64(), 0xFF);
    }

    #[test]
    fn unbound_and_mismatched_vars() {
        let mut p = ExprPool::new();
        let a = p.var("a", 8);
        let err = eval(&p, a, &HashMap::new()).unwrap_err();
        assert_eq!(err.code, Code::UnboundVar);
        let err = eval(&p, a, &env(&[("a", Bits::from_u64(4, 1))])).unwrap_err();
        assert_eq!(err.code, Code::WidthMismatch);
    }

    #[test]
    fn definitions_are_inlined() {
        let mut p = ExprPool::new();
        let x = p.var("x", 8);
        let t = p.var("t_1", 8);
        let one = p.const_u64(8, 1);
        let def = p.add(x, one);
        let use_ = p.add(t, t);
        let defs: HashMap<Arc<str>, ExprId> = [(Arc::from("t_1"), def)].into_iter().collect();
        let plan = Plan::new(&p, &[use_], &defs);
        assert_eq!(plan.inputs().len(), 1);
        let r = plan.run_env(&env(&[("x", Bits::from_u64(8, 3))])).unwrap();
        assert_eq!(r[0].to_u64(), 8);
    }
}
