//! Lowering of a module back into bit-vector expressions, used to
//! evaluate emitted Verilog and to build equivalence miters.

use std::collections::HashMap;
use std::sync::Arc;

use super::ast::*;
use crate::bvir::{BinOp, Bits, ExprId, ExprPool, Plan};
use crate::diag::{Code, Diagnostic};

/// Expressions for the outputs and assertions of one module, built in a
/// caller-supplied pool. Inputs are variables named after their ports.
#[derive(Clone, Debug)]
pub struct Lowered {
    /// Input variable names and widths in port order.
    pub inputs: Vec<(String, u32)>,
    pub outputs: Vec<(String, ExprId)>,
    /// One width-1 expression per assertion, true when it passes.
    pub asserts: Vec<ExprId>,
}

fn width_err(msg: String) -> Diagnostic {
    Diagnostic::bare(Code::Width, msg)
}

struct Lowerer<'a> {
    m: &'a VModule,
    pool: &'a mut ExprPool,
    widths: HashMap<&'a str, u32>,
    drivers: HashMap<&'a str, usize>,
    inputs: HashMap<&'a str, ExprId>,
    values: HashMap<usize, ExprId>,
    active: Vec<bool>,
}

/// Lowers `m` into `pool`, checking declarations, single assignment and
/// widths.
pub fn lower_module(m: &VModule, pool: &mut ExprPool) -> Result<Lowered, Diagnostic> {
    lower_module_renamed(m, pool, &HashMap::new())
}

/// Like [`lower_module`], but input ports listed in `rename` become
/// variables with the mapped name.
pub fn lower_module_renamed(
    m: &VModule,
    pool: &mut ExprPool,
    rename: &HashMap<String, String>,
) -> Result<Lowered, Diagnostic> {
    let mut widths = HashMap::new();
    for (name, width) in m.ports.iter().map(|p| (&p.name, p.width)).chain(m.wires.iter().map(|w| (&w.name, w.width))) {
        if widths.insert(name.as_str(), width).is_some() {
            return Err(Diagnostic::bare(Code::VSyntax, format!("'{name}' is declared twice")));
        }
    }
    let mut drivers = HashMap::new();
    for (i, a) in m.assigns.iter().enumerate() {
        if !widths.contains_key(a.lhs.as_str()) {
            return Err(Diagnostic::bare(Code::UnboundVar, format!("'{}' is assigned but never declared", a.lhs)));
        }
        if m.inputs().any(|p| p.name == a.lhs) {
            return Err(Diagnostic::bare(Code::VSyntax, format!("input '{}' is assigned", a.lhs)));
        }
        if drivers.insert(a.lhs.as_str(), i).is_some() {
            return Err(Diagnostic::bare(Code::VSyntax, format!("'{}' is assigned more than once", a.lhs)));
        }
    }
    for name in m.outputs().map(|p| &p.name).chain(m.wires.iter().map(|w| &w.name)) {
        if !drivers.contains_key(name.as_str()) {
            return Err(Diagnostic::bare(Code::VSyntax, format!("'{name}' is never assigned")));
        }
    }
    let mut inputs = HashMap::new();
    let mut input_list = Vec::new();
    for p in m.inputs() {
        let var = rename.get(&p.name).unwrap_or(&p.name);
        inputs.insert(p.name.as_str(), pool.var(var, p.width));
        input_list.push((var.clone(), p.width));
    }
    let mut l = Lowerer { m, pool, widths, drivers, inputs, values: HashMap::new(), active: vec![false; m.assigns.len()] };
    let mut outputs = Vec::new();
    for p in m.outputs() {
        let v = l.ident(&p.name)?;
        outputs.push((p.name.clone(), v));
    }
    for i in 0..m.assigns.len() {
        l.assign(i)?;
    }
    let mut asserts = Vec::new();
    for a in &m.asserts {
        let (v, _) = l.expr(&a.expr)?;
        if l.pool.width(v) != 1 {
            return Err(width_err(format!("assertion expression has width {}", l.pool.width(v))));
        }
        asserts.push(v);
    }
    Ok(Lowered { inputs: input_list, outputs, asserts })
}

impl<'a> Lowerer<'a> {
    fn assign(&mut self, i: usize) -> Result<ExprId, Diagnostic> {
        if let Some(&v) = self.values.get(&i) {
            return Ok(v);
        }
        let a = &self.m.assigns[i];
        if self.active[i] {
            return Err(Diagnostic::bare(Code::VSyntax, format!("combinational loop through '{}'", a.lhs)));
        }
        self.active[i] = true;
        let (v, _) = self.expr(&a.rhs)?;
        self.active[i] = false;
        let want = self.widths[a.lhs.as_str()];
        if self.pool.width(v) != want {
            return Err(width_err(format!("'{}' has width {want} but is assigned a {}-bit value", a.lhs, self.pool.width(v))));
        }
        self.values.insert(i, v);
        Ok(v)
    }

    fn ident(&mut self, name: &str) -> Result<ExprId, Diagnostic> {
        if let Some(&v) = self.inputs.get(name) {
            return Ok(v);
        }
        match self.drivers.get(name) {
            Some(&i) => self.assign(i),
            None if self.widths.contains_key(name) => {
                Err(Diagnostic::bare(Code::VSyntax, format!("'{name}' is never assigned")))
            }
            None => Err(Diagnostic::bare(Code::UnboundVar, format!("'{name}' is not declared"))),
        }
    }

    fn same(&self, what: &str, a: ExprId, b: ExprId) -> Result<(), Diagnostic> {
        let (wa, wb) = (self.pool.width(a), self.pool.width(b));
        if wa != wb {
            return Err(width_err(format!("operands of '{what}' have widths {wa} and {wb}")));
        }
        Ok(())
    }

    /// Returns the value and whether it is a `$signed` operand.
    fn expr(&mut self, e: &VExpr) -> Result<(ExprId, bool), Diagnostic> {
        Ok(match e {
            VExpr::Id(n) => (self.ident(n)?, false),
            VExpr::Signed(n) => (self.ident(n)?, true),
            VExpr::Const(b) => (self.pool.constant(*b), false),
            VExpr::Select(n, h, l) => {
                let v = self.ident(n)?;
                let w = self.pool.width(v);
                if h < l || *h >= w {
                    return Err(width_err(format!("part-select {n}[{h}:{l}] of a {w}-bit value")));
                }
                (self.pool.extract(*h, *l, v), false)
            }
            VExpr::Unary(op, a) => {
                let (x, _) = self.expr(a)?;
                let v = if *op == VUnOp::Not { self.pool.not(x) } else { self.pool.neg(x) };
                (v, false)
            }
            VExpr::Binary(op, a, b) => {
                let (x, sx) = self.expr(a)?;
                let (y, sy) = self.expr(b)?;
                self.same(op.symbol(), x, y)?;
                let signed = sx && sy;
                let p = &mut *self.pool;
                let v = match op {
                    VBinOp::And => p.bin(BinOp::And, x, y),
                    VBinOp::Or => p.bin(BinOp::Or, x, y),
                    VBinOp::Xor => p.bin(BinOp::Xor, x, y),
                    VBinOp::Add => p.bin(BinOp::Add, x, y),
                    VBinOp::Sub => p.bin(BinOp::Sub, x, y),
                    VBinOp::Mul => p.bin(BinOp::Mul, x, y),
                    VBinOp::Div => p.bin(if signed { BinOp::Sdiv } else { BinOp::Udiv }, x, y),
                    VBinOp::Mod => p.bin(if signed { BinOp::Srem } else { BinOp::Urem }, x, y),
                    VBinOp::Shl => p.bin(BinOp::Shl, x, y),
                    VBinOp::Shr => p.bin(BinOp::Lshr, x, y),
                    VBinOp::Eq => p.bin(BinOp::Eq, x, y),
                    VBinOp::Ne => {
                        let q = p.bin(BinOp::Eq, x, y);
                        p.not(q)
                    }
                    VBinOp::Lt => p.bin(if signed { BinOp::Slt } else { BinOp::Ult }, x, y),
                    VBinOp::Le => p.bin(if signed { BinOp::Sle } else { BinOp::Ule }, x, y),
                    VBinOp::Gt => p.bin(if signed { BinOp::Slt } else { BinOp::Ult }, y, x),
                    VBinOp::Ge => p.bin(if signed { BinOp::Sle } else { BinOp::Ule }, y, x),
                };
                (v, false)
            }
            VExpr::Ternary(c, a, b) => {
                let (cv, _) = self.expr(c)?;
                if self.pool.width(cv) != 1 {
                    return Err(width_err(format!("ternary condition has width {}", self.pool.width(cv))));
                }
                let (x, _) = self.expr(a)?;
                let (y, _) = self.expr(b)?;
                self.same("?:", x, y)?;
                (self.pool.ite(cv, x, y), false)
            }
            VExpr::Concat(parts) => {
                let mut acc: Option<ExprId> = None;
                for part in parts {
                    let (v, _) = self.expr(part)?;
                    acc = Some(match acc {
                        None => v,
                        Some(h) => {
                            let w = self.pool.width(h) + self.pool.width(v);
                            if w > crate::bvir::MAX_WIDTH {
                                return Err(width_err(format!("concatenation of width {w}")));
                            }
                            self.pool.concat(h, v)
                        }
                    });
                }
                (acc.ok_or_else(|| width_err("empty concatenation".into()))?, false)
            }
        })
    }
}

/// Values of a module under one input assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleValues {
    pub outputs: Vec<Bits>,
    /// Per assertion: whether it passes.
    pub asserts: Vec<bool>,
}

/// A module compiled for repeated evaluation.
pub struct CompiledModule {
    plan: Plan,
    inputs: Vec<(String, u32)>,
    n_out: usize,
}

impl CompiledModule {
    pub fn new(m: &VModule) -> Result<CompiledModule, Diagnostic> {
        let mut pool = ExprPool::new();
        let l = lower_module(m, &mut pool)?;
        let roots: Vec<ExprId> = l.outputs.iter().map(|o| o.1).chain(l.asserts.iter().copied()).collect();
        let plan = Plan::new(&pool, &roots, &HashMap::<Arc<str>, ExprId>::new());
        Ok(CompiledModule { plan, inputs: l.inputs, n_out: l.outputs.len() })
    }

    pub fn inputs(&self) -> &[(String, u32)] {
        &self.inputs
    }

    /// Evaluates with inputs by port name. Every input port must be bound.
    pub fn run(&self, env: &HashMap<String, Bits>) -> Result<ModuleValues, Diagnostic> {
        for (name, width) in &self.inputs {
            match env.get(name) {
                None => return Err(Diagnostic::bare(Code::MissingInput, format!("input '{name}' is not bound"))),
                Some(v) if v.width() != *width => {
                    return Err(Diagnostic::bare(
                        Code::WidthMismatch,
                        format!("input '{name}' has width {width} but is bound to a {}-bit value", v.width()),
                    ))
                }
                _ => {}
            }
        }
        let vals = self.plan.run_env(env)?;
        Ok(ModuleValues {
            outputs: vals[..self.n_out].to_vec(),
            asserts: vals[self.n_out..].iter().map(|b| b.bit(0)).collect(),
        })
    }
}

/// Evaluates a module once, assign by assign.
pub fn eval_module(m: &VModule, env: &HashMap<String, Bits>) -> Result<ModuleValues, Diagnostic> {
    CompiledModule::new(m)?.run(env)
}
