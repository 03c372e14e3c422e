//! Symbolic execution of a typed program into a single-assignment trace.

mod exec;
mod layout;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;
use std::sync::Arc;

use crate::bvir::{dump, Bits, ExprId, ExprPool, Op, Plan};
use crate::cfront::tast::TypedProgram;
use crate::diag::{Diagnostic, SourceLoc};
use crate::semantics::{resolve_entry, CheckSet, Interface, ObligationKind, DEFAULT_UNWIND};

#[derive(Clone, Debug)]
pub struct SymexOptions {
    pub unwind: u32,
    /// Per-loop bounds keyed by loop id (`func.N`).
    pub unwind_overrides: BTreeMap<String, u32>,
    pub unwinding_assertions: bool,
    pub checks: CheckSet,
}

impl Default for SymexOptions {
    fn default() -> Self {
        SymexOptions {
            unwind: DEFAULT_UNWIND,
            unwind_overrides: BTreeMap::new(),
            unwinding_assertions: true,
            checks: CheckSet::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Equation {
    pub name: Arc<str>,
    pub var: ExprId,
    pub rhs: ExprId,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug)]
pub struct Obligation {
    pub kind: ObligationKind,
    /// Path condition, width 1.
    pub guard: ExprId,
    /// Must hold whenever the guard does, width 1.
    pub claim: ExprId,
    pub loc: SourceLoc,
    pub message: String,
    pub loop_id: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SsaTrace {
    pub pool: ExprPool,
    pub interface: Interface,
    /// Input variables in interface order.
    pub inputs: Vec<ExprId>,
    pub input_locs: Vec<SourceLoc>,
    /// Output values in interface order.
    pub outputs: Vec<ExprId>,
    pub output_locs: Vec<SourceLoc>,
    pub equations: Vec<Equation>,
    pub obligations: Vec<Obligation>,
}

/// Executes `entry` (or the default entry) with bounded unwinding.
pub fn execute(prog: &TypedProgram, entry: Option<&str>, opts: &SymexOptions) -> Result<SsaTrace, Diagnostic> {
    let id = resolve_entry(prog, entry)?;
    exec::run(prog, id, opts)
}

/// Values of a trace under one input assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceValues {
    pub outputs: Vec<Bits>,
    /// Per obligation: guard holds and claim fails.
    pub violated: Vec<bool>,
}

/// A compiled evaluator for repeated runs of one trace.
pub struct TraceEvaluator {
    plan: Plan,
    n_out: usize,
    n_obl: usize,
}

impl TraceEvaluator {
    pub fn run(&self, inputs: &HashMap<String, Bits>) -> Result<TraceValues, Diagnostic> {
        let vals = self.plan.run_env(inputs)?;
        let outputs = vals[..self.n_out].to_vec();
        let violated = (0..self.n_obl)
            .map(|i| {
                let g = vals[self.n_out + 2 * i].bit(0);
                let c = vals[self.n_out + 2 * i + 1].bit(0);
                g && !c
            })
            .collect();
        Ok(TraceValues { outputs, violated })
    }

    /// Free variables the plan reads.
    pub fn inputs(&self) -> &[(Arc<str>, u32)] {
        self.plan.inputs()
    }
}

impl SsaTrace {
    pub fn defs(&self) -> HashMap<Arc<str>, ExprId> {
        self.equations.iter().map(|e| (e.name.clone(), e.rhs)).collect()
    }

    pub fn evaluator(&self) -> TraceEvaluator {
        let mut roots = self.outputs.clone();
        for o in &self.obligations {
            roots.push(o.guard);
            roots.push(o.claim);
        }
        let plan = Plan::new(&self.pool, &roots, &self.defs());
        TraceEvaluator { plan, n_out: self.outputs.len(), n_obl: self.obligations.len() }
    }

    pub fn eval(&self, inputs: &HashMap<String, Bits>) -> Result<TraceValues, Diagnostic> {
        self.evaluator().run(inputs)
    }

    pub fn output(&self, name: &str) -> Option<ExprId> {
        let i = self.interface.outputs.iter().position(|p| p.name == name)?;
        Some(self.outputs[i])
    }

    /// Checks the single-assignment rule: every name is defined once and
    /// only used after its definition.
    pub fn check_ssa(&self) -> Result<(), String> {
        let mut defined: HashSet<Arc<str>> = HashSet::new();
        let inputs: HashSet<&str> = self.interface.inputs.iter().map(|p| p.name.as_str()).collect();
        let mut seen = HashSet::new();
        let check_uses = |e: ExprId, defined: &HashSet<Arc<str>>, seen: &mut HashSet<ExprId>| -> Result<(), String> {
            let mut stack = vec![e];
            while let Some(x) = stack.pop() {
                if !seen.insert(x) {
                    continue;
                }
                match self.pool.op(x) {
                    Op::Var(n) => {
                        if !defined.contains(n) && !inputs.contains(n.as_ref()) {
                            return Err(format!("'{n}' is used before it is defined"));
                        }
                    }
                    op => stack.extend(op.children()),
                }
            }
            Ok(())
        };
        for eq in &self.equations {
            if inputs.contains(eq.name.as_ref()) {
                return Err(format!("'{}' redefines an input", eq.name));
            }
            check_uses(eq.rhs, &defined, &mut seen)?;
            if !defined.insert(eq.name.clone()) {
                return Err(format!("'{}' is assigned twice", eq.name));
            }
        }
        for &e in self.outputs.iter().chain(self.obligations.iter().flat_map(|o| [&o.guard, &o.claim])) {
            check_uses(e, &defined, &mut seen)?;
        }
        Ok(())
    }

    /// Drops equations outside the cone of influence of the outputs and
    /// obligations.
    pub fn slice(&self) -> SsaTrace {
        let defs = self.defs();
        let mut live: HashSet<Arc<str>> = HashSet::new();
        let mut seen: HashSet<ExprId> = HashSet::new();
        let mut stack: Vec<ExprId> = self.outputs.clone();
        for o in &self.obligations {
            stack.push(o.guard);
            stack.push(o.claim);
        }
        while let Some(x) = stack.pop() {
            if !seen.insert(x) {
                continue;
            }
            match self.pool.op(x) {
                Op::Var(n) => {
                    if let Some(&d) = defs.get(n) {
                        live.insert(n.clone());
                        stack.push(d);
                    }
                }
                op => stack.extend(op.children()),
            }
        }
        let mut out = self.clone();
        out.equations.retain(|e| live.contains(&e.name));
        out
    }

    /// Debug dump: header lines, then every reachable node and the
    /// bindings of equations, outputs and obligations.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for p in &self.interface.inputs {
            let _ = writeln!(s, "INPUT {} {}", p.name, p.width);
        }
        for p in &self.interface.outputs {
            let _ = writeln!(s, "OUTPUT {} {}", p.name, p.width);
        }
        for o in &self.obligations {
            let _ = writeln!(s, "OBLIGATION {} @{}", o.kind, o.loc);
        }
        let mut roots: Vec<ExprId> = self.equations.iter().map(|e| e.rhs).collect();
        roots.extend(&self.outputs);
        for o in &self.obligations {
            roots.push(o.guard);
            roots.push(o.claim);
        }
        s.push_str(&dump(&self.pool, &roots));
        for e in &self.equations {
            let _ = writeln!(s, "{} = %{} @{}", e.name, e.rhs.index(), e.loc);
        }
        for (p, v) in self.interface.outputs.iter().zip(&self.outputs) {
            let _ = writeln!(s, "{} := %{}", p.name, v.index());
        }
        for o in &self.obligations {
            let _ = writeln!(s, "{}: %{} => %{} \"{}\"", o.kind, o.guard.index(), o.claim.index(), o.message);
        }
        s
    }

    /// One-line summary of the trace size.
    pub fn summary(&self) -> String {
        format!(
            "{} inputs, {} outputs, {} equations, {} obligations",
            self.interface.inputs.len(),
            self.interface.outputs.len(),
            self.equations.len(),
            self.obligations.len()
        )
    }
}
