//! Decisions shared by the oracle and symbolic execution: entry
//! selection, the module interface, object codes and check kinds.

use std::fmt;

use serde::Serialize;

use crate::cfront::tast::{FuncId, Stmt, TypedProgram, VarRef};
use crate::diag::{Code, Diagnostic, SourceLoc};

pub const DEFAULT_FUEL: u64 = 10_000_000;
pub const DEFAULT_UNWIND: u32 = 8;

/// Mask of the byte-offset half of a pointer value.
pub const OFFSET_MASK: u64 = 0xFFFF_FFFF;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ObligationKind {
    UserAssert,
    Unwinding,
    DivByZero,
    Overshift,
    Bounds,
    NullDeref,
}

impl ObligationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObligationKind::UserAssert => "assert",
            ObligationKind::Unwinding => "unwinding",
            ObligationKind::DivByZero => "div",
            ObligationKind::Overshift => "shift",
            ObligationKind::Bounds => "bounds",
            ObligationKind::NullDeref => "null",
        }
    }
}

impl fmt::Display for ObligationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optional runtime checks that produce extra obligations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckSet {
    pub div: bool,
    pub shift: bool,
    pub bounds: bool,
    pub null: bool,
}

impl CheckSet {
    pub fn all() -> Self {
        CheckSet { div: true, shift: true, bounds: true, null: true }
    }

    /// Parses a comma-separated list such as `div,shift`.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut c = CheckSet::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "div" => c.div = true,
                "shift" => c.shift = true,
                "bounds" => c.bounds = true,
                "null" => c.null = true,
                "all" => c = CheckSet::all(),
                other => return Err(format!("unknown check '{other}' (expected div, shift, bounds, null)")),
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Port {
    pub name: String,
    pub width: u32,
}

/// Module ports in source order of the interface macros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Interface {
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
}

/// Picks the entry function: the named one, or the only candidate.
pub fn resolve_entry(prog: &TypedProgram, name: Option<&str>) -> Result<FuncId, Diagnostic> {
    match name {
        Some(n) => {
            if prog.entry_candidates.iter().any(|c| c == n) {
                return Ok(prog.function(n).unwrap());
            }
            let why = match prog.function(n) {
                Some(id) if prog.functions[id].body.is_none() => "is never defined",
                Some(_) => "must take no parameters and return void",
                None => "does not exist",
            };
            Err(Diagnostic::bare(Code::NoEntry, format!("entry function '{n}' {why}")))
        }
        None => match prog.entry_candidates.as_slice() {
            [one] => Ok(prog.function(one).unwrap()),
            [] => Err(Diagnostic::bare(Code::NoEntry, "no function taking no parameters and returning void")),
            many => Err(Diagnostic::bare(
                Code::NoEntry,
                format!("several entry candidates ({}); choose one with --entry", many.join(", ")),
            )),
        },
    }
}

fn visit_stmts<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        match s {
            Stmt::If { then, els, .. } => {
                visit_stmts(then, f);
                visit_stmts(els, f);
            }
            Stmt::Loop { body, .. } | Stmt::Switch { body, .. } | Stmt::Block(body) => visit_stmts(body, f),
            _ => {}
        }
    }
}

/// Collects the interface of `entry` and enforces the macro rules.
pub fn interface(prog: &TypedProgram, entry: FuncId) -> Result<Interface, Diagnostic> {
    for (id, func) in prog.functions.iter().enumerate() {
        if id == entry {
            continue;
        }
        let mut bad = None;
        visit_stmts(func.body.as_deref().unwrap_or(&[]), &mut |s| {
            if let Stmt::Sample { loc, .. } | Stmt::Drive { loc, .. } = s {
                bad.get_or_insert_with(|| loc.clone());
            }
        });
        if let Some(loc) = bad {
            return Err(Diagnostic::at(
                Code::Interface,
                &loc,
                format!("interface macros may only appear in the entry function, not in '{}'", func.name),
            ));
        }
    }
    let mut iface = Interface::default();
    let mut err = None;
    visit_stmts(prog.functions[entry].body.as_deref().unwrap_or(&[]), &mut |s| {
        if err.is_some() {
            return;
        }
        let (name, e, loc, input) = match s {
            Stmt::Sample { target, name, loc } => (name, target, loc, true),
            Stmt::Drive { value, name, loc } => (name, value, loc, false),
            _ => return,
        };
        let width = (prog.size_of(&e.ty) * 8) as u32;
        let in_inputs = iface.inputs.iter().any(|p| &p.name == name);
        let in_outputs = iface.outputs.iter().any(|p| &p.name == name);
        if input && in_inputs {
            err = Some(Diagnostic::at(Code::Interface, loc, format!("input '{name}' is sampled more than once")));
        } else if (input && in_outputs) || (!input && in_inputs) {
            err = Some(Diagnostic::at(Code::Interface, loc, format!("'{name}' is used as both an input and an output")));
        } else if input {
            iface.inputs.push(Port { name: name.clone(), width });
        } else if !in_outputs {
            iface.outputs.push(Port { name: name.clone(), width });
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(iface)
}

/// Static allocation of every variable to a numbered memory object.
/// Codes start at 1 so that the all-zero pointer is null.
#[derive(Clone, Debug)]
pub struct ObjectMap {
    pub objects: Vec<ObjectInfo>,
    local_base: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ObjectInfo {
    pub name: String,
    pub size: u64,
    pub loc: SourceLoc,
}

impl ObjectMap {
    pub fn new(prog: &TypedProgram) -> Self {
        let mut objects = Vec::new();
        for g in &prog.globals {
            objects.push(ObjectInfo { name: g.decl.name.clone(), size: prog.size_of(&g.decl.ty), loc: g.decl.loc.clone() });
        }
        let mut local_base = Vec::new();
        for f in &prog.functions {
            local_base.push(objects.len());
            for v in &f.locals {
                objects.push(ObjectInfo { name: format!("{}::{}", f.name, v.name), size: prog.size_of(&v.ty), loc: v.loc.clone() });
            }
        }
        ObjectMap { objects, local_base }
    }

    /// Zero-based index of a variable's object.
    pub fn index(&self, func: FuncId, v: VarRef) -> usize {
        match v {
            VarRef::Global(g) => g,
            VarRef::Local(l) => self.local_base[func] + l,
        }
    }

    pub fn code(&self, func: FuncId, v: VarRef) -> u64 {
        self.index(func, v) as u64 + 1
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}
