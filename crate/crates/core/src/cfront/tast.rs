//! Typechecked program representation shared by symbolic execution and
//! the concrete interpreter.

use std::sync::Arc;

use super::types::{CType, FnSig, TypeTable};
use crate::diag::SourceLoc;

pub type FuncId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarRef {
    Global(usize),
    /// Index into the enclosing function's `locals`; parameters come first.
    Local(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: CType,
    pub loc: SourceLoc,
}

/// One scalar store of an initializer; the object is zeroed first.
#[derive(Clone, Debug, PartialEq)]
pub struct InitItem {
    pub offset: u64,
    pub value: TExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Global {
    pub decl: VarDecl,
    pub init: Vec<InitItem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub sig: Arc<FnSig>,
    pub locals: Vec<VarDecl>,
    pub body: Option<Vec<Stmt>>,
    pub loc: SourceLoc,
    pub address_taken: bool,
    /// Code of the function when used as a pointer value.
    pub code: Option<u64>,
}

impl Function {
    pub fn num_params(&self) -> usize {
        self.sig.params.len()
    }
}

#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub types: TypeTable,
    pub globals: Vec<Global>,
    pub functions: Vec<Function>,
    /// Functions that take no parameters and return void.
    pub entry_candidates: Vec<String>,
}

pub const FIRST_FUNCTION_CODE: u64 = 0x1000;

impl TypedProgram {
    pub fn function(&self, name: &str) -> Option<FuncId> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn function_by_code(&self, code: u64) -> Option<FuncId> {
        self.functions.iter().position(|f| f.code == Some(code))
    }

    pub fn size_of(&self, t: &CType) -> u64 {
        self.types.size_of(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Expr(TExpr),
    Decl { var: usize, init: Vec<InitItem>, loc: SourceLoc },
    If { cond: TExpr, then: Vec<Stmt>, els: Vec<Stmt>, loc: SourceLoc },
    /// `while`, `do`/`while` and the loop part of `for`.
    Loop { id: String, cond: Option<TExpr>, step: Option<TExpr>, body: Vec<Stmt>, test_first: bool, loc: SourceLoc },
    /// Labels index into `body`; `None` is `default`.
    Switch { disc: TExpr, labels: Vec<(Option<u64>, usize)>, body: Vec<Stmt>, loc: SourceLoc },
    Break(SourceLoc),
    Continue(SourceLoc),
    Return(Option<TExpr>, SourceLoc),
    Block(Vec<Stmt>),
    Assert { cond: TExpr, msg: String, loc: SourceLoc },
    Sample { target: TExpr, name: String, loc: SourceLoc },
    Drive { value: TExpr, name: String, loc: SourceLoc },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: CType,
    pub loc: SourceLoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    BitNot,
    LogNot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    And,
    Or,
    Xor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Floating-point operations, each implemented by a prelude helper.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FloatOp {
    Add,
    Sub,
    Mul,
    Neg,
    Eq,
    Lt,
    Le,
    FromI32,
    FromU32,
    ToI32,
    ToU32,
}

impl FloatOp {
    pub fn helper(self) -> &'static str {
        use super::prelude::*;
        match self {
            FloatOp::Add => F32_ADD,
            FloatOp::Sub => F32_SUB,
            FloatOp::Mul => F32_MUL,
            FloatOp::Neg => F32_NEG,
            FloatOp::Eq => F32_EQ,
            FloatOp::Lt => F32_LT,
            FloatOp::Le => F32_LE,
            FloatOp::FromI32 => I32_TO_F32,
            FloatOp::FromU32 => U32_TO_F32,
            FloatOp::ToI32 => F32_TO_I32,
            FloatOp::ToU32 => F32_TO_U32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TExprKind {
    /// Integer, pointer or floating-point bit pattern in `ty`'s width.
    Const(u64),
    Var(VarRef),
    FuncAddr(FuncId),
    Deref(Box<TExpr>),
    /// Member at a byte offset; an lvalue iff the base is.
    Member(Box<TExpr>, u64),
    AddrOf(Box<TExpr>),
    /// Array lvalue to pointer to its first element.
    Decay(Box<TExpr>),
    Unary(UnOp, Box<TExpr>),
    /// Operands already converted; shift amounts keep their own type.
    Binary(ArithOp, Box<TExpr>, Box<TExpr>),
    Compare(CmpOp, Box<TExpr>, Box<TExpr>),
    /// Short-circuit `&&` (true) or `||` (false) over bool operands.
    Logical(bool, Box<TExpr>, Box<TExpr>),
    /// Pointer plus a 64-bit signed element count scaled by the size.
    PtrAdd(Box<TExpr>, Box<TExpr>, u64),
    PtrDiff(Box<TExpr>, Box<TExpr>, u64),
    Cond(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    /// Stores `value` into `lhs`; [`TExprKind::Current`] inside `value`
    /// denotes the value `lhs` held before the store. Yields the old value
    /// when `yield_old` is set and the new one otherwise.
    Update { lhs: Box<TExpr>, value: Box<TExpr>, yield_old: bool },
    Current,
    /// Conversion from the operand's type to `ty`.
    Cast(Box<TExpr>),
    Float(FloatOp, Vec<TExpr>),
    Call(FuncId, Vec<TExpr>),
    CallIndirect(Box<TExpr>, Vec<TExpr>),
    Comma(Box<TExpr>, Box<TExpr>),
}

impl TExpr {
    pub fn new(kind: TExprKind, ty: CType, loc: SourceLoc) -> TExpr {
        TExpr { kind, ty, loc }
    }

    pub fn is_lvalue(&self) -> bool {
        match &self.kind {
            TExprKind::Var(_) | TExprKind::Deref(_) => true,
            TExprKind::Member(b, _) => b.is_lvalue(),
            _ => false,
        }
    }

    pub fn as_const(&self) -> Option<u64> {
        match self.kind {
            TExprKind::Const(v) => Some(v),
            _ => None,
        }
    }

    /// Visits every sub-expression in evaluation order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a TExpr)) {
        f(self);
        use TExprKind::*;
        match &self.kind {
            Const(_) | Var(_) | FuncAddr(_) | Current => {}
            Deref(a) | Member(a, _) | AddrOf(a) | Decay(a) | Unary(_, a) | Cast(a) => a.walk(f),
            Binary(_, a, b) | Compare(_, a, b) | Logical(_, a, b) | PtrAdd(a, b, _) | PtrDiff(a, b, _) | Comma(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Update { lhs, value, .. } => {
                lhs.walk(f);
                value.walk(f);
            }
            Cond(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            Float(_, args) | Call(_, args) => args.iter().for_each(|a| a.walk(f)),
            CallIndirect(fp, args) => {
                fp.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
        }
    }
}

impl Stmt {
    /// Visits every expression of this statement and its children.
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a TExpr)) {
        let items = |v: &'a [InitItem], f: &mut dyn FnMut(&'a TExpr)| v.iter().for_each(|i| i.value.walk(f));
        match self {
            Stmt::Expr(e) | Stmt::Assert { cond: e, .. } | Stmt::Sample { target: e, .. } | Stmt::Drive { value: e, .. } => {
                e.walk(f)
            }
            Stmt::Decl { init, .. } => items(init, f),
            Stmt::If { cond, then, els, .. } => {
                cond.walk(f);
                then.iter().chain(els).for_each(|s| s.walk_exprs(f));
            }
            Stmt::Loop { cond, step, body, .. } => {
                if let Some(c) = cond {
                    c.walk(f);
                }
                if let Some(s) = step {
                    s.walk(f);
                }
                body.iter().for_each(|s| s.walk_exprs(f));
            }
            Stmt::Switch { disc, body, .. } => {
                disc.walk(f);
                body.iter().for_each(|s| s.walk_exprs(f));
            }
            Stmt::Return(Some(e), _) => e.walk(f),
            Stmt::Block(b) => b.iter().for_each(|s| s.walk_exprs(f)),
            Stmt::Return(None, _) | Stmt::Break(_) | Stmt::Continue(_) => {}
        }
    }
}
