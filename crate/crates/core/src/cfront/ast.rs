//! Untyped abstract syntax as produced by the parser.
//!
//! Node positions are carried in [`Pos`], which is ignored by structural
//! equality so that re-parsed trees compare equal to their originals.

use std::fmt;

use crate::diag::SourceLoc;

#[derive(Clone)]
pub struct Pos(pub SourceLoc);

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Debug for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranslationUnit {
    pub items: Vec<ExternalDecl>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExternalDecl {
    Decl(Declaration),
    Func(FunctionDef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    Typedef,
    Static,
    Extern,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaseType {
    Void,
    Bool,
    Char,
    SChar,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Long,
    ULong,
    LongLong,
    ULongLong,
    Float,
    Double,
    Named(String),
    Record(RecordSpec),
    Enum(EnumSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordSpec {
    pub is_union: bool,
    pub tag: Option<String>,
    pub fields: Option<Vec<FieldDecl>>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub specs: DeclSpecs,
    pub declarators: Vec<Declarator>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumSpec {
    pub tag: Option<String>,
    pub items: Option<Vec<(String, Option<Expr>, Pos)>>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeclSpecs {
    pub storage: Option<Storage>,
    pub is_const: bool,
    pub is_inline: bool,
    pub base: BaseType,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Declarator {
    /// Named or (for abstract declarators) anonymous leaf.
    Ident(Option<String>, Pos),
    Pointer(Box<Declarator>),
    Array(Box<Declarator>, Option<Box<Expr>>),
    Function(Box<Declarator>, Vec<ParamDecl>),
}

impl Declarator {
    pub fn name(&self) -> Option<&str> {
        match self {
            Declarator::Ident(n, _) => n.as_deref(),
            Declarator::Pointer(d) | Declarator::Array(d, _) | Declarator::Function(d, _) => d.name(),
        }
    }

    pub fn pos(&self) -> &Pos {
        match self {
            Declarator::Ident(_, p) => p,
            Declarator::Pointer(d) | Declarator::Array(d, _) | Declarator::Function(d, _) => d.pos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamDecl {
    pub specs: DeclSpecs,
    pub declarator: Declarator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeName {
    pub specs: DeclSpecs,
    pub declarator: Declarator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Declaration {
    pub specs: DeclSpecs,
    pub inits: Vec<InitDeclarator>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitDeclarator {
    pub declarator: Declarator,
    pub init: Option<Initializer>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Initializer {
    Expr(Expr),
    List(Vec<Initializer>, Pos),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub specs: DeclSpecs,
    pub declarator: Declarator,
    pub body: Block,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub items: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Decl(Declaration),
    Expr(Option<Expr>, Pos),
    Block(Block),
    If(Expr, Box<Stmt>, Option<Box<Stmt>>, Pos),
    While(Expr, Box<Stmt>, Pos),
    DoWhile(Box<Stmt>, Expr, Pos),
    For(Option<Box<Stmt>>, Option<Expr>, Option<Expr>, Box<Stmt>, Pos),
    Switch(Expr, Box<Stmt>, Pos),
    Case(Expr, Box<Stmt>, Pos),
    Default(Box<Stmt>, Pos),
    Break(Pos),
    Continue(Pos),
    Return(Option<Expr>, Pos),
    /// `C2V_SAMPLE_INPUT(type, name)`
    Sample(TypeName, String, Pos),
    /// `C2V_DRIVE_OUTPUT(type, name)`
    Drive(TypeName, String, Pos),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Plus,
    Minus,
    BitNot,
    Not,
    Deref,
    AddrOf,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn from_token(s: &str) -> Option<BinaryOp> {
        use BinaryOp::*;
        Some(match s {
            "*" => Mul,
            "/" => Div,
            "%" => Rem,
            "+" => Add,
            "-" => Sub,
            "<<" => Shl,
            ">>" => Shr,
            "<" => Lt,
            ">" => Gt,
            "<=" => Le,
            ">=" => Ge,
            "==" => Eq,
            "!=" => Ne,
            "&" => BitAnd,
            "^" => BitXor,
            "|" => BitOr,
            "&&" => LogAnd,
            "||" => LogOr,
            _ => return None,
        })
    }

    pub fn token(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Mul => "*",
            Div => "/",
            Rem => "%",
            Add => "+",
            Sub => "-",
            Shl => "<<",
            Shr => ">>",
            Lt => "<",
            Gt => ">",
            Le => "<=",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            BitAnd => "&",
            BitXor => "^",
            BitOr => "|",
            LogAnd => "&&",
            LogOr => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Ident(String),
    /// Integer or character constant, kept with its spelling.
    IntLit(String),
    FloatLit(String),
    StrLit(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Plain assignment when the operator is `None`.
    Assign(Option<BinaryOp>, Box<Expr>, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Cast(Box<TypeName>, Box<Expr>),
    SizeofType(Box<TypeName>),
    SizeofExpr(Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Member(Box<Expr>, String),
    Arrow(Box<Expr>, String),
    Call(Box<Expr>, Vec<Expr>),
    Comma(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn loc(&self) -> &SourceLoc {
        &self.pos.0
    }
}
