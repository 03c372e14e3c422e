//! Typechecking: resolves names, inserts implicit conversions, lays out
//! records and lowers the syntax tree into a [`TypedProgram`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::ast::{self, BaseType, BinaryOp, Declarator, ExprKind, Initializer, Storage, UnaryOp};
use super::lexer::unescape;
use super::pp::parse_int_literal;
use super::render::render_expr;
use super::tast::*;
use super::types::*;
use crate::bvir::Bits;
use crate::diag::{Code, Diagnostic, SourceLoc};

type TResult<T> = Result<T, Diagnostic>;

#[derive(Clone, Debug)]
enum Sym {
    Var(VarRef, CType),
    Func(FuncId),
    Enum(i64),
    Typedef(CType),
}

#[derive(Clone, Debug)]
enum Tag {
    Record(usize),
    Enum,
}

struct CurFn {
    name: String,
    ret: CType,
    locals: Vec<VarDecl>,
    loops: usize,
}

pub struct Checker {
    types: TypeTable,
    globals: Vec<Global>,
    functions: Vec<Function>,
    scopes: Vec<HashMap<String, Sym>>,
    tags: Vec<HashMap<String, Tag>>,
    cur: Option<CurFn>,
    breakable: usize,
    continuable: usize,
}

fn type_err<T>(loc: &SourceLoc, msg: impl Into<String>) -> TResult<T> {
    Err(Diagnostic::at(Code::Type, loc, msg))
}

fn float_err<T>(loc: &SourceLoc, msg: impl Into<String>) -> TResult<T> {
    Err(Diagnostic::at(Code::UnsupportedFloat, loc, msg))
}

pub fn typecheck(tu: &ast::TranslationUnit) -> TResult<TypedProgram> {
    let mut c = Checker {
        types: TypeTable::default(),
        globals: Vec::new(),
        functions: Vec::new(),
        scopes: vec![HashMap::new()],
        tags: vec![HashMap::new()],
        cur: None,
        breakable: 0,
        continuable: 0,
    };
    for item in &tu.items {
        match item {
            ast::ExternalDecl::Decl(d) => c.declaration(d, true)?,
            ast::ExternalDecl::Func(f) => c.function_def(f)?,
        }
    }
    c.finish()
}

fn mask(v: u64, bits: u32) -> u64 {
    if bits >= 64 {
        v
    } else {
        v & ((1u64 << bits) - 1)
    }
}

impl Checker {
    fn push_scope(&mut self) {
        self.scopes.push(HashMap::new());
        self.tags.push(HashMap::new());
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
        self.tags.pop();
    }

    fn lookup(&self, name: &str) -> Option<&Sym> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn bind(&mut self, name: &str, sym: Sym, loc: &SourceLoc) -> TResult<()> {
        let scope = self.scopes.last_mut().unwrap();
        if let Some(prev) = scope.get(name) {
            let ok = match (prev, &sym) {
                (Sym::Typedef(a), Sym::Typedef(b)) => a == b,
                (Sym::Func(a), Sym::Func(b)) => a == b,
                (Sym::Var(a, _), Sym::Var(b, _)) => a == b,
                _ => false,
            };
            if !ok {
                return type_err(loc, format!("redefinition of '{name}'"));
            }
        }
        scope.insert(name.to_string(), sym);
        Ok(())
    }

    fn display(&self, t: &CType) -> String {
        self.types.display(t)
    }

    // ---- types -------------------------------------------------------

    fn base_type(&mut self, specs: &ast::DeclSpecs) -> TResult<CType> {
        let loc = &specs.pos.0;
        Ok(match &specs.base {
            BaseType::Void => CType::Void,
            BaseType::Bool => CType::Bool,
            BaseType::Char | BaseType::SChar => CType::int(true, 8),
            BaseType::UChar => CType::int(false, 8),
            BaseType::Short => CType::int(true, 16),
            BaseType::UShort => CType::int(false, 16),
            BaseType::Int => INT,
            BaseType::UInt => UINT,
            BaseType::Long | BaseType::LongLong => LONG,
            BaseType::ULong | BaseType::ULongLong => ULONG,
            BaseType::Float => CType::Float,
            BaseType::Double => CType::Double,
            BaseType::Named(n) => match self.lookup(n) {
                Some(Sym::Typedef(t)) => t.clone(),
                _ => return type_err(loc, format!("unknown type name '{n}'")),
            },
            BaseType::Record(r) => self.record_type(r)?,
            BaseType::Enum(e) => {
                self.enum_type(e)?;
                INT
            }
        })
    }

    fn record_type(&mut self, r: &ast::RecordSpec) -> TResult<CType> {
        let loc = &r.pos.0;
        let new_record = |t: &mut TypeTable| {
            t.records.push(Record { tag: r.tag.clone(), is_union: r.is_union, fields: None, size: 0, align: 1 });
            t.records.len() - 1
        };
        let id = match (&r.tag, &r.fields) {
            (Some(tag), None) => match self.tags.iter().rev().find_map(|s| s.get(tag)) {
                Some(Tag::Record(id)) => {
                    if self.types.records[*id].is_union != r.is_union {
                        return type_err(loc, format!("'{tag}' redeclared as a different kind of tag"));
                    }
                    *id
                }
                Some(Tag::Enum) => return type_err(loc, format!("'{tag}' is an enum tag")),
                None => {
                    let id = new_record(&mut self.types);
                    self.tags.last_mut().unwrap().insert(tag.clone(), Tag::Record(id));
                    id
                }
            },
            (tag, Some(fields)) => {
                let id = match tag.as_ref().and_then(|t| self.tags.last().unwrap().get(t)) {
                    Some(Tag::Record(id)) if self.types.records[*id].fields.is_none() => *id,
                    Some(_) => return type_err(loc, format!("redefinition of tag '{}'", tag.as_ref().unwrap())),
                    None => {
                        let id = new_record(&mut self.types);
                        if let Some(t) = tag {
                            self.tags.last_mut().unwrap().insert(t.clone(), Tag::Record(id));
                        }
                        id
                    }
                };
                let mut members = Vec::new();
                let mut seen = HashSet::new();
                for f in fields {
                    let base = self.base_type(&f.specs)?;
                    if f.declarators.is_empty() {
                        if matches!(base, CType::Record(_)) {
                            members.push((None, base));
                            continue;
                        }
                        return type_err(&f.pos.0, "declaration does not declare a member");
                    }
                    for d in &f.declarators {
                        let (name, ty) = self.apply_declarator(base.clone(), d)?;
                        let name = name.unwrap();
                        if !seen.insert(name.clone()) {
                            return type_err(&d.pos().0, format!("duplicate member '{name}'"));
                        }
                        if !self.types.is_complete(&ty) {
                            return Err(Diagnostic::at(
                                Code::Incomplete,
                                &d.pos().0,
                                format!("member '{name}' has incomplete type '{}'", self.display(&ty)),
                            ));
                        }
                        members.push((Some(name), ty));
                    }
                }
                self.types.complete_record(id, members, loc)?;
                id
            }
            (None, None) => unreachable!(),
        };
        Ok(CType::Record(id))
    }

    fn enum_type(&mut self, e: &ast::EnumSpec) -> TResult<()> {
        if let Some(tag) = &e.tag {
            if e.items.is_some() || self.tags.iter().all(|s| !s.contains_key(tag)) {
                self.tags.last_mut().unwrap().insert(tag.clone(), Tag::Enum);
            }
        }
        if let Some(items) = &e.items {
            let mut next: i64 = 0;
            for (name, v, pos) in items {
                if let Some(v) = v {
                    next = self.const_int(v)?;
                }
                if next < i32::MIN as i64 || next > i32::MAX as i64 {
                    return type_err(&pos.0, format!("enumerator '{name}' does not fit in int"));
                }
                self.bind(name, Sym::Enum(next), &pos.0)?;
                next += 1;
            }
        }
        Ok(())
    }

    fn const_int(&mut self, e: &ast::Expr) -> TResult<i64> {
        let t = self.rvalue(e)?;
        match (&t.kind, &t.ty) {
            (TExprKind::Const(v), CType::Int { signed, bits }) => {
                Ok(if *signed { Bits::from_u64(*bits, *v).sext(64).to_u64() as i64 } else { *v as i64 })
            }
            (TExprKind::Const(v), CType::Bool) => Ok(*v as i64),
            _ => type_err(e.loc(), "expected an integer constant expression"),
        }
    }

    fn apply_declarator(&mut self, base: CType, d: &Declarator) -> TResult<(Option<String>, CType)> {
        match d {
            Declarator::Ident(n, _) => Ok((n.clone(), base)),
            Declarator::Pointer(inner) => self.apply_declarator(CType::ptr(base), inner),
            Declarator::Array(inner, n) => {
                if matches!(base, CType::Function(_)) {
                    return type_err(&d.pos().0, "array of functions");
                }
                let len = match n {
                    Some(e) => {
                        let v = self.const_int(e)?;
                        if v < 0 {
                            return type_err(e.loc(), "negative array length");
                        }
                        Some(v as u64)
                    }
                    None => None,
                };
                if !self.types.is_complete(&base) {
                    return Err(Diagnostic::at(Code::Incomplete, &d.pos().0, "array of incomplete element type"));
                }
                self.apply_declarator(CType::Array(Box::new(base), len), inner)
            }
            Declarator::Function(inner, params) => {
                if matches!(base, CType::Array(..) | CType::Function(_)) {
                    return type_err(&d.pos().0, "function cannot return an array or function");
                }
                let mut ps = Vec::new();
                for p in params {
                    let b = self.base_type(&p.specs)?;
                    let (_, t) = self.apply_declarator(b, &p.declarator)?;
                    ps.push(adjust_param(t));
                }
                let sig = Arc::new(FnSig { ret: base, params: ps });
                self.apply_declarator(CType::Function(sig), inner)
            }
        }
    }

    fn type_name(&mut self, t: &ast::TypeName) -> TResult<CType> {
        let b = self.base_type(&t.specs)?;
        Ok(self.apply_declarator(b, &t.declarator)?.1)
    }

    // ---- declarations ------------------------------------------------

    fn declaration(&mut self, d: &ast::Declaration, file_scope: bool) -> TResult<()> {
        let base = self.base_type(&d.specs)?;
        for init in &d.inits {
            let loc = d.declarator_loc(init);
            let (name, ty) = self.apply_declarator(base.clone(), &init.declarator)?;
            let name = name.ok_or_else(|| Diagnostic::at(Code::Syntax, &loc, "declarator needs a name"))?;
            if d.specs.storage == Some(Storage::Typedef) {
                self.bind(&name, Sym::Typedef(ty), &loc)?;
                continue;
            }
            if let CType::Function(sig) = &ty {
                self.declare_function(&name, sig.clone(), &loc)?;
                continue;
            }
            if ty == CType::Void {
                return type_err(&loc, format!("variable '{name}' declared void"));
            }
            let is_static = file_scope || d.specs.storage == Some(Storage::Static);
            if d.specs.storage == Some(Storage::Extern) {
                if let Some(Sym::Var(r @ VarRef::Global(_), t)) = self.lookup(&name).cloned() {
                    if t != ty {
                        return type_err(&loc, format!("conflicting types for '{name}'"));
                    }
                    self.bind(&name, Sym::Var(r, t), &loc)?;
                    continue;
                }
            }
            let ty = self.complete_array_length(ty, init.init.as_ref(), &loc)?;
            if !self.types.is_complete(&ty) {
                return Err(Diagnostic::at(
                    Code::Incomplete,
                    &loc,
                    format!("variable '{name}' has incomplete type '{}'", self.display(&ty)),
                ));
            }
            if is_static {
                if file_scope {
                    if let Some(Sym::Var(VarRef::Global(g), t)) = self.scopes[0].get(&name).cloned() {
                        if t != ty {
                            return type_err(&loc, format!("conflicting types for '{name}'"));
                        }
                        if let Some(i) = &init.init {
                            if !self.globals[g].init.is_empty() {
                                return type_err(&loc, format!("redefinition of '{name}'"));
                            }
                            let items = self.initializer(&ty, i, 0)?;
                            check_constant_init(&items)?;
                            self.globals[g].init = items;
                        }
                        continue;
                    }
                }
                let gname = match &self.cur {
                    Some(f) => format!("{}_{name}", f.name),
                    None => name.clone(),
                };
                let idx = self.globals.len();
                self.globals.push(Global { decl: VarDecl { name: gname, ty: ty.clone(), loc: loc.clone() }, init: vec![] });
                self.bind(&name, Sym::Var(VarRef::Global(idx), ty.clone()), &loc)?;
                if let Some(i) = &init.init {
                    let items = self.initializer(&ty, i, 0)?;
                    check_constant_init(&items)?;
                    self.globals[idx].init = items;
                }
            } else {
                return type_err(&loc, "local declaration outside a function");
            }
        }
        Ok(())
    }

    fn local_declaration(&mut self, d: &ast::Declaration, out: &mut Vec<Stmt>) -> TResult<()> {
        if d.specs.storage.is_some() || d.inits.is_empty() {
            return self.declaration(d, false);
        }
        let base = self.base_type(&d.specs)?;
        for init in &d.inits {
            let loc = d.declarator_loc(init);
            let (name, ty) = self.apply_declarator(base.clone(), &init.declarator)?;
            let name = name.unwrap();
            if let CType::Function(sig) = &ty {
                self.declare_function(&name, sig.clone(), &loc)?;
                continue;
            }
            let ty = self.complete_array_length(ty, init.init.as_ref(), &loc)?;
            if !self.types.is_complete(&ty) {
                return Err(Diagnostic::at(
                    Code::Incomplete,
                    &loc,
                    format!("variable '{name}' has incomplete type '{}'", self.display(&ty)),
                ));
            }
            let cur = self.cur.as_mut().unwrap();
            let idx = cur.locals.len();
            cur.locals.push(VarDecl { name: name.clone(), ty: ty.clone(), loc: loc.clone() });
            self.bind(&name, Sym::Var(VarRef::Local(idx), ty.clone()), &loc)?;
            let items = match &init.init {
                Some(i) => self.initializer(&ty, i, 0)?,
                None => vec![],
            };
            out.push(Stmt::Decl { var: idx, init: items, loc });
        }
        Ok(())
    }

    fn complete_array_length(&mut self, ty: CType, init: Option<&Initializer>, loc: &SourceLoc) -> TResult<CType> {
        if let CType::Array(e, None) = &ty {
            return match init {
                Some(Initializer::List(items, _)) => Ok(CType::Array(e.clone(), Some(items.len() as u64))),
                _ => Err(Diagnostic::at(Code::Incomplete, loc, "array length cannot be determined")),
            };
        }
        Ok(ty)
    }

    fn initializer(&mut self, ty: &CType, init: &Initializer, offset: u64) -> TResult<Vec<InitItem>> {
        match (ty, init) {
            (CType::Array(elem, Some(n)), Initializer::List(items, pos)) => {
                if items.len() as u64 > *n {
                    return type_err(&pos.0, "excess elements in array initializer");
                }
                let es = self.types.size_of(elem);
                let mut out = Vec::new();
                for (k, it) in items.iter().enumerate() {
                    out.extend(self.initializer(elem, it, offset + k as u64 * es)?);
                }
                Ok(out)
            }
            (CType::Record(id), Initializer::List(items, pos)) => {
                let fields = self.types.record(*id).fields.clone().unwrap();
                let limit = if self.types.record(*id).is_union { 1 } else { fields.len() };
                if items.len() > limit {
                    return type_err(&pos.0, "excess elements in struct initializer");
                }
                let mut out = Vec::new();
                for (f, it) in fields.iter().zip(items) {
                    out.extend(self.initializer(&f.ty, it, offset + f.offset)?);
                }
                Ok(out)
            }
            (t, Initializer::List(items, pos)) if t.is_scalar() => match items.as_slice() {
                [single @ Initializer::Expr(_)] => self.initializer(t, single, offset),
                _ => type_err(&pos.0, "scalar initializer must be a single expression"),
            },
            (CType::Array(..), Initializer::Expr(e)) => type_err(e.loc(), "array initializer must be a braced list"),
            (t, Initializer::Expr(e)) => {
                let v = self.rvalue(e)?;
                let v = self.convert(v, t, false)?;
                Ok(vec![InitItem { offset, value: v }])
            }
            (_, Initializer::List(_, pos)) => type_err(&pos.0, "invalid initializer"),
        }
    }

    fn declare_function(&mut self, name: &str, sig: Arc<FnSig>, loc: &SourceLoc) -> TResult<FuncId> {
        if let Some(Sym::Func(id)) = self.scopes[0].get(name).cloned() {
            if self.functions[id].sig != sig {
                return type_err(loc, format!("conflicting types for '{name}'"));
            }
            self.bind(name, Sym::Func(id), loc)?;
            return Ok(id);
        }
        if self.scopes[0].contains_key(name) {
            return type_err(loc, format!("'{name}' redeclared as a function"));
        }
        let id = self.functions.len();
        self.functions.push(Function {
            name: name.to_string(),
            sig,
            locals: vec![],
            body: None,
            loc: loc.clone(),
            address_taken: false,
            code: None,
        });
        self.scopes[0].insert(name.to_string(), Sym::Func(id));
        if self.scopes.len() > 1 {
            self.bind(name, Sym::Func(id), loc)?;
        }
        Ok(id)
    }

    fn function_def(&mut self, f: &ast::FunctionDef) -> TResult<()> {
        let loc = f.declarator.pos().0.clone();
        let base = self.base_type(&f.specs)?;
        let (name, ty) = self.apply_declarator(base, &f.declarator)?;
        let name = name.unwrap();
        let CType::Function(sig) = ty else { return type_err(&loc, "expected a function declarator") };
        let id = self.declare_function(&name, sig.clone(), &loc)?;
        if self.functions[id].body.is_some() {
            return type_err(&loc, format!("redefinition of function '{name}'"));
        }
        self.functions[id].loc = loc.clone();
        if sig.ret != CType::Void && !self.types.is_complete(&sig.ret) {
            return Err(Diagnostic::at(Code::Incomplete, &loc, "function returns an incomplete type"));
        }
        let params = super::parser::function_params(&f.declarator).unwrap_or(&[]);
        self.push_scope();
        self.cur = Some(CurFn { name: name.clone(), ret: sig.ret.clone(), locals: vec![], loops: 0 });
        let result = (|| {
            for (k, p) in params.iter().enumerate() {
                let t = sig.params[k].clone();
                let pname = match p.declarator.name() {
                    Some(n) => n.to_string(),
                    None => format!("arg{k}"),
                };
                let ploc = p.declarator.pos().0.clone();
                if !self.types.is_complete(&t) {
                    return Err(Diagnostic::at(Code::Incomplete, &ploc, format!("parameter '{pname}' has incomplete type")));
                }
                self.cur.as_mut().unwrap().locals.push(VarDecl { name: pname.clone(), ty: t.clone(), loc: ploc.clone() });
                if p.declarator.name().is_some() {
                    self.bind(&pname, Sym::Var(VarRef::Local(k), t), &ploc)?;
                }
            }
            self.block_items(&f.body.items)
        })();
        self.pop_scope();
        let cur = self.cur.take().unwrap();
        let body = result?;
        let func = &mut self.functions[id];
        func.locals = cur.locals;
        func.body = Some(body);
        Ok(())
    }

    // ---- statements --------------------------------------------------

    fn block_items(&mut self, items: &[ast::Stmt]) -> TResult<Vec<Stmt>> {
        let mut out = Vec::new();
        for s in items {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn scoped_block(&mut self, items: &[ast::Stmt]) -> TResult<Vec<Stmt>> {
        self.push_scope();
        let r = self.block_items(items);
        self.pop_scope();
        r
    }

    fn sub_stmt(&mut self, s: &ast::Stmt) -> TResult<Vec<Stmt>> {
        self.push_scope();
        let mut out = Vec::new();
        let r = self.stmt(s, &mut out);
        self.pop_scope();
        r.map(|_| out)
    }

    fn loop_id(&mut self) -> String {
        let cur = self.cur.as_mut().unwrap();
        let id = format!("{}.{}", cur.name, cur.loops);
        cur.loops += 1;
        id
    }

    fn condition(&mut self, e: &ast::Expr) -> TResult<TExpr> {
        let t = self.rvalue(e)?;
        if !t.ty.is_scalar() {
            return type_err(e.loc(), format!("expected a scalar condition, got '{}'", self.display(&t.ty)));
        }
        self.convert(t, &CType::Bool, false)
    }

    fn stmt(&mut self, s: &ast::Stmt, out: &mut Vec<Stmt>) -> TResult<()> {
        match s {
            ast::Stmt::Decl(d) => self.local_declaration(d, out)?,
            ast::Stmt::Expr(None, _) => {}
            ast::Stmt::Expr(Some(e), pos) => {
                if let ExprKind::Call(callee, args) = &e.kind {
                    if let ExprKind::Ident(n) = &callee.kind {
                        if n == "assert" && self.lookup(n).is_none() {
                            out.push(self.assert_stmt(args, &pos.0)?);
                            return Ok(());
                        }
                    }
                }
                out.push(Stmt::Expr(self.expr_discarded(e)?));
            }
            ast::Stmt::Block(b) => out.push(Stmt::Block(self.scoped_block(&b.items)?)),
            ast::Stmt::If(c, t, e, pos) => {
                let cond = self.condition(c)?;
                let then = self.sub_stmt(t)?;
                let els = match e {
                    Some(e) => self.sub_stmt(e)?,
                    None => vec![],
                };
                out.push(Stmt::If { cond, then, els, loc: pos.0.clone() });
            }
            ast::Stmt::While(c, b, pos) => {
                let id = self.loop_id();
                let cond = self.condition(c)?;
                let body = self.loop_body(b)?;
                out.push(Stmt::Loop { id, cond: Some(cond), step: None, body, test_first: true, loc: pos.0.clone() });
            }
            ast::Stmt::DoWhile(b, c, pos) => {
                let id = self.loop_id();
                let body = self.loop_body(b)?;
                let cond = self.condition(c)?;
                out.push(Stmt::Loop { id, cond: Some(cond), step: None, body, test_first: false, loc: pos.0.clone() });
            }
            ast::Stmt::For(init, c, step, b, pos) => {
                self.push_scope();
                let r = (|| {
                    let mut stmts = Vec::new();
                    if let Some(i) = init {
                        self.stmt(i, &mut stmts)?;
                    }
                    let id = self.loop_id();
                    let cond = c.as_ref().map(|c| self.condition(c)).transpose()?;
                    let step = step.as_ref().map(|s| self.expr_discarded(s)).transpose()?;
                    let body = self.loop_body(b)?;
                    stmts.push(Stmt::Loop { id, cond, step, body, test_first: true, loc: pos.0.clone() });
                    Ok(stmts)
                })();
                self.pop_scope();
                out.push(Stmt::Block(r?));
            }
            ast::Stmt::Switch(d, b, pos) => out.push(self.switch(d, b, &pos.0)?),
            ast::Stmt::Case(_, _, pos) | ast::Stmt::Default(_, pos) => {
                return Err(Diagnostic::at(
                    Code::UnsupportedConstruct,
                    &pos.0,
                    "case label outside the top level of a switch body",
                ))
            }
            ast::Stmt::Break(pos) => {
                if self.breakable == 0 {
                    return type_err(&pos.0, "'break' outside a loop or switch");
                }
                out.push(Stmt::Break(pos.0.clone()));
            }
            ast::Stmt::Continue(pos) => {
                if self.continuable == 0 {
                    return type_err(&pos.0, "'continue' outside a loop");
                }
                out.push(Stmt::Continue(pos.0.clone()));
            }
            ast::Stmt::Return(e, pos) => {
                let ret = self.cur.as_ref().unwrap().ret.clone();
                let v = match (e, &ret) {
                    (None, CType::Void) => None,
                    (None, _) => return type_err(&pos.0, "non-void function must return a value"),
                    (Some(e), CType::Void) => {
                        let v = self.rvalue(e)?;
                        if v.ty != CType::Void {
                            return type_err(e.loc(), "void function cannot return a value");
                        }
                        Some(v)
                    }
                    (Some(e), t) => {
                        let v = self.rvalue(e)?;
                        Some(self.convert(v, t, false)?)
                    }
                };
                out.push(Stmt::Return(v, pos.0.clone()));
            }
            ast::Stmt::Sample(t, name, pos) | ast::Stmt::Drive(t, name, pos) => {
                let sample = matches!(s, ast::Stmt::Sample(..));
                let ty = self.type_name(t)?;
                let loc = &pos.0;
                let Some(Sym::Var(r, vty)) = self.lookup(name).cloned() else {
                    return Err(Diagnostic::at(Code::Interface, loc, format!("'{name}' is not a variable in scope")));
                };
                let tsize = self.types.layout(&ty, loc)?.size;
                let vsize = self.types.layout(&vty, loc)?.size;
                if tsize != vsize {
                    return Err(Diagnostic::at(
                        Code::Interface,
                        loc,
                        format!(
                            "interface type '{}' has {tsize} bytes but '{name}' has {vsize}",
                            self.display(&ty)
                        ),
                    ));
                }
                let var = TExpr::new(TExprKind::Var(r), vty, loc.clone());
                out.push(if sample {
                    Stmt::Sample { target: var, name: name.clone(), loc: loc.clone() }
                } else {
                    Stmt::Drive { value: var, name: name.clone(), loc: loc.clone() }
                });
            }
        }
        Ok(())
    }

    fn loop_body(&mut self, b: &ast::Stmt) -> TResult<Vec<Stmt>> {
        self.breakable += 1;
        self.continuable += 1;
        let r = self.sub_stmt(b);
        self.breakable -= 1;
        self.continuable -= 1;
        r
    }

    fn switch(&mut self, d: &ast::Expr, b: &ast::Stmt, loc: &SourceLoc) -> TResult<Stmt> {
        let disc = self.rvalue(d)?;
        if !disc.ty.is_integer() {
            return type_err(d.loc(), format!("switch needs an integer, got '{}'", self.display(&disc.ty)));
        }
        let pty = promote(&disc.ty);
        let disc = self.convert(disc, &pty, false)?;
        let items: &[ast::Stmt] = match b {
            ast::Stmt::Block(blk) => &blk.items,
            other => std::slice::from_ref(other),
        };
        self.push_scope();
        self.breakable += 1;
        let r = (|| {
            let mut labels = Vec::new();
            let mut seen = HashSet::new();
            let mut body = Vec::new();
            for it in items {
                let mut s = it;
                loop {
                    match s {
                        ast::Stmt::Case(v, inner, pos) => {
                            let t = self.rvalue(v)?;
                            let t = self.convert(t, &pty, false)?;
                            let Some(k) = t.as_const() else {
                                return type_err(&pos.0, "case label is not an integer constant");
                            };
                            if !seen.insert(Some(k)) {
                                return type_err(&pos.0, "duplicate case value");
                            }
                            labels.push((Some(k), body.len()));
                            s = inner;
                        }
                        ast::Stmt::Default(inner, pos) => {
                            if !seen.insert(None) {
                                return type_err(&pos.0, "multiple default labels");
                            }
                            labels.push((None, body.len()));
                            s = inner;
                        }
                        _ => break,
                    }
                }
                self.stmt(s, &mut body)?;
            }
            Ok(Stmt::Switch { disc, labels, body, loc: loc.clone() })
        })();
        self.breakable -= 1;
        self.pop_scope();
        r
    }

    fn assert_stmt(&mut self, args: &[ast::Expr], loc: &SourceLoc) -> TResult<Stmt> {
        let [arg] = args else { return type_err(loc, "assert takes exactly one argument") };
        let (cond_ast, msg) = match &arg.kind {
            ExprKind::Binary(BinaryOp::LogAnd, a, b) => match &b.kind {
                ExprKind::StrLit(s) => {
                    let bytes = unescape(s).map_err(|m| Diagnostic::at(Code::Syntax, b.loc(), m))?;
                    (&**a, String::from_utf8_lossy(&bytes).into_owned())
                }
                _ => (arg, format!("assertion {}", render_expr(arg))),
            },
            _ => (arg, format!("assertion {}", render_expr(arg))),
        };
        let cond = self.condition(cond_ast)?;
        Ok(Stmt::Assert { cond, msg, loc: loc.clone() })
    }

    // ---- expressions -------------------------------------------------

    fn expr_discarded(&mut self, e: &ast::Expr) -> TResult<TExpr> {
        let t = self.expr(e)?;
        Ok(match t.ty {
            CType::Array(..) => self.decay(t),
            _ => t,
        })
    }

    /// Types an expression used as a value: arrays decay to pointers.
    fn rvalue(&mut self, e: &ast::Expr) -> TResult<TExpr> {
        let t = self.expr(e)?;
        Ok(self.decay(t))
    }

    fn decay(&mut self, t: TExpr) -> TExpr {
        match &t.ty {
            CType::Array(elem, _) => {
                let ty = CType::ptr((**elem).clone());
                let loc = t.loc.clone();
                TExpr::new(TExprKind::Decay(Box::new(t)), ty, loc)
            }
            _ => t,
        }
    }

    fn int_const(&self, v: u64, ty: CType, loc: &SourceLoc) -> TExpr {
        let bits = ty.scalar_bits().unwrap();
        TExpr::new(TExprKind::Const(mask(v, bits)), ty, loc.clone())
    }

    fn expr(&mut self, e: &ast::Expr) -> TResult<TExpr> {
        let loc = e.loc().clone();
        match &e.kind {
            ExprKind::Ident(n) => match self.lookup(n).cloned() {
                Some(Sym::Var(r, t)) => Ok(TExpr::new(TExprKind::Var(r), t, loc)),
                Some(Sym::Func(id)) => Ok(self.func_addr(id, &loc)),
                Some(Sym::Enum(v)) => Ok(self.int_const(v as u64, INT, &loc)),
                Some(Sym::Typedef(_)) => type_err(&loc, format!("unexpected type name '{n}'")),
                None => type_err(&loc, format!("use of undeclared identifier '{n}'")),
            },
            ExprKind::IntLit(s) => self.int_literal(s, &loc),
            ExprKind::FloatLit(s) => {
                let lower = s.to_ascii_lowercase();
                if let Some(body) = lower.strip_suffix('f') {
                    let v: f32 = body.parse().map_err(|_| Diagnostic::at(Code::Syntax, &loc, "malformed float constant"))?;
                    Ok(TExpr::new(TExprKind::Const(v.to_bits() as u64), CType::Float, loc))
                } else {
                    let body = lower.trim_end_matches('l');
                    let v: f64 = body.parse().map_err(|_| Diagnostic::at(Code::Syntax, &loc, "malformed float constant"))?;
                    Ok(TExpr::new(TExprKind::Const(v.to_bits()), CType::Double, loc))
                }
            }
            ExprKind::StrLit(_) => Err(Diagnostic::at(
                Code::UnsupportedConstruct,
                &loc,
                "string literals are only allowed as assertion messages",
            )),
            ExprKind::Unary(op, a) => self.unary(*op, a, &loc),
            ExprKind::Binary(op, a, b) => {
                let a = self.rvalue(a)?;
                let b = self.rvalue(b)?;
                self.binary(*op, a, b, &loc)
            }
            ExprKind::Assign(op, l, r) => {
                let lhs = self.expr(l)?;
                self.check_assignable(&lhs)?;
                let rhs = self.rvalue(r)?;
                let value = match op {
                    None => self.convert(rhs, &lhs.ty, false)?,
                    Some(op) => {
                        let cur = TExpr::new(TExprKind::Current, lhs.ty.clone(), loc.clone());
                        let v = self.binary(*op, cur, rhs, &loc)?;
                        self.convert_lenient(v, &lhs.ty)?
                    }
                };
                let ty = lhs.ty.clone();
                Ok(TExpr::new(TExprKind::Update { lhs: Box::new(lhs), value: Box::new(value), yield_old: false }, ty, loc))
            }
            ExprKind::Cond(c, a, b) => {
                let c = self.condition(c)?;
                let a = self.rvalue(a)?;
                let b = self.rvalue(b)?;
                let ty = self.cond_type(&a, &b, &loc)?;
                let a = self.convert(a, &ty, false)?;
                let b = self.convert(b, &ty, false)?;
                if let Some(k) = c.as_const() {
                    return Ok(if k != 0 { a } else { b });
                }
                Ok(TExpr::new(TExprKind::Cond(Box::new(c), Box::new(a), Box::new(b)), ty, loc))
            }
            ExprKind::Cast(t, a) => {
                let ty = self.type_name(t)?;
                let v = self.rvalue(a)?;
                if matches!(ty, CType::Array(..) | CType::Function(_) | CType::Record(_)) && v.ty != ty {
                    return type_err(&loc, format!("cannot cast to '{}'", self.display(&ty)));
                }
                let mut r = self.convert(v, &ty, true)?;
                r.loc = loc;
                Ok(r)
            }
            ExprKind::SizeofType(t) => {
                let ty = self.type_name(t)?;
                let size = self.types.layout(&ty, &loc)?.size;
                Ok(self.int_const(size, ULONG, &loc))
            }
            ExprKind::SizeofExpr(a) => {
                let t = self.expr(a)?;
                let size = self.types.layout(&t.ty, &loc)?.size;
                Ok(self.int_const(size, ULONG, &loc))
            }
            ExprKind::Index(a, i) => {
                let a = self.rvalue(a)?;
                let i = self.rvalue(i)?;
                let (p, i) = if a.ty.is_pointer() { (a, i) } else { (i, a) };
                if !p.ty.is_pointer() || !i.ty.is_integer() {
                    return type_err(&loc, "subscript needs a pointer or array and an integer");
                }
                let sum = self.binary(BinaryOp::Add, p, i, &loc)?;
                self.deref(sum, &loc)
            }
            ExprKind::Member(a, f) => {
                let base = self.expr(a)?;
                self.member(base, f, &loc)
            }
            ExprKind::Arrow(a, f) => {
                let p = self.rvalue(a)?;
                if !p.ty.is_pointer() {
                    return type_err(&loc, format!("'->' needs a pointer, got '{}'", self.display(&p.ty)));
                }
                let base = self.deref(p, &loc)?;
                self.member(base, f, &loc)
            }
            ExprKind::Call(callee, args) => self.call(callee, args, &loc),
            ExprKind::Comma(a, b) => {
                let a = self.expr_discarded(a)?;
                let b = self.rvalue(b)?;
                let ty = b.ty.clone();
                Ok(TExpr::new(TExprKind::Comma(Box::new(a), Box::new(b)), ty, loc))
            }
        }
    }

    fn func_addr(&mut self, id: FuncId, loc: &SourceLoc) -> TExpr {
        let ty = CType::ptr(CType::Function(self.functions[id].sig.clone()));
        TExpr::new(TExprKind::FuncAddr(id), ty, loc.clone())
    }

    fn int_literal(&mut self, s: &str, loc: &SourceLoc) -> TResult<TExpr> {
        if s.starts_with('\'') {
            let bytes = unescape(s).map_err(|m| Diagnostic::at(Code::Syntax, loc, m))?;
            let [b] = bytes[..] else {
                return Err(Diagnostic::at(Code::Syntax, loc, "character constant must hold one character"));
            };
            return Ok(self.int_const(b as i8 as i64 as u64, INT, loc));
        }
        let (v, unsigned, longs) =
            parse_int_literal(s).ok_or_else(|| Diagnostic::at(Code::Syntax, loc, format!("malformed integer '{s}'")))?;
        let decimal = !s.starts_with('0') || s == "0" || s.len() > 1 && s[1..].starts_with(|c: char| !c.is_ascii_digit() && c != 'x' && c != 'X');
        let candidates: Vec<CType> = match (unsigned, longs > 0, decimal) {
            (false, false, true) => vec![INT, LONG],
            (false, false, false) => vec![INT, UINT, LONG, ULONG],
            (true, false, _) => vec![UINT, ULONG],
            (false, true, true) => vec![LONG],
            (false, true, false) => vec![LONG, ULONG],
            (true, true, _) => vec![ULONG],
        };
        for t in candidates {
            let fits = match t {
                CType::Int { signed: true, bits } => v < (1u64 << (bits - 1)),
                CType::Int { signed: false, bits } => bits == 64 || v < (1u64 << bits),
                _ => false,
            };
            if fits {
                return Ok(self.int_const(v, t, loc));
            }
        }
        Ok(self.int_const(v, ULONG, loc))
    }

    fn check_assignable(&self, lhs: &TExpr) -> TResult<()> {
        if !lhs.is_lvalue() {
            return type_err(&lhs.loc, "expression is not assignable");
        }
        if matches!(lhs.ty, CType::Array(..) | CType::Function(_)) {
            return type_err(&lhs.loc, format!("cannot assign to '{}'", self.display(&lhs.ty)));
        }
        Ok(())
    }

    fn deref(&mut self, p: TExpr, loc: &SourceLoc) -> TResult<TExpr> {
        let Some(t) = p.ty.pointee().cloned() else {
            return type_err(loc, format!("cannot dereference '{}'", self.display(&p.ty)));
        };
        match t {
            CType::Function(_) => Ok(p),
            CType::Void => type_err(loc, "cannot dereference a void pointer"),
            t => Ok(TExpr::new(TExprKind::Deref(Box::new(p)), t, loc.clone())),
        }
    }

    fn member(&mut self, base: TExpr, f: &str, loc: &SourceLoc) -> TResult<TExpr> {
        let CType::Record(id) = base.ty else {
            return type_err(loc, format!("member access on non-record type '{}'", self.display(&base.ty)));
        };
        let Some((ty, off)) = self.types.find_member(id, f) else {
            return type_err(loc, format!("'{}' has no member '{f}'", self.display(&base.ty)));
        };
        Ok(TExpr::new(TExprKind::Member(Box::new(base), off), ty, loc.clone()))
    }

    fn unary(&mut self, op: UnaryOp, a: &ast::Expr, loc: &SourceLoc) -> TResult<TExpr> {
        match op {
            UnaryOp::AddrOf => {
                let v = self.expr(a)?;
                if let TExprKind::FuncAddr(_) = v.kind {
                    return Ok(v);
                }
                if !v.is_lvalue() {
                    return type_err(loc, "cannot take the address of an rvalue");
                }
                let ty = CType::ptr(v.ty.clone());
                Ok(TExpr::new(TExprKind::AddrOf(Box::new(v)), ty, loc.clone()))
            }
            UnaryOp::Deref => {
                let v = self.rvalue(a)?;
                self.deref(v, loc)
            }
            UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec => {
                let lhs = self.expr(a)?;
                self.check_assignable(&lhs)?;
                if !lhs.ty.is_scalar() {
                    return type_err(loc, format!("cannot increment '{}'", self.display(&lhs.ty)));
                }
                let inc = matches!(op, UnaryOp::PreInc | UnaryOp::PostInc);
                let cur = TExpr::new(TExprKind::Current, lhs.ty.clone(), loc.clone());
                let one = match lhs.ty {
                    CType::Float => TExpr::new(TExprKind::Const(1.0f32.to_bits() as u64), CType::Float, loc.clone()),
                    _ => self.int_const(1, INT, loc),
                };
                let v = self.binary(if inc { BinaryOp::Add } else { BinaryOp::Sub }, cur, one, loc)?;
                let value = self.convert_lenient(v, &lhs.ty)?;
                let ty = lhs.ty.clone();
                let post = matches!(op, UnaryOp::PostInc | UnaryOp::PostDec);
                Ok(TExpr::new(TExprKind::Update { lhs: Box::new(lhs), value: Box::new(value), yield_old: post }, ty, loc.clone()))
            }
            UnaryOp::Not => {
                let b = self.condition(a)?;
                Ok(fold(TExpr::new(TExprKind::Unary(UnOp::LogNot, Box::new(b)), INT, loc.clone())))
            }
            UnaryOp::Plus | UnaryOp::Minus | UnaryOp::BitNot => {
                let v = self.rvalue(a)?;
                if v.ty == CType::Double {
                    return float_err(loc, "double arithmetic is not supported");
                }
                if v.ty == CType::Float {
                    return match op {
                        UnaryOp::Plus => Ok(v),
                        UnaryOp::Minus => Ok(TExpr::new(TExprKind::Float(FloatOp::Neg, vec![v]), CType::Float, loc.clone())),
                        _ => type_err(loc, "'~' needs an integer operand"),
                    };
                }
                if !v.ty.is_integer() {
                    return type_err(loc, format!("invalid operand type '{}'", self.display(&v.ty)));
                }
                let t = promote(&v.ty);
                let v = self.convert(v, &t, false)?;
                Ok(match op {
                    UnaryOp::Plus => v,
                    UnaryOp::Minus => fold(TExpr::new(TExprKind::Unary(UnOp::Neg, Box::new(v)), t, loc.clone())),
                    _ => fold(TExpr::new(TExprKind::Unary(UnOp::BitNot, Box::new(v)), t, loc.clone())),
                })
            }
        }
    }

    fn is_null_const(e: &TExpr) -> bool {
        e.ty.is_integer() && e.as_const() == Some(0)
    }

    fn binary(&mut self, op: BinaryOp, a: TExpr, b: TExpr, loc: &SourceLoc) -> TResult<TExpr> {
        use BinaryOp::*;
        let l = loc.clone();
        if matches!(op, LogAnd | LogOr) {
            let a = self.to_bool(a)?;
            let b = self.to_bool(b)?;
            return Ok(fold(TExpr::new(TExprKind::Logical(op == LogAnd, Box::new(a), Box::new(b)), INT, l)));
        }
        if matches!(op, Add | Sub) && (a.ty.is_pointer() || b.ty.is_pointer()) {
            return self.pointer_arith(op, a, b, loc);
        }
        if matches!(op, Lt | Gt | Le | Ge | Eq | Ne) {
            return self.compare(op, a, b, loc);
        }
        if a.ty == CType::Double || b.ty == CType::Double {
            return float_err(loc, "double arithmetic is not supported");
        }
        if a.ty == CType::Float || b.ty == CType::Float {
            let fop = match op {
                Add => FloatOp::Add,
                Sub => FloatOp::Sub,
                Mul => FloatOp::Mul,
                Div => return float_err(loc, "floating-point division is not supported"),
                _ => return type_err(loc, format!("invalid operands to '{}'", op.token())),
            };
            if !a.ty.is_arithmetic() || !b.ty.is_arithmetic() {
                return type_err(loc, format!("invalid operands to '{}'", op.token()));
            }
            let a = self.convert(a, &CType::Float, false)?;
            let b = self.convert(b, &CType::Float, false)?;
            return Ok(TExpr::new(TExprKind::Float(fop, vec![a, b]), CType::Float, l));
        }
        if !a.ty.is_integer() || !b.ty.is_integer() {
            return type_err(
                loc,
                format!("invalid operands to '{}' ('{}' and '{}')", op.token(), self.display(&a.ty), self.display(&b.ty)),
            );
        }
        let aop = match op {
            Mul => ArithOp::Mul,
            Div => ArithOp::Div,
            Rem => ArithOp::Rem,
            Add => ArithOp::Add,
            Sub => ArithOp::Sub,
            Shl => ArithOp::Shl,
            Shr => ArithOp::Shr,
            BitAnd => ArithOp::And,
            BitOr => ArithOp::Or,
            BitXor => ArithOp::Xor,
            _ => unreachable!(),
        };
        if matches!(op, Shl | Shr) {
            let ta = promote(&a.ty);
            let tb = promote(&b.ty);
            let a = self.convert(a, &ta, false)?;
            let b = self.convert(b, &tb, false)?;
            return Ok(fold(TExpr::new(TExprKind::Binary(aop, Box::new(a), Box::new(b)), ta, l)));
        }
        let t = usual_arith_conversions(&a.ty, &b.ty).map_err(|d| Diagnostic { loc: Some(loc.clone()), ..d })?;
        let a = self.convert(a, &t, false)?;
        let b = self.convert(b, &t, false)?;
        Ok(fold(TExpr::new(TExprKind::Binary(aop, Box::new(a), Box::new(b)), t, l)))
    }

    fn pointer_arith(&mut self, op: BinaryOp, a: TExpr, b: TExpr, loc: &SourceLoc) -> TResult<TExpr> {
        let l = loc.clone();
        if a.ty.is_pointer() && b.ty.is_pointer() {
            if op != BinaryOp::Sub || a.ty != b.ty {
                return type_err(loc, "invalid pointer arithmetic");
            }
            let size = self.elem_size(&a.ty, loc)?;
            return Ok(TExpr::new(TExprKind::PtrDiff(Box::new(a), Box::new(b), size), LONG, l));
        }
        let (p, i) = if a.ty.is_pointer() { (a, b) } else { (b, a) };
        if !i.ty.is_integer() || (op == BinaryOp::Sub && !p.ty.is_pointer()) {
            return type_err(loc, "invalid pointer arithmetic");
        }
        if op == BinaryOp::Sub && i.ty.is_pointer() {
            return type_err(loc, "cannot subtract a pointer from an integer");
        }
        let size = self.elem_size(&p.ty, loc)?;
        let mut i = self.convert(i, &LONG, false)?;
        if op == BinaryOp::Sub {
            i = fold(TExpr::new(TExprKind::Unary(UnOp::Neg, Box::new(i)), LONG, l.clone()));
        }
        let ty = p.ty.clone();
        Ok(TExpr::new(TExprKind::PtrAdd(Box::new(p), Box::new(i), size), ty, l))
    }

    fn elem_size(&self, pty: &CType, loc: &SourceLoc) -> TResult<u64> {
        let t = pty.pointee().unwrap();
        match self.types.layout(t, loc) {
            Ok(l) => Ok(l.size),
            Err(_) => type_err(loc, format!("arithmetic on pointer to incomplete type '{}'", self.display(t))),
        }
    }

    fn compare(&mut self, op: BinaryOp, a: TExpr, b: TExpr, loc: &SourceLoc) -> TResult<TExpr> {
        use BinaryOp::*;
        let l = loc.clone();
        let cop = match op {
            Lt => CmpOp::Lt,
            Gt => CmpOp::Gt,
            Le => CmpOp::Le,
            Ge => CmpOp::Ge,
            Eq => CmpOp::Eq,
            _ => CmpOp::Ne,
        };
        if a.ty.is_pointer() || b.ty.is_pointer() {
            let pty = if a.ty.is_pointer() { a.ty.clone() } else { b.ty.clone() };
            let conv = |s: &mut Self, e: TExpr| -> TResult<TExpr> {
                if e.ty.is_pointer() {
                    Ok(s.convert(e, &pty, true)?)
                } else if Self::is_null_const(&e) {
                    Ok(TExpr::new(TExprKind::Const(0), pty.clone(), e.loc))
                } else {
                    type_err(&e.loc, "comparison between pointer and integer")
                }
            };
            let a = conv(self, a)?;
            let b = conv(self, b)?;
            return Ok(TExpr::new(TExprKind::Compare(cop, Box::new(a), Box::new(b)), INT, l));
        }
        if !a.ty.is_arithmetic() || !b.ty.is_arithmetic() {
            return type_err(loc, format!("invalid operands to '{}'", op.token()));
        }
        if a.ty == CType::Double || b.ty == CType::Double {
            return float_err(loc, "double comparison is not supported");
        }
        if a.ty == CType::Float || b.ty == CType::Float {
            let a = self.convert(a, &CType::Float, false)?;
            let b = self.convert(b, &CType::Float, false)?;
            let call = |fop, x, y| TExpr::new(TExprKind::Float(fop, vec![x, y]), INT, l.clone());
            return Ok(match cop {
                CmpOp::Eq => call(FloatOp::Eq, a, b),
                CmpOp::Ne => {
                    let eq = self.to_bool(call(FloatOp::Eq, a, b))?;
                    TExpr::new(TExprKind::Unary(UnOp::LogNot, Box::new(eq)), INT, l.clone())
                }
                CmpOp::Lt => call(FloatOp::Lt, a, b),
                CmpOp::Le => call(FloatOp::Le, a, b),
                CmpOp::Gt => call(FloatOp::Lt, b, a),
                CmpOp::Ge => call(FloatOp::Le, b, a),
            });
        }
        let t = usual_arith_conversions(&a.ty, &b.ty).map_err(|d| Diagnostic { loc: Some(loc.clone()), ..d })?;
        let a = self.convert(a, &t, false)?;
        let b = self.convert(b, &t, false)?;
        Ok(fold(TExpr::new(TExprKind::Compare(cop, Box::new(a), Box::new(b)), INT, l)))
    }

    fn cond_type(&self, a: &TExpr, b: &TExpr, loc: &SourceLoc) -> TResult<CType> {
        if a.ty == b.ty {
            return Ok(a.ty.clone());
        }
        if a.ty.is_integer() && b.ty.is_integer() {
            return usual_arith_conversions(&a.ty, &b.ty);
        }
        if a.ty.is_arithmetic() && b.ty.is_arithmetic() {
            if a.ty == CType::Double || b.ty == CType::Double {
                return float_err(loc, "double arithmetic is not supported");
            }
            return Ok(CType::Float);
        }
        if a.ty.is_pointer() && Self::is_null_const(b) {
            return Ok(a.ty.clone());
        }
        if b.ty.is_pointer() && Self::is_null_const(a) {
            return Ok(b.ty.clone());
        }
        if a.ty.is_pointer() && b.ty.is_pointer() {
            if a.ty.pointee() == Some(&CType::Void) {
                return Ok(a.ty.clone());
            }
            if b.ty.pointee() == Some(&CType::Void) {
                return Ok(b.ty.clone());
            }
        }
        type_err(loc, format!("incompatible operand types '{}' and '{}'", self.display(&a.ty), self.display(&b.ty)))
    }

    fn call(&mut self, callee: &ast::Expr, args: &[ast::Expr], loc: &SourceLoc) -> TResult<TExpr> {
        let direct = match &callee.kind {
            ExprKind::Ident(n) => match self.lookup(n) {
                Some(Sym::Func(id)) => Some(*id),
                None if n == "assert" => return type_err(loc, "assert may only be used as a statement"),
                _ => None,
            },
            _ => None,
        };
        let (target, sig) = match direct {
            Some(id) => (None, self.functions[id].sig.clone()),
            None => {
                let f = self.rvalue(callee)?;
                let sig = match f.ty.pointee() {
                    Some(CType::Function(sig)) => sig.clone(),
                    _ => return type_err(loc, format!("called object of type '{}' is not a function", self.display(&f.ty))),
                };
                (Some(f), sig)
            }
        };
        if args.len() != sig.params.len() {
            return type_err(loc, format!("expected {} arguments, got {}", sig.params.len(), args.len()));
        }
        let mut targs = Vec::new();
        for (a, p) in args.iter().zip(&sig.params) {
            let v = self.rvalue(a)?;
            targs.push(self.convert(v, p, false)?);
        }
        let ret = sig.ret.clone();
        let kind = match (direct, target) {
            (Some(id), _) => TExprKind::Call(id, targs),
            (None, Some(TExpr { kind: TExprKind::FuncAddr(id), .. })) => TExprKind::Call(id, targs),
            (None, Some(f)) => TExprKind::CallIndirect(Box::new(f), targs),
            (None, None) => unreachable!(),
        };
        Ok(TExpr::new(kind, ret, loc.clone()))
    }

    fn to_bool(&mut self, e: TExpr) -> TResult<TExpr> {
        if !e.ty.is_scalar() {
            return type_err(&e.loc, format!("expected a scalar, got '{}'", self.display(&e.ty)));
        }
        self.convert(e, &CType::Bool, false)
    }

    /// Conversion used for compound assignment results, which C performs
    /// as if by cast.
    fn convert_lenient(&mut self, e: TExpr, to: &CType) -> TResult<TExpr> {
        self.convert(e, to, true)
    }

    fn convert(&mut self, e: TExpr, to: &CType, explicit: bool) -> TResult<TExpr> {
        let from = e.ty.clone();
        if &from == to {
            return Ok(e);
        }
        let loc = e.loc.clone();
        let cast = |e: TExpr| fold(TExpr::new(TExprKind::Cast(Box::new(e)), to.clone(), loc.clone()));
        let bad = |s: &Self| {
            type_err(&loc, format!("cannot convert '{}' to '{}'", s.display(&from), s.display(to)))
        };
        match (&from, to) {
            (_, CType::Void) if explicit => Ok(TExpr::new(TExprKind::Cast(Box::new(e)), CType::Void, loc.clone())),
            (CType::Float, CType::Bool) => {
                let zero = TExpr::new(TExprKind::Const(0), CType::Float, loc.clone());
                let eq = TExpr::new(TExprKind::Float(FloatOp::Eq, vec![e, zero]), INT, loc.clone());
                let eqb = cast_to(eq, &CType::Bool);
                let ne = TExpr::new(TExprKind::Unary(UnOp::LogNot, Box::new(eqb)), INT, loc.clone());
                Ok(cast(ne))
            }
            (CType::Double, _) | (_, CType::Double) => {
                if let (Some(v), CType::Float, CType::Double) = (e.as_const(), to, &from) {
                    let f = f64::from_bits(v) as f32;
                    return Ok(TExpr::new(TExprKind::Const(f.to_bits() as u64), CType::Float, loc));
                }
                if let (Some(v), CType::Double, true) = (e.as_const(), &from, to.is_integer()) {
                    let d = f64::from_bits(v);
                    return self.convert(TExpr::new(TExprKind::Const((d as f32).to_bits() as u64), CType::Float, loc), to, explicit);
                }
                if let (Some(v), CType::Double, CType::Int { signed, bits }) = (e.as_const(), to, &from) {
                    let x = if *signed { Bits::from_u64(*bits, v).sext(64).to_u64() as i64 as f64 } else { v as f64 };
                    return Ok(TExpr::new(TExprKind::Const(x.to_bits()), CType::Double, loc));
                }
                float_err(&loc, "double conversions are not supported")
            }
            (t, CType::Bool) if t.is_scalar() => Ok(cast(e)),
            (CType::Bool | CType::Int { .. }, CType::Int { .. }) => Ok(cast(e)),
            (CType::Bool | CType::Int { .. }, CType::Float) => {
                if let Some(v) = e.as_const() {
                    let f = match from {
                        CType::Int { signed: true, bits } => Bits::from_u64(bits, v).sext(64).to_u64() as i64 as f32,
                        _ => v as f32,
                    };
                    return Ok(TExpr::new(TExprKind::Const(f.to_bits() as u64), CType::Float, loc));
                }
                let (fop, via) = match from {
                    CType::Int { bits: 64, .. } => return float_err(&loc, "64-bit integer to float conversion is not supported"),
                    CType::Int { signed: false, bits: 32 } => (FloatOp::FromU32, UINT),
                    _ => (FloatOp::FromI32, INT),
                };
                let arg = cast_to(e, &via);
                Ok(TExpr::new(TExprKind::Float(fop, vec![arg]), CType::Float, loc.clone()))
            }
            (CType::Float, CType::Int { signed, bits }) => {
                let (fop, via) = match (signed, bits) {
                    (_, 64) => return float_err(&loc, "float to 64-bit integer conversion is not supported"),
                    (false, 32) => (FloatOp::ToU32, UINT),
                    _ => (FloatOp::ToI32, INT),
                };
                let r = TExpr::new(TExprKind::Float(fop, vec![e]), via, loc.clone());
                Ok(cast(r))
            }
            (CType::Pointer(a), CType::Pointer(b)) => {
                if explicit || **a == CType::Void || **b == CType::Void || a == b {
                    Ok(cast(e))
                } else {
                    bad(self)
                }
            }
            (CType::Bool | CType::Int { .. }, CType::Pointer(_)) => {
                if explicit || Self::is_null_const(&e) {
                    Ok(cast(e))
                } else {
                    bad(self)
                }
            }
            (CType::Pointer(_), CType::Int { .. }) if explicit => Ok(cast(e)),
            (CType::Float, CType::Pointer(_)) | (CType::Pointer(_), CType::Float) => bad(self),
            _ => bad(self),
        }
    }

    // ---- whole-program checks ----------------------------------------

    fn finish(mut self) -> TResult<TypedProgram> {
        let mut taken = vec![false; self.functions.len()];
        let mut called: BTreeMap<FuncId, SourceLoc> = BTreeMap::new();
        {
            let mut visit = |e: &TExpr| match &e.kind {
                TExprKind::FuncAddr(id) => {
                    taken[*id] = true;
                    called.entry(*id).or_insert_with(|| e.loc.clone());
                }
                TExprKind::Call(id, _) => {
                    called.entry(*id).or_insert_with(|| e.loc.clone());
                }
                _ => {}
            };
            for g in &self.globals {
                for i in &g.init {
                    i.value.walk(&mut visit);
                }
            }
            for f in &self.functions {
                for s in f.body.iter().flatten() {
                    s.walk_exprs(&mut visit);
                }
            }
        }
        for (id, loc) in &called {
            if self.functions[*id].body.is_none() {
                return type_err(loc, format!("function '{}' is declared but never defined", self.functions[*id].name));
            }
        }
        let mut code = FIRST_FUNCTION_CODE;
        for (f, t) in self.functions.iter_mut().zip(&taken) {
            f.address_taken = *t;
            if *t {
                f.code = Some(code);
                code += 1;
            }
        }
        check_recursion(&self.functions)?;
        let entry_candidates = self
            .functions
            .iter()
            .filter(|f| f.body.is_some() && f.sig.params.is_empty() && f.sig.ret == CType::Void)
            .map(|f| f.name.clone())
            .collect();
        Ok(TypedProgram { types: self.types, globals: self.globals, functions: self.functions, entry_candidates })
    }
}

impl ast::Declaration {
    fn declarator_loc(&self, i: &ast::InitDeclarator) -> SourceLoc {
        i.declarator.pos().0.clone()
    }
}

fn adjust_param(t: CType) -> CType {
    match t {
        CType::Array(e, _) => CType::Pointer(e),
        f @ CType::Function(_) => CType::ptr(f),
        t => t,
    }
}

fn cast_to(e: TExpr, to: &CType) -> TExpr {
    if &e.ty == to {
        return e;
    }
    let loc = e.loc.clone();
    fold(TExpr::new(TExprKind::Cast(Box::new(e)), to.clone(), loc))
}

fn check_constant_init(items: &[InitItem]) -> TResult<()> {
    for it in items {
        let mut bad = None;
        it.value.walk(&mut |e| {
            if matches!(e.kind, TExprKind::Call(..) | TExprKind::CallIndirect(..) | TExprKind::Update { .. } | TExprKind::Float(..))
                && bad.is_none()
            {
                bad = Some(e.loc.clone());
            }
        });
        if let Some(loc) = bad {
            return type_err(&loc, "initializer element is not a constant expression");
        }
    }
    Ok(())
}

fn bits_of(t: &CType) -> u32 {
    t.scalar_bits().unwrap_or(64)
}

fn const_bits(e: &TExpr) -> Option<Bits> {
    match (&e.kind, e.ty.is_integer()) {
        (TExprKind::Const(v), true) => Some(Bits::from_u64(bits_of(&e.ty), *v)),
        _ => None,
    }
}

/// Folds integer operations whose operands are constants.
pub fn fold(e: TExpr) -> TExpr {
    let TExpr { kind, ty, loc } = e;
    let result: Option<Bits> = (|| {
        if !ty.is_integer() && !ty.is_pointer() {
            return None;
        }
        let w = bits_of(&ty);
        match &kind {
            TExprKind::Cast(a) => {
                if a.ty.is_pointer() && !ty.is_pointer() && a.as_const() != Some(0) {
                    return None;
                }
                let v = match &a.kind {
                    TExprKind::Const(v) if a.ty.is_integer() || a.ty.is_pointer() => Bits::from_u64(bits_of(&a.ty), *v),
                    _ => return None,
                };
                if ty == CType::Bool {
                    return Some(Bits::from_u64(8, !v.is_zero() as u64));
                }
                Some(v.resize(w, a.ty.is_signed()))
            }
            TExprKind::Unary(op, a) => {
                let v = const_bits(a)?;
                Some(match op {
                    UnOp::Neg => v.neg(),
                    UnOp::BitNot => v.not(),
                    UnOp::LogNot => Bits::from_u64(w, v.is_zero() as u64),
                })
            }
            TExprKind::Binary(op, a, b) => {
                let (x, y) = (const_bits(a)?, const_bits(b)?);
                let signed = ty.is_signed();
                Some(match op {
                    ArithOp::Add => x.add(&y),
                    ArithOp::Sub => x.sub(&y),
                    ArithOp::Mul => x.mul(&y),
                    ArithOp::Div | ArithOp::Rem if y.is_zero() => return None,
                    ArithOp::Div if signed => x.sdiv(&y),
                    ArithOp::Div => x.udivrem(&y).0,
                    ArithOp::Rem if signed => x.srem(&y),
                    ArithOp::Rem => x.udivrem(&y).1,
                    ArithOp::And => x.and(&y),
                    ArithOp::Or => x.or(&y),
                    ArithOp::Xor => x.xor(&y),
                    ArithOp::Shl | ArithOp::Shr => {
                        let amt = if y.fits_u64() { y.to_u64() } else { u64::MAX };
                        let amt = if b.ty.is_signed() && y.sign() { u64::MAX } else { amt };
                        let n = amt.min(w as u64) as u32;
                        match (op, signed) {
                            (ArithOp::Shl, _) => x.shl_const(n),
                            (_, true) => x.ashr(&Bits::from_u64(w, n as u64)),
                            _ => x.lshr_const(n),
                        }
                    }
                })
            }
            TExprKind::Compare(op, a, b) => {
                let (x, y) = (const_bits(a)?, const_bits(b)?);
                let s = a.ty.is_signed();
                let lt = if s { x.slt(&y) } else { x.ult(&y) };
                let eq = x == y;
                let r = match op {
                    CmpOp::Eq => eq,
                    CmpOp::Ne => !eq,
                    CmpOp::Lt => lt,
                    CmpOp::Le => lt || eq,
                    CmpOp::Gt => !lt && !eq,
                    CmpOp::Ge => !lt,
                };
                Some(Bits::from_u64(w, r as u64))
            }
            TExprKind::Logical(and, a, b) => {
                let x = const_bits(a)?;
                if *and && x.is_zero() {
                    return Some(Bits::from_u64(w, 0));
                }
                if !*and && !x.is_zero() {
                    return Some(Bits::from_u64(w, 1));
                }
                let y = const_bits(b)?;
                Some(Bits::from_u64(w, !y.is_zero() as u64))
            }
            _ => None,
        }
    })();
    match result {
        Some(b) => TExpr { kind: TExprKind::Const(b.to_u64()), ty, loc },
        None => TExpr { kind, ty, loc },
    }
}

fn check_recursion(functions: &[Function]) -> TResult<()> {
    let n = functions.len();
    let mut edges: Vec<Vec<FuncId>> = vec![Vec::new(); n];
    for (i, f) in functions.iter().enumerate() {
        let mut out = Vec::new();
        for s in f.body.iter().flatten() {
            s.walk_exprs(&mut |e| match &e.kind {
                TExprKind::Call(id, _) => out.push(*id),
                TExprKind::CallIndirect(fp, _) => {
                    let sig = fp.ty.pointee().cloned();
                    for (j, g) in functions.iter().enumerate() {
                        if g.address_taken && Some(CType::Function(g.sig.clone())) == sig {
                            out.push(j);
                        }
                    }
                }
                _ => {}
            });
        }
        out.sort_unstable();
        out.dedup();
        edges[i] = out;
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(FuncId, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k < edges[v].len() {
                let w = edges[v][*k];
                *k += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|(x, _)| *x == w).unwrap();
                        let mut names: Vec<&str> = stack[start..].iter().map(|(x, _)| functions[*x].name.as_str()).collect();
                        names.push(&functions[w].name);
                        return Err(Diagnostic::at(
                            Code::Recursion,
                            &functions[w].loc,
                            format!("recursion is not supported: {}", names.join(" -> ")),
                        ));
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    Ok(())
}
