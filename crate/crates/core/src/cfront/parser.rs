//! Recursive-descent parser producing the untyped AST.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{TokKind, Token};
use super::pp::{binary_prec, DRIVE_OUTPUT, SAMPLE_INPUT};
use crate::diag::{Code, Diagnostic, SourceLoc};

pub struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    typedefs: Vec<HashSet<String>>,
    eof: SourceLoc,
}

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(toks: &[Token]) -> PResult<TranslationUnit> {
    Parser::new(toks).translation_unit()
}

/// Parses with typedef names from an earlier unit already in scope.
pub fn parse_with_typedefs(toks: &[Token], names: impl IntoIterator<Item = String>) -> PResult<TranslationUnit> {
    let mut p = Parser::new(toks);
    p.typedefs[0].extend(names);
    p.translation_unit()
}

/// Typedef names declared at file scope of `tu`.
pub fn typedef_names(tu: &TranslationUnit) -> Vec<String> {
    let mut out = Vec::new();
    for item in &tu.items {
        if let ExternalDecl::Decl(d) = item {
            if d.specs.storage == Some(Storage::Typedef) {
                out.extend(d.inits.iter().filter_map(|i| i.declarator.name().map(str::to_string)));
            }
        }
    }
    out
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        let eof = toks.last().map(|t| t.loc.clone()).unwrap_or_else(SourceLoc::builtin);
        Parser { toks, pos: 0, typedefs: vec![HashSet::new()], eof }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k)
    }

    fn loc(&self) -> SourceLoc {
        self.peek().map(|t| t.loc.clone()).unwrap_or_else(|| self.eof.clone())
    }

    fn pos_here(&self) -> Pos {
        Pos(self.loc())
    }

    fn check(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is(s))
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.check(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::at(Code::Syntax, &self.loc(), msg))
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            match self.peek() {
                Some(t) => self.err(format!("expected '{s}' before '{}'", t.text)),
                None => self.err(format!("expected '{s}' at end of input")),
            }
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(t) if t.kind == TokKind::Ident => {
                self.pos += 1;
                Ok(t.text.to_string())
            }
            Some(t) => self.err(format!("expected identifier before '{}'", t.text)),
            None => self.err("expected identifier at end of input"),
        }
    }

    fn is_typedef(&self, name: &str) -> bool {
        self.typedefs.iter().rev().any(|s| s.contains(name))
    }

    fn unsupported<T>(&self, what: &str) -> PResult<T> {
        Err(Diagnostic::at(Code::UnsupportedConstruct, &self.loc(), format!("{what} is not supported")))
    }

    fn starts_type(&self, t: &Token) -> bool {
        match t.kind {
            TokKind::Keyword => matches!(
                &*t.text,
                "void" | "char" | "short" | "int" | "long" | "float" | "double" | "signed" | "unsigned" | "_Bool"
                    | "struct" | "union" | "enum" | "const" | "volatile" | "typedef" | "static" | "extern"
                    | "inline" | "register" | "auto" | "restrict"
            ),
            TokKind::Ident => self.is_typedef(&t.text),
            _ => false,
        }
    }

    pub fn translation_unit(&mut self) -> PResult<TranslationUnit> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            if self.eat(";") {
                continue;
            }
            items.push(self.external_decl()?);
        }
        Ok(TranslationUnit { items })
    }

    fn external_decl(&mut self) -> PResult<ExternalDecl> {
        let start = self.pos_here();
        let specs = self.decl_specs()?;
        if self.eat(";") {
            return Ok(ExternalDecl::Decl(Declaration { specs, inits: vec![], pos: start }));
        }
        let d = self.declarator(false)?;
        if matches!(d, Declarator::Function(..)) && self.check("{") {
            if specs.storage == Some(Storage::Typedef) {
                return self.err("function definition cannot be a typedef");
            }
            let body = self.function_body(&d)?;
            return Ok(ExternalDecl::Func(FunctionDef { specs, declarator: d, body, pos: start }));
        }
        let decl = self.finish_declaration(specs, d, start)?;
        Ok(ExternalDecl::Decl(decl))
    }

    fn function_body(&mut self, d: &Declarator) -> PResult<Block> {
        let mut scope = HashSet::new();
        if let Some(params) = function_params(d) {
            for p in params {
                if let Some(n) = p.declarator.name() {
                    scope.insert(n.to_string());
                }
            }
        }
        // parameters shadow typedef names of the same spelling
        let shadow: HashSet<String> = scope.iter().filter(|n| self.is_typedef(n)).cloned().collect();
        self.typedefs.push(HashSet::new());
        let saved: Vec<(usize, String)> = self.remove_typedefs(&shadow);
        let b = self.block();
        self.restore_typedefs(saved);
        self.typedefs.pop();
        b
    }

    fn remove_typedefs(&mut self, names: &HashSet<String>) -> Vec<(usize, String)> {
        let mut saved = Vec::new();
        for (i, s) in self.typedefs.iter_mut().enumerate() {
            for n in names {
                if s.remove(n) {
                    saved.push((i, n.clone()));
                }
            }
        }
        saved
    }

    fn restore_typedefs(&mut self, saved: Vec<(usize, String)>) {
        for (i, n) in saved {
            self.typedefs[i].insert(n);
        }
    }

    fn finish_declaration(&mut self, specs: DeclSpecs, first: Declarator, pos: Pos) -> PResult<Declaration> {
        let mut inits = Vec::new();
        let mut d = first;
        loop {
            if specs.storage == Some(Storage::Typedef) {
                if let Some(n) = d.name() {
                    self.typedefs.last_mut().unwrap().insert(n.to_string());
                }
            } else if let Some(n) = d.name() {
                if self.is_typedef(n) {
                    // an ordinary declaration hides an outer typedef
                    if !self.typedefs.last().unwrap().contains(n) {
                        let mut s = HashSet::new();
                        s.insert(n.to_string());
                        self.remove_typedefs(&s);
                    }
                }
            }
            let init = if self.eat("=") { Some(self.initializer()?) } else { None };
            inits.push(InitDeclarator { declarator: d, init });
            if !self.eat(",") {
                break;
            }
            d = self.declarator(false)?;
        }
        self.expect(";")?;
        Ok(Declaration { specs, inits, pos })
    }

    fn initializer(&mut self) -> PResult<Initializer> {
        if self.check("{") {
            let pos = self.pos_here();
            self.pos += 1;
            let mut items = Vec::new();
            while !self.check("}") {
                if self.check(".") || self.check("[") {
                    return self.unsupported("designated initializer");
                }
                items.push(self.initializer()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
            Ok(Initializer::List(items, pos))
        } else {
            Ok(Initializer::Expr(self.assignment()?))
        }
    }

    fn decl_specs(&mut self) -> PResult<DeclSpecs> {
        let pos = self.pos_here();
        let mut storage = None;
        let mut is_const = false;
        let mut is_inline = false;
        let mut words: Vec<&str> = Vec::new();
        let mut base: Option<BaseType> = None;
        loop {
            let Some(t) = self.peek() else { break };
            if t.kind == TokKind::Keyword {
                match &*t.text {
                    "typedef" | "static" | "extern" => {
                        if storage.is_some() {
                            return self.err("multiple storage classes");
                        }
                        storage = Some(match &*t.text {
                            "typedef" => Storage::Typedef,
                            "static" => Storage::Static,
                            _ => Storage::Extern,
                        });
                        self.pos += 1;
                    }
                    "const" => {
                        is_const = true;
                        self.pos += 1;
                    }
                    "volatile" | "register" | "auto" | "restrict" => self.pos += 1,
                    "inline" => {
                        is_inline = true;
                        self.pos += 1;
                    }
                    "void" | "char" | "short" | "int" | "long" | "float" | "double" | "signed" | "unsigned"
                    | "_Bool" => {
                        if base.is_some() {
                            return self.err("conflicting type specifiers");
                        }
                        words.push(&t.text);
                        self.pos += 1;
                    }
                    "struct" | "union" => {
                        if base.is_some() || !words.is_empty() {
                            return self.err("conflicting type specifiers");
                        }
                        base = Some(BaseType::Record(self.record_spec()?));
                    }
                    "enum" => {
                        if base.is_some() || !words.is_empty() {
                            return self.err("conflicting type specifiers");
                        }
                        base = Some(BaseType::Enum(self.enum_spec()?));
                    }
                    _ => break,
                }
            } else if t.kind == TokKind::Ident && base.is_none() && words.is_empty() && self.is_typedef(&t.text) {
                base = Some(BaseType::Named(t.text.to_string()));
                self.pos += 1;
            } else {
                break;
            }
        }
        let base = match base {
            Some(b) => b,
            None if words.is_empty() => return self.err("expected a type"),
            None => match base_from_words(&words) {
                Some(b) => b,
                None => {
                    return Err(Diagnostic::at(Code::Syntax, &pos.0, format!("invalid type '{}'", words.join(" "))))
                }
            },
        };
        Ok(DeclSpecs { storage, is_const, is_inline, base, pos })
    }

    fn record_spec(&mut self) -> PResult<RecordSpec> {
        let pos = self.pos_here();
        let is_union = self.peek().unwrap().is("union");
        self.pos += 1;
        let tag = if self.peek().is_some_and(|t| t.kind == TokKind::Ident) { Some(self.ident()?) } else { None };
        let fields = if self.eat("{") {
            let mut fields = Vec::new();
            while !self.eat("}") {
                let fpos = self.pos_here();
                let specs = self.decl_specs()?;
                if specs.storage.is_some() {
                    return self.err("storage class in member declaration");
                }
                let mut declarators = Vec::new();
                if !self.check(";") {
                    loop {
                        declarators.push(self.declarator(false)?);
                        if self.check(":") {
                            return self.unsupported("bit-field");
                        }
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                self.expect(";")?;
                fields.push(FieldDecl { specs, declarators, pos: fpos });
            }
            Some(fields)
        } else {
            None
        };
        if tag.is_none() && fields.is_none() {
            return self.err("expected struct tag or body");
        }
        Ok(RecordSpec { is_union, tag, fields, pos })
    }

    fn enum_spec(&mut self) -> PResult<EnumSpec> {
        let pos = self.pos_here();
        self.pos += 1;
        let tag = if self.peek().is_some_and(|t| t.kind == TokKind::Ident) { Some(self.ident()?) } else { None };
        let items = if self.eat("{") {
            let mut items = Vec::new();
            while !self.check("}") {
                let ipos = self.pos_here();
                let name = self.ident()?;
                let v = if self.eat("=") { Some(self.conditional()?) } else { None };
                items.push((name, v, ipos));
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
            Some(items)
        } else {
            None
        };
        if tag.is_none() && items.is_none() {
            return self.err("expected enum tag or body");
        }
        Ok(EnumSpec { tag, items, pos })
    }

    /// Parses a declarator; with `abstract_ok` the name may be omitted.
    fn declarator(&mut self, abstract_ok: bool) -> PResult<Declarator> {
        let mut pointers = 0;
        while self.eat("*") {
            pointers += 1;
            while self.eat("const") || self.eat("volatile") || self.eat("restrict") {}
        }
        let mut d = if self.check("(") && self.group_follows(abstract_ok) {
            self.pos += 1;
            let inner = self.declarator(abstract_ok)?;
            self.expect(")")?;
            inner
        } else if self.peek().is_some_and(|t| t.kind == TokKind::Ident) {
            let pos = self.pos_here();
            Declarator::Ident(Some(self.ident()?), pos)
        } else if abstract_ok {
            Declarator::Ident(None, self.pos_here())
        } else {
            return match self.peek() {
                Some(t) => self.err(format!("expected declarator before '{}'", t.text)),
                None => self.err("expected declarator"),
            };
        };
        loop {
            if self.eat("[") {
                let n = if self.check("]") { None } else { Some(Box::new(self.conditional()?)) };
                self.expect("]")?;
                d = Declarator::Array(Box::new(d), n);
            } else if self.check("(") {
                self.pos += 1;
                let params = self.params()?;
                d = Declarator::Function(Box::new(d), params);
            } else {
                break;
            }
        }
        for _ in 0..pointers {
            d = Declarator::Pointer(Box::new(d));
        }
        Ok(d)
    }

    fn group_follows(&self, abstract_ok: bool) -> bool {
        let Some(next) = self.peek_at(1) else { return false };
        if !abstract_ok {
            return true;
        }
        next.is("*") || next.is("(") || next.is("[")
    }

    fn params(&mut self) -> PResult<Vec<ParamDecl>> {
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok(params);
        }
        if self.check("void") && self.peek_at(1).is_some_and(|t| t.is(")")) {
            self.pos += 2;
            return Ok(params);
        }
        loop {
            if self.check("...") {
                return self.unsupported("variadic function");
            }
            let specs = self.decl_specs()?;
            let declarator = self.declarator(true)?;
            params.push(ParamDecl { specs, declarator });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn type_name(&mut self) -> PResult<TypeName> {
        let specs = self.decl_specs()?;
        if specs.storage.is_some() {
            return self.err("storage class in type name");
        }
        let declarator = self.declarator(true)?;
        if declarator.name().is_some() {
            return self.err("unexpected identifier in type name");
        }
        Ok(TypeName { specs, declarator })
    }

    fn block(&mut self) -> PResult<Block> {
        let pos = self.pos_here();
        self.expect("{")?;
        self.typedefs.push(HashSet::new());
        let mut items = Vec::new();
        let r = loop {
            if self.eat("}") {
                break Ok(());
            }
            if self.peek().is_none() {
                break self.err("unterminated block");
            }
            match self.statement() {
                Ok(s) => items.push(s),
                Err(e) => break Err(e),
            }
        };
        self.typedefs.pop();
        r.map(|_| Block { items, pos })
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos_here();
        let Some(t) = self.peek() else { return self.err("expected statement") };
        if self.starts_type(t) {
            let start = pos.clone();
            let specs = self.decl_specs()?;
            if self.eat(";") {
                return Ok(Stmt::Decl(Declaration { specs, inits: vec![], pos: start }));
            }
            let d = self.declarator(false)?;
            return Ok(Stmt::Decl(self.finish_declaration(specs, d, start)?));
        }
        if t.kind == TokKind::Ident && (&*t.text == SAMPLE_INPUT || &*t.text == DRIVE_OUTPUT) {
            let sample = &*t.text == SAMPLE_INPUT;
            self.pos += 1;
            self.expect("(")?;
            let ty = self.type_name()?;
            self.expect(",")?;
            let name = self.ident()?;
            self.expect(")")?;
            self.expect(";")?;
            return Ok(if sample { Stmt::Sample(ty, name, pos) } else { Stmt::Drive(ty, name, pos) });
        }
        if t.kind == TokKind::Ident && self.peek_at(1).is_some_and(|n| n.is(":")) {
            return self.unsupported("labelled statement");
        }
        if t.kind == TokKind::Keyword {
            match &*t.text {
                "if" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let c = self.expression()?;
                    self.expect(")")?;
                    let then = self.statement()?;
                    let els = if self.eat("else") { Some(Box::new(self.statement()?)) } else { None };
                    return Ok(Stmt::If(c, Box::new(then), els, pos));
                }
                "while" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let c = self.expression()?;
                    self.expect(")")?;
                    return Ok(Stmt::While(c, Box::new(self.statement()?), pos));
                }
                "do" => {
                    self.pos += 1;
                    let body = self.statement()?;
                    self.expect("while")?;
                    self.expect("(")?;
                    let c = self.expression()?;
                    self.expect(")")?;
                    self.expect(";")?;
                    return Ok(Stmt::DoWhile(Box::new(body), c, pos));
                }
                "for" => {
                    self.pos += 1;
                    self.expect("(")?;
                    self.typedefs.push(HashSet::new());
                    let r = self.for_rest(pos);
                    self.typedefs.pop();
                    return r;
                }
                "switch" => {
                    self.pos += 1;
                    self.expect("(")?;
                    let c = self.expression()?;
                    self.expect(")")?;
                    return Ok(Stmt::Switch(c, Box::new(self.statement()?), pos));
                }
                "case" => {
                    self.pos += 1;
                    let v = self.conditional()?;
                    self.expect(":")?;
                    return Ok(Stmt::Case(v, Box::new(self.statement()?), pos));
                }
                "default" => {
                    self.pos += 1;
                    self.expect(":")?;
                    return Ok(Stmt::Default(Box::new(self.statement()?), pos));
                }
                "break" => {
                    self.pos += 1;
                    self.expect(";")?;
                    return Ok(Stmt::Break(pos));
                }
                "continue" => {
                    self.pos += 1;
                    self.expect(";")?;
                    return Ok(Stmt::Continue(pos));
                }
                "return" => {
                    self.pos += 1;
                    let e = if self.check(";") { None } else { Some(self.expression()?) };
                    self.expect(";")?;
                    return Ok(Stmt::Return(e, pos));
                }
                "goto" => return self.unsupported("goto"),
                _ => {}
            }
        }
        if self.check("{") {
            return Ok(Stmt::Block(self.block()?));
        }
        if self.eat(";") {
            return Ok(Stmt::Expr(None, pos));
        }
        let e = self.expression()?;
        self.expect(";")?;
        Ok(Stmt::Expr(Some(e), pos))
    }

    fn for_rest(&mut self, pos: Pos) -> PResult<Stmt> {
        let init = if self.check(";") {
            self.pos += 1;
            None
        } else if self.peek().is_some_and(|t| self.starts_type(t)) {
            let start = self.pos_here();
            let specs = self.decl_specs()?;
            let d = self.declarator(false)?;
            Some(Box::new(Stmt::Decl(self.finish_declaration(specs, d, start)?)))
        } else {
            let p = self.pos_here();
            let e = self.expression()?;
            self.expect(";")?;
            Some(Box::new(Stmt::Expr(Some(e), p)))
        };
        let cond = if self.check(";") { None } else { Some(self.expression()?) };
        self.expect(";")?;
        let step = if self.check(")") { None } else { Some(self.expression()?) };
        self.expect(")")?;
        let body = self.statement()?;
        Ok(Stmt::For(init, cond, step, Box::new(body), pos))
    }

    pub fn expression(&mut self) -> PResult<Expr> {
        let mut e = self.assignment()?;
        while self.check(",") {
            self.pos += 1;
            let r = self.assignment()?;
            let pos = e.pos.clone();
            e = Expr { kind: ExprKind::Comma(Box::new(e), Box::new(r)), pos };
        }
        Ok(e)
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let lhs = self.conditional()?;
        let Some(t) = self.peek() else { return Ok(lhs) };
        if t.kind != TokKind::Punct {
            return Ok(lhs);
        }
        let op = match &*t.text {
            "=" => None,
            s if s.len() >= 2 && s.ends_with('=') && !matches!(s, "==" | "!=" | "<=" | ">=") => {
                Some(BinaryOp::from_token(&s[..s.len() - 1]).unwrap())
            }
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.assignment()?;
        let pos = lhs.pos.clone();
        Ok(Expr { kind: ExprKind::Assign(op, Box::new(lhs), Box::new(rhs)), pos })
    }

    fn conditional(&mut self) -> PResult<Expr> {
        let c = self.binary(1)?;
        if !self.eat("?") {
            return Ok(c);
        }
        let a = self.expression()?;
        self.expect(":")?;
        let b = self.conditional()?;
        let pos = c.pos.clone();
        Ok(Expr { kind: ExprKind::Cond(Box::new(c), Box::new(a), Box::new(b)), pos })
    }

    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.cast()?;
        loop {
            let Some(t) = self.peek() else { break };
            if t.kind != TokKind::Punct {
                break;
            }
            let Some(prec) = binary_prec(&t.text) else { break };
            if prec < min {
                break;
            }
            let op = BinaryOp::from_token(&t.text).unwrap();
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            let pos = lhs.pos.clone();
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
        Ok(lhs)
    }

    fn cast(&mut self) -> PResult<Expr> {
        if self.check("(") && self.peek_at(1).is_some_and(|t| self.starts_type(t)) {
            let pos = self.pos_here();
            self.pos += 1;
            let ty = self.type_name()?;
            self.expect(")")?;
            if self.check("{") {
                return self.unsupported("compound literal");
            }
            let e = self.cast()?;
            return Ok(Expr { kind: ExprKind::Cast(Box::new(ty), Box::new(e)), pos });
        }
        self.unary()
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos_here();
        let Some(t) = self.peek() else { return self.err("expected expression") };
        let op = match &*t.text {
            _ if t.kind != TokKind::Punct && !t.is("sizeof") => None,
            "++" => Some(UnaryOp::PreInc),
            "--" => Some(UnaryOp::PreDec),
            "+" => Some(UnaryOp::Plus),
            "-" => Some(UnaryOp::Minus),
            "~" => Some(UnaryOp::BitNot),
            "!" => Some(UnaryOp::Not),
            "*" => Some(UnaryOp::Deref),
            "&" => Some(UnaryOp::AddrOf),
            "sizeof" => {
                self.pos += 1;
                if self.check("(") && self.peek_at(1).is_some_and(|t| self.starts_type(t)) {
                    self.pos += 1;
                    let ty = self.type_name()?;
                    self.expect(")")?;
                    return Ok(Expr { kind: ExprKind::SizeofType(Box::new(ty)), pos });
                }
                let e = self.unary()?;
                return Ok(Expr { kind: ExprKind::SizeofExpr(Box::new(e)), pos });
            }
            _ => None,
        };
        match op {
            Some(op @ (UnaryOp::PreInc | UnaryOp::PreDec)) => {
                self.pos += 1;
                let e = self.unary()?;
                Ok(Expr { kind: ExprKind::Unary(op, Box::new(e)), pos })
            }
            Some(op) => {
                self.pos += 1;
                let e = self.cast()?;
                Ok(Expr { kind: ExprKind::Unary(op, Box::new(e)), pos })
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let pos = e.pos.clone();
            if self.eat("[") {
                let i = self.expression()?;
                self.expect("]")?;
                e = Expr { kind: ExprKind::Index(Box::new(e), Box::new(i)), pos };
            } else if self.eat("(") {
                let mut args = Vec::new();
                if !self.check(")") {
                    loop {
                        args.push(self.assignment()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                self.expect(")")?;
                e = Expr { kind: ExprKind::Call(Box::new(e), args), pos };
            } else if self.eat(".") {
                let f = self.ident()?;
                e = Expr { kind: ExprKind::Member(Box::new(e), f), pos };
            } else if self.eat("->") {
                let f = self.ident()?;
                e = Expr { kind: ExprKind::Arrow(Box::new(e), f), pos };
            } else if self.eat("++") {
                e = Expr { kind: ExprKind::Unary(UnaryOp::PostInc, Box::new(e)), pos };
            } else if self.eat("--") {
                e = Expr { kind: ExprKind::Unary(UnaryOp::PostDec, Box::new(e)), pos };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos_here();
        let Some(t) = self.peek() else { return self.err("expected expression at end of input") };
        let kind = match t.kind {
            TokKind::Ident => ExprKind::Ident(t.text.to_string()),
            TokKind::Int | TokKind::Char => ExprKind::IntLit(t.text.to_string()),
            TokKind::Float => ExprKind::FloatLit(t.text.to_string()),
            TokKind::Str => {
                let mut s = t.text.to_string();
                self.pos += 1;
                while let Some(n) = self.peek().filter(|n| n.kind == TokKind::Str) {
                    s.pop();
                    s.push_str(&n.text[1..]);
                    self.pos += 1;
                }
                return Ok(Expr { kind: ExprKind::StrLit(s), pos });
            }
            _ if t.is("(") => {
                self.pos += 1;
                let e = self.expression()?;
                self.expect(")")?;
                return Ok(e);
            }
            _ => return self.err(format!("expected expression before '{}'", t.text)),
        };
        self.pos += 1;
        Ok(Expr { kind, pos })
    }
}

fn base_from_words(words: &[&str]) -> Option<BaseType> {
    let mut sorted: Vec<&str> = words.to_vec();
    sorted.sort_unstable();
    let key = sorted.join(" ");
    Some(match key.as_str() {
        "void" => BaseType::Void,
        "_Bool" => BaseType::Bool,
        "char" => BaseType::Char,
        "char signed" => BaseType::SChar,
        "char unsigned" => BaseType::UChar,
        "short" | "int short" | "short signed" | "int short signed" => BaseType::Short,
        "short unsigned" | "int short unsigned" => BaseType::UShort,
        "int" | "signed" | "int signed" => BaseType::Int,
        "unsigned" | "int unsigned" => BaseType::UInt,
        "long" | "int long" | "long signed" | "int long signed" => BaseType::Long,
        "long unsigned" | "int long unsigned" => BaseType::ULong,
        "long long" | "int long long" | "long long signed" | "int long long signed" => BaseType::LongLong,
        "long long unsigned" | "int long long unsigned" => BaseType::ULongLong,
        "float" => BaseType::Float,
        "double" | "double long" => BaseType::Double,
        _ => return None,
    })
}

/// Parameter list of the outermost function declarator of `d`.
pub fn function_params(d: &Declarator) -> Option<&[ParamDecl]> {
    match d {
        Declarator::Function(inner, ps) => match &**inner {
            Declarator::Ident(..) => Some(ps),
            other => function_params(other).or(Some(ps)),
        },
        Declarator::Pointer(inner) | Declarator::Array(inner, _) => function_params(inner),
        Declarator::Ident(..) => None,
    }
}
