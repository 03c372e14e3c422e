//! Preprocessor: object- and function-like macros, `#include`, and the
//! `#if`/`#ifdef` family.

use std::collections::{HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::lexer::{lex, TokKind, Token};
use super::prelude;
use crate::diag::{Code, Diagnostic, SourceLoc};

pub const SAMPLE_INPUT: &str = "C2V_SAMPLE_INPUT";
pub const DRIVE_OUTPUT: &str = "C2V_DRIVE_OUTPUT";
const MAX_EXPANSION_DEPTH: u32 = 64;
const MAX_INCLUDE_DEPTH: usize = 64;

#[derive(Clone, Debug)]
struct Macro {
    params: Option<Vec<Arc<str>>>,
    body: Vec<Token>,
}

pub struct Preprocessor {
    include_dirs: Vec<PathBuf>,
    macros: HashMap<Arc<str>, Macro>,
    include_stack: Vec<PathBuf>,
}

struct Cond {
    active: bool,
    taken: bool,
    seen_else: bool,
    parent_active: bool,
}

fn pp_err(loc: &SourceLoc, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::at(Code::PpSyntax, loc, msg)
}

impl Preprocessor {
    pub fn new(include_dirs: &[PathBuf], defines: &[(String, String)]) -> Result<Self, Diagnostic> {
        let mut pp = Preprocessor { include_dirs: include_dirs.to_vec(), macros: HashMap::new(), include_stack: Vec::new() };
        let file: Arc<str> = Arc::from("<command-line>");
        for (name, value) in defines {
            if name == SAMPLE_INPUT || name == DRIVE_OUTPUT {
                return Err(pp_err(&SourceLoc::new(file.clone(), 1, 1), format!("'{name}' is reserved")));
            }
            let body = lex(&file, value)?;
            pp.macros.insert(name.as_str().into(), Macro { params: None, body });
        }
        Ok(pp)
    }

    /// Preprocesses a file on disk.
    pub fn run_file(&mut self, path: &Path) -> Result<Vec<Token>, Diagnostic> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Diagnostic::bare(Code::Io, format!("{}: {e}", path.display())))?;
        let name: Arc<str> = Arc::from(path.display().to_string());
        self.include_stack.push(path.to_path_buf());
        let r = self.run_source(&name, &src);
        self.include_stack.pop();
        r
    }

    /// Preprocesses in-memory text attributed to `file`.
    pub fn run_source(&mut self, file: &Arc<str>, src: &str) -> Result<Vec<Token>, Diagnostic> {
        let toks = lex(file, src)?;
        let mut out = Vec::new();
        let mut conds: Vec<Cond> = Vec::new();
        let mut pending: Vec<Token> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let t = &toks[i];
            if t.bol && t.is("#") {
                let mut j = i + 1;
                while j < toks.len() && !toks[j].bol {
                    j += 1;
                }
                let line = &toks[i + 1..j];
                let active = conds.last().is_none_or(|c| c.active);
                if active {
                    let expanded = self.expand(std::mem::take(&mut pending))?;
                    out.extend(expanded);
                }
                self.directive(t, line, &mut conds, &mut out)?;
                i = j;
                continue;
            }
            if conds.last().is_none_or(|c| c.active) {
                pending.push(t.clone());
            }
            i += 1;
        }
        if let Some(_c) = conds.last() {
            let loc = toks.last().map(|t| t.loc.clone()).unwrap_or_else(|| SourceLoc::new(file.clone(), 1, 1));
            return Err(pp_err(&loc, "unterminated conditional directive"));
        }
        out.extend(self.expand(pending)?);
        Ok(out)
    }

    fn directive(
        &mut self,
        hash: &Token,
        line: &[Token],
        conds: &mut Vec<Cond>,
        out: &mut Vec<Token>,
    ) -> Result<(), Diagnostic> {
        let Some(name) = line.first() else { return Ok(()) };
        let active = conds.last().is_none_or(|c| c.active);
        let rest = &line[1..];
        match &*name.text {
            "ifdef" | "ifndef" => {
                let taken = if active {
                    let id = rest.first().filter(|t| t.kind == TokKind::Ident || t.kind == TokKind::Keyword);
                    let id = id.ok_or_else(|| pp_err(&name.loc, format!("#{} expects a name", name.text)))?;
                    self.macros.contains_key(&id.text) == (&*name.text == "ifdef")
                } else {
                    false
                };
                conds.push(Cond { active: active && taken, taken, seen_else: false, parent_active: active });
            }
            "if" => {
                let taken = active && self.eval_condition(&name.loc, rest)?;
                conds.push(Cond { active: taken, taken, seen_else: false, parent_active: active });
            }
            "elif" => {
                let c = conds.last().ok_or_else(|| pp_err(&name.loc, "#elif without #if"))?;
                if c.seen_else {
                    return Err(pp_err(&name.loc, "#elif after #else"));
                }
                let (parent, taken) = (c.parent_active, c.taken);
                let now = parent && !taken && self.eval_condition(&name.loc, rest)?;
                let c = conds.last_mut().unwrap();
                c.active = now;
                c.taken |= now;
            }
            "else" => {
                let c = conds.last_mut().ok_or_else(|| pp_err(&name.loc, "#else without #if"))?;
                if c.seen_else {
                    return Err(pp_err(&name.loc, "duplicate #else"));
                }
                c.seen_else = true;
                c.active = c.parent_active && !c.taken;
                c.taken = true;
            }
            "endif" => {
                conds.pop().ok_or_else(|| pp_err(&name.loc, "#endif without #if"))?;
            }
            _ if !active => {}
            "define" => self.define(&name.loc, rest)?,
            "undef" => {
                let id = rest.first().ok_or_else(|| pp_err(&name.loc, "#undef expects a name"))?;
                self.macros.remove(&id.text);
            }
            "include" => out.extend(self.include(hash, rest)?),
            "error" => return Err(pp_err(&hash.loc, "#error directive")),
            other => return Err(pp_err(&name.loc, format!("unsupported directive #{other}"))),
        }
        Ok(())
    }

    fn define(&mut self, loc: &SourceLoc, rest: &[Token]) -> Result<(), Diagnostic> {
        let id = rest.first().ok_or_else(|| pp_err(loc, "#define expects a name"))?;
        if id.kind != TokKind::Ident && id.kind != TokKind::Keyword {
            return Err(pp_err(&id.loc, "macro name must be an identifier"));
        }
        if &*id.text == SAMPLE_INPUT || &*id.text == DRIVE_OUTPUT {
            return Err(pp_err(&id.loc, format!("'{}' is reserved", id.text)));
        }
        let mut k = 1;
        let params = if rest.get(1).is_some_and(|t| t.is("(") && !t.space) {
            k = 2;
            let mut ps = Vec::new();
            loop {
                let t = rest.get(k).ok_or_else(|| pp_err(&id.loc, "unterminated macro parameter list"))?;
                k += 1;
                if t.is(")") && ps.is_empty() {
                    break;
                }
                if t.is("...") {
                    return Err(Diagnostic::at(Code::UnsupportedConstruct, &t.loc, "variadic macros are not supported"));
                }
                if t.kind != TokKind::Ident {
                    return Err(pp_err(&t.loc, "expected macro parameter name"));
                }
                ps.push(t.text.clone());
                let sep = rest.get(k).ok_or_else(|| pp_err(&id.loc, "unterminated macro parameter list"))?;
                k += 1;
                if sep.is(")") {
                    break;
                }
                if !sep.is(",") {
                    return Err(pp_err(&sep.loc, "expected ',' or ')' in macro parameters"));
                }
            }
            Some(ps)
        } else {
            None
        };
        let body = rest[k..].to_vec();
        if let Some(t) = body.iter().find(|t| t.is("#") || t.is("##")) {
            return Err(pp_err(&t.loc, "stringizing and token pasting are not supported"));
        }
        self.macros.insert(id.text.clone(), Macro { params, body });
        Ok(())
    }

    fn include(&mut self, hash: &Token, rest: &[Token]) -> Result<Vec<Token>, Diagnostic> {
        let first = rest.first().ok_or_else(|| pp_err(&hash.loc, "#include expects a file name"))?;
        let (name, system) = if first.kind == TokKind::Str {
            (first.text[1..first.text.len() - 1].to_string(), false)
        } else if first.is("<") {
            let mut s = String::new();
            let mut k = 1;
            while k < rest.len() && !rest[k].is(">") {
                s.push_str(&rest[k].text);
                k += 1;
            }
            if k == rest.len() {
                return Err(pp_err(&first.loc, "unterminated <header> name"));
            }
            (s, true)
        } else {
            return Err(pp_err(&first.loc, "malformed #include"));
        };
        let mut candidates = Vec::new();
        if !system {
            if let Some(cur) = self.include_stack.last() {
                candidates.push(cur.parent().unwrap_or(Path::new(".")).join(&name));
            }
        }
        candidates.extend(self.include_dirs.iter().map(|d| d.join(&name)));
        if let Some(path) = candidates.into_iter().find(|p| p.is_file()) {
            if self.include_stack.len() >= MAX_INCLUDE_DEPTH {
                return Err(pp_err(&hash.loc, "#include nested too deeply"));
            }
            return self.run_file(&path);
        }
        if let Some(text) = prelude::virtual_header(&name) {
            let file: Arc<str> = Arc::from(format!("<{name}>"));
            return self.run_source(&file, text);
        }
        Err(Diagnostic::at(
            Code::IncludeNotFound,
            &hash.loc,
            format!("cannot find include file '{name}' (included at line {})", hash.loc.line),
        ))
    }

    fn eval_condition(&mut self, loc: &SourceLoc, line: &[Token]) -> Result<bool, Diagnostic> {
        let mut toks = Vec::new();
        let mut k = 0;
        while k < line.len() {
            let t = &line[k];
            if t.kind == TokKind::Ident && &*t.text == "defined" {
                let (id, step) = if line.get(k + 1).is_some_and(|t| t.is("(")) {
                    if !line.get(k + 3).is_some_and(|t| t.is(")")) {
                        return Err(pp_err(&t.loc, "malformed defined()"));
                    }
                    (line.get(k + 2), 4)
                } else {
                    (line.get(k + 1), 2)
                };
                let id = id.ok_or_else(|| pp_err(&t.loc, "defined expects a name"))?;
                let v = self.macros.contains_key(&id.text) as u8;
                toks.push(Token { kind: TokKind::Int, text: v.to_string().into(), ..t.clone() });
                k += step;
                continue;
            }
            toks.push(t.clone());
            k += 1;
        }
        let toks = self.expand(toks)?;
        let mut p = CondParser { toks: &toks, pos: 0, loc };
        let v = p.expr(0)?;
        if p.pos != toks.len() {
            return Err(pp_err(&toks[p.pos].loc, "unexpected token in #if expression"));
        }
        Ok(v != 0)
    }

    /// Expands macros in `toks`, rescanning expansions together with the
    /// tokens that follow them.
    pub fn expand(&self, toks: Vec<Token>) -> Result<Vec<Token>, Diagnostic> {
        let mut input: VecDeque<(Token, u32)> = toks.into_iter().map(|t| (t, 0)).collect();
        let mut out = Vec::new();
        while let Some((t, depth)) = input.pop_front() {
            let m = if t.kind == TokKind::Ident || t.kind == TokKind::Keyword { self.macros.get(&t.text) } else { None };
            let Some(m) = m else {
                out.push(t);
                continue;
            };
            let mut expansion: Vec<Token> = match &m.params {
                None => m.body.clone(),
                Some(params) => {
                    if !input.front().is_some_and(|(n, _)| n.is("(")) {
                        out.push(t);
                        continue;
                    }
                    input.pop_front();
                    let args = collect_args(&t, &mut input)?;
                    let args = if params.is_empty() && args.len() == 1 && args[0].is_empty() { vec![] } else { args };
                    if args.len() != params.len() {
                        return Err(pp_err(
                            &t.loc,
                            format!("macro '{}' expects {} arguments, got {}", t.text, params.len(), args.len()),
                        ));
                    }
                    let mut body = Vec::new();
                    for bt in &m.body {
                        match params.iter().position(|p| *p == bt.text && bt.kind == TokKind::Ident) {
                            Some(ix) => body.extend(args[ix].iter().cloned()),
                            None => body.push(bt.clone()),
                        }
                    }
                    body
                }
            };
            if depth + 1 > MAX_EXPANSION_DEPTH {
                return Err(Diagnostic::at(
                    Code::MacroRecursion,
                    &t.loc,
                    format!("expansion of '{}' exceeds depth {MAX_EXPANSION_DEPTH}", t.text),
                ));
            }
            for (k, e) in expansion.iter_mut().enumerate() {
                e.loc = t.loc.clone();
                e.bol = false;
                e.space = if k == 0 { t.space } else { e.space };
            }
            for e in expansion.into_iter().rev() {
                input.push_front((e, depth + 1));
            }
        }
        Ok(out)
    }
}

fn collect_args(name: &Token, input: &mut VecDeque<(Token, u32)>) -> Result<Vec<Vec<Token>>, Diagnostic> {
    let mut args = vec![Vec::new()];
    let mut depth = 0;
    loop {
        let (t, _) = input
            .pop_front()
            .ok_or_else(|| pp_err(&name.loc, format!("unterminated invocation of macro '{}'", name.text)))?;
        if t.is("(") {
            depth += 1;
        } else if t.is(")") {
            if depth == 0 {
                return Ok(args);
            }
            depth -= 1;
        } else if t.is(",") && depth == 0 {
            args.push(Vec::new());
            continue;
        }
        args.last_mut().unwrap().push(t);
    }
}

struct CondParser<'a> {
    toks: &'a [Token],
    pos: usize,
    loc: &'a SourceLoc,
}

impl CondParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn err(&self, msg: &str) -> Diagnostic {
        let loc = self.peek().map(|t| &t.loc).unwrap_or(self.loc);
        pp_err(loc, msg)
    }

    fn primary(&mut self) -> Result<i64, Diagnostic> {
        let t = self.peek().cloned().ok_or_else(|| self.err("unexpected end of #if expression"))?;
        self.pos += 1;
        match t.kind {
            TokKind::Int => parse_int_literal(&t.text).map(|(v, _, _)| v as i64).ok_or_else(|| pp_err(&t.loc, "bad integer")),
            TokKind::Ident | TokKind::Keyword => Ok(0),
            _ if t.is("(") => {
                let v = self.expr(0)?;
                if !self.peek().is_some_and(|t| t.is(")")) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ if t.is("!") => Ok((self.primary()? == 0) as i64),
            _ if t.is("-") => Ok(self.primary()?.wrapping_neg()),
            _ if t.is("~") => Ok(!self.primary()?),
            _ if t.is("+") => self.primary(),
            _ => Err(pp_err(&t.loc, "unexpected token in #if expression")),
        }
    }

    fn expr(&mut self, min: u8) -> Result<i64, Diagnostic> {
        let mut lhs = self.primary()?;
        loop {
            let Some(t) = self.peek() else { break };
            if t.is("?") && min == 0 {
                self.pos += 1;
                let a = self.expr(0)?;
                if !self.peek().is_some_and(|t| t.is(":")) {
                    return Err(self.err("expected ':'"));
                }
                self.pos += 1;
                let b = self.expr(0)?;
                lhs = if lhs != 0 { a } else { b };
                continue;
            }
            let Some(prec) = binary_prec(&t.text).filter(|_| t.kind == TokKind::Punct) else { break };
            if prec < min.max(1) {
                break;
            }
            let op = t.text.clone();
            self.pos += 1;
            let rhs = self.expr(prec + 1)?;
            lhs = match &*op {
                "*" => lhs.wrapping_mul(rhs),
                "/" | "%" if rhs == 0 => return Err(self.err("division by zero in #if")),
                "/" => lhs.wrapping_div(rhs),
                "%" => lhs.wrapping_rem(rhs),
                "+" => lhs.wrapping_add(rhs),
                "-" => lhs.wrapping_sub(rhs),
                "<<" => lhs.wrapping_shl(rhs as u32),
                ">>" => lhs.wrapping_shr(rhs as u32),
                "<" => (lhs < rhs) as i64,
                ">" => (lhs > rhs) as i64,
                "<=" => (lhs <= rhs) as i64,
                ">=" => (lhs >= rhs) as i64,
                "==" => (lhs == rhs) as i64,
                "!=" => (lhs != rhs) as i64,
                "&" => lhs & rhs,
                "^" => lhs ^ rhs,
                "|" => lhs | rhs,
                "&&" => (lhs != 0 && rhs != 0) as i64,
                "||" => (lhs != 0 || rhs != 0) as i64,
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }
}

/// Binary operator precedence, higher binds tighter.
pub fn binary_prec(op: &str) -> Option<u8> {
    Some(match op {
        "*" | "/" | "%" => 10,
        "+" | "-" => 9,
        "<<" | ">>" => 8,
        "<" | ">" | "<=" | ">=" => 7,
        "==" | "!=" => 6,
        "&" => 5,
        "^" => 4,
        "|" => 3,
        "&&" => 2,
        "||" => 1,
        _ => return None,
    })
}

/// Value, unsigned-suffix flag and long-suffix count of an integer literal.
pub fn parse_int_literal(text: &str) -> Option<(u64, bool, u8)> {
    let lower = text.to_ascii_lowercase();
    let digits = lower.trim_end_matches(['u', 'l']);
    let suffix = &lower[digits.len()..];
    let unsigned = suffix.contains('u');
    let longs = suffix.matches('l').count() as u8;
    if suffix.len() != unsigned as usize + longs as usize || longs > 2 {
        return None;
    }
    let v = if let Some(h) = digits.strip_prefix("0x") {
        u64::from_str_radix(h, 16).ok()?
    } else if digits.len() > 1 && digits.starts_with('0') {
        u64::from_str_radix(&digits[1..], 8).ok()?
    } else {
        digits.parse().ok()?
    };
    Some((v, unsigned, longs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(src: &str) -> Result<String, Diagnostic> {
        let mut p = Preprocessor::new(&[], &[])?;
        let toks = p.run_source(&Arc::from("t.c"), src)?;
        Ok(toks.iter().map(|t| t.text.to_string()).collect::<Vec<_>>().join(" "))
    }

    #[test]
    fn object_macro_substitutes() {
        assert_eq!(pp("#define W 32\nint a[W];").unwrap(), "int a [ 32 ] ;");
    }

    #[test]
    fn function_macro_with_nesting() {
        assert_eq!(pp("#define MAX(a,b) ((a)>(b)?(a):(b))\nMAX(1,MAX(2,3))").unwrap().replace(' ', ""), "((1)>(((2)>(3)?(2):(3)))?(1):(((2)>(3)?(2):(3))))");
    }

    #[test]
    fn interface_macros_survive() {
        assert_eq!(pp("C2V_SAMPLE_INPUT(uint32_t, x);").unwrap(), "C2V_SAMPLE_INPUT ( uint32_t , x ) ;");
        assert_eq!(pp("#define C2V_SAMPLE_INPUT(a,b) a").unwrap_err().code, Code::PpSyntax);
    }

    #[test]
    fn conditionals() {
        let src = "#define A\n#ifdef A\none\n#else\ntwo\n#endif\n#ifndef A\nthree\n#elif 1\nfour\n#endif\n#if defined(B) || 2 > 1\nfive\n#endif";
        assert_eq!(pp(src).unwrap(), "one four five");
    }

    #[test]
    fn recursion_is_reported() {
        assert_eq!(pp("#define f(x) f(x)\nf(1)").unwrap_err().code, Code::MacroRecursion);
        assert_eq!(pp("#define a b\n#define b a\na").unwrap_err().code, Code::MacroRecursion);
    }

    #[test]
    fn missing_include() {
        let e = pp("int x;\n#include \"missing.h\"\n").unwrap_err();
        assert_eq!(e.code, Code::IncludeNotFound);
        assert!(e.message.contains("missing.h") && e.message.contains("line 2"));
    }

    #[test]
    fn expansion_keeps_invocation_location() {
        let mut p = Preprocessor::new(&[], &[]).unwrap();
        let toks = p.run_source(&Arc::from("t.c"), "#define K (1+2)\n\n  K;").unwrap();
        assert!(toks.iter().take(5).all(|t| t.loc.line == 3 && t.loc.col == 3));
    }

    #[test]
    fn int_literals() {
        assert_eq!(parse_int_literal("0x10u"), Some((16, true, 0)));
        assert_eq!(parse_int_literal("017"), Some((15, false, 0)));
        assert_eq!(parse_int_literal("5ULL"), Some((5, true, 2)));
        assert_eq!(parse_int_literal("5lu"), Some((5, true, 1)));
    }
}
