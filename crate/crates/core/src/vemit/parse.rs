//! Parser for the emitted Verilog subset.

use super::ast::*;
use crate::bvir::{Bits, MAX_WIDTH};
use crate::diag::{Code, Diagnostic, SourceLoc};

const FILE: &str = "<verilog>";

/// Keywords that are valid Verilog but outside the emitted subset.
const OUT_OF_SUBSET: &[&str] = &[
    "always", "always_ff", "always_latch", "initial", "final", "reg", "wire", "integer", "int", "bit", "function",
    "task", "generate", "genvar", "parameter", "localparam", "inout", "begin", "end", "if", "case", "for", "while",
    "assume", "cover", "property", "sequence", "signed", "posedge", "negedge", "typedef", "struct", "interface",
    "package", "import", "specify", "fork",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    System(String),
    Num(u64),
    Sized(u32, String),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn err(code: Code, line: u32, col: u32, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::at(code, &SourceLoc::new(FILE, line, col), msg)
}

const PUNCTS: &[&str] = &[
    "<<<", ">>>", "===", "!==", "<<", ">>", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "[", "]", "{", "}", ";", ",",
    ":", "?", "=", "~", "-", "&", "|", "^", "+", "*", "/", "%", "<", ">", "@", "!", "#", ".",
];

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for k in 0..n {
            if b[*i + k] == b'\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i += n;
    };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if b[i..].starts_with(b"//") {
            let n = b[i..].iter().position(|&x| x == b'\n').unwrap_or(b.len() - i);
            advance(&mut i, &mut line, &mut col, n);
            continue;
        }
        if b[i..].starts_with(b"/*") {
            let Some(n) = text[i + 2..].find("*/") else {
                return Err(err(Code::VSyntax, line, col, "unterminated comment"));
            };
            advance(&mut i, &mut line, &mut col, n + 4);
            continue;
        }
        let (tl, tc) = (line, col);
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            let mut j = i + 1;
            while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_' || b[j] == b'$') {
                j += 1;
            }
            let word = text[i..j].to_string();
            advance(&mut i, &mut line, &mut col, j - start);
            if c == b'$' {
                Tok::System(word)
            } else {
                Tok::Ident(word)
            }
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let n: u64 = text[i..j].parse().map_err(|_| err(Code::VSyntax, tl, tc, "number too large"))?;
            if j < b.len() && b[j] == b'\'' {
                let base = b.get(j + 1).copied().unwrap_or(0);
                if base != b'h' {
                    return Err(err(Code::Subset, tl, tc, "only hexadecimal sized constants are supported"));
                }
                let mut k = j + 2;
                while k < b.len() && b[k].is_ascii_hexdigit() {
                    k += 1;
                }
                if k == j + 2 {
                    return Err(err(Code::VSyntax, tl, tc, "missing hexadecimal digits"));
                }
                let width = u32::try_from(n).map_err(|_| err(Code::VSyntax, tl, tc, "constant width too large"))?;
                let digits = text[j + 2..k].to_string();
                advance(&mut i, &mut line, &mut col, k - start);
                Tok::Sized(width, digits)
            } else {
                advance(&mut i, &mut line, &mut col, j - start);
                Tok::Num(n)
            }
        } else if c == b'\'' {
            return Err(err(Code::Subset, tl, tc, "unsized constants are outside the subset"));
        } else if c == b'"' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match b.get(j) {
                    None | Some(b'\n') => return Err(err(Code::VSyntax, tl, tc, "unterminated string")),
                    Some(b'"') => break,
                    Some(b'\\') => {
                        match b.get(j + 1) {
                            Some(b'n') => s.push('\n'),
                            Some(b'"') => s.push('"'),
                            Some(b'\\') => s.push('\\'),
                            _ => return Err(err(Code::VSyntax, tl, tc, "unsupported string escape")),
                        }
                        j += 2;
                    }
                    Some(_) => {
                        let ch = text[j..].chars().next().unwrap_or('?');
                        s.push(ch);
                        j += ch.len_utf8();
                    }
                }
            }
            advance(&mut i, &mut line, &mut col, j + 1 - start);
            Tok::Str(s)
        } else {
            let Some(&p) = PUNCTS.iter().find(|p| b[i..].starts_with(p.as_bytes())) else {
                return Err(err(Code::VSyntax, tl, tc, format!("unexpected character '{}'", text[i..].chars().next().unwrap_or('?'))));
            };
            advance(&mut i, &mut line, &mut col, p.len());
            Tok::Punct(p)
        };
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type R<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn here(&self, code: Code, msg: impl Into<String>) -> Diagnostic {
        let t = self.peek();
        err(code, t.line, t.col, msg)
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(q) if q == w)
    }

    fn punct(&mut self, p: &str) -> R<()> {
        if self.is_punct(p) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{p}'")))
        }
    }

    fn word(&mut self, w: &str) -> R<()> {
        if self.is_word(w) {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{w}'")))
        }
    }

    fn unexpected(&self, want: &str) -> Diagnostic {
        let t = self.peek();
        if let Tok::Ident(w) = &t.tok {
            if OUT_OF_SUBSET.contains(&w.as_str()) {
                return err(Code::Subset, t.line, t.col, format!("'{w}' is outside the supported Verilog subset"));
            }
        }
        let found = match &t.tok {
            Tok::Ident(w) | Tok::System(w) => format!("'{w}'"),
            Tok::Num(n) => n.to_string(),
            Tok::Sized(w, h) => format!("{w}'h{h}"),
            Tok::Str(_) => "string".into(),
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Eof => "end of input".into(),
        };
        err(Code::VSyntax, t.line, t.col, format!("expected {want}, found {found}"))
    }

    fn ident(&mut self) -> R<String> {
        match &self.peek().tok {
            Tok::Ident(w) if !super::emit::is_reserved(w) => {
                let w = w.clone();
                self.next();
                Ok(w)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn number(&mut self) -> R<u32> {
        match self.peek().tok {
            Tok::Num(n) if n <= u32::MAX as u64 => {
                self.next();
                Ok(n as u32)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    /// `[N:0]` as a width.
    fn range(&mut self) -> R<u32> {
        let t = self.peek().clone();
        self.punct("[")?;
        let hi = self.number()?;
        self.punct(":")?;
        let lo = self.number()?;
        self.punct("]")?;
        if lo != 0 {
            return Err(err(Code::Subset, t.line, t.col, "declared ranges must end at 0"));
        }
        if hi >= MAX_WIDTH {
            return Err(err(Code::Subset, t.line, t.col, format!("width {} exceeds {MAX_WIDTH}", hi as u64 + 1)));
        }
        Ok(hi + 1)
    }

    fn module(&mut self) -> R<VModule> {
        self.word("module")?;
        let mut m = VModule { name: self.ident()?, ..VModule::default() };
        self.punct("(")?;
        if !self.is_punct(")") {
            loop {
                let dir = if self.is_word("input") {
                    Dir::Input
                } else if self.is_word("output") {
                    Dir::Output
                } else {
                    return Err(self.unexpected("'input' or 'output'"));
                };
                self.next();
                self.word("logic")?;
                self.word("unsigned")?;
                let width = self.range()?;
                let name = self.ident()?;
                m.ports.push(VPort { dir, name, width });
                if self.is_punct(",") {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.punct(")")?;
        self.punct(";")?;
        loop {
            if self.is_word("endmodule") {
                self.next();
                break;
            }
            if self.is_word("logic") {
                self.next();
                let width = if self.is_word("unsigned") {
                    self.next();
                    self.range()?
                } else {
                    1
                };
                let name = self.ident()?;
                self.punct(";")?;
                m.wires.push(VWire { name, width });
            } else if self.is_word("assign") {
                self.next();
                let lhs = self.ident()?;
                if self.is_punct("[") {
                    return Err(self.here(Code::Subset, "assignments to part-selects are outside the subset"));
                }
                self.punct("=")?;
                let rhs = self.expr()?;
                self.punct(";")?;
                m.assigns.push(VAssign { lhs, rhs });
            } else if self.is_word("always_comb") {
                self.next();
                if !self.is_word("assert") {
                    return Err(self.here(Code::Subset, "only immediate assertions may appear in always_comb"));
                }
                self.next();
                self.punct("(")?;
                let expr = self.expr()?;
                self.punct(")")?;
                self.word("else")?;
                match &self.peek().tok {
                    Tok::System(s) if s == "$error" => {
                        self.next();
                    }
                    _ => return Err(self.unexpected("'$error'")),
                }
                self.punct("(")?;
                let text = match &self.peek().tok {
                    Tok::Str(s) => s.clone(),
                    _ => return Err(self.unexpected("string")),
                };
                self.next();
                self.punct(")")?;
                self.punct(";")?;
                let (label, message) = split_label(&text);
                m.asserts.push(VAssert { expr, label, message });
            } else if self.is_word("module") {
                return Err(self.here(Code::Subset, "only one module per file is supported"));
            } else {
                return Err(self.unexpected("module item"));
            }
        }
        if !matches!(self.peek().tok, Tok::Eof) {
            return Err(self.here(Code::Subset, "only one module per file is supported"));
        }
        Ok(m)
    }

    fn expr(&mut self) -> R<VExpr> {
        let c = self.binary(0)?;
        if self.is_punct("?") {
            self.next();
            let a = self.expr()?;
            self.punct(":")?;
            let b = self.expr()?;
            return Ok(VExpr::Ternary(Box::new(c), Box::new(a), Box::new(b)));
        }
        Ok(c)
    }

    fn bin_op(&self) -> Option<VBinOp> {
        let Tok::Punct(p) = self.peek().tok else { return None };
        Some(match p {
            "&" => VBinOp::And,
            "|" => VBinOp::Or,
            "^" => VBinOp::Xor,
            "+" => VBinOp::Add,
            "-" => VBinOp::Sub,
            "*" => VBinOp::Mul,
            "/" => VBinOp::Div,
            "%" => VBinOp::Mod,
            "<<" => VBinOp::Shl,
            ">>" => VBinOp::Shr,
            "==" => VBinOp::Eq,
            "!=" => VBinOp::Ne,
            "<" => VBinOp::Lt,
            "<=" => VBinOp::Le,
            ">" => VBinOp::Gt,
            ">=" => VBinOp::Ge,
            _ => return None,
        })
    }

    fn binary(&mut self, min: u8) -> R<VExpr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.bin_op() {
            if op.precedence() <= min {
                break;
            }
            self.next();
            let rhs = self.binary(op.precedence())?;
            lhs = VExpr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        if let Tok::Punct(p @ ("&&" | "||" | "===" | "!==" | "<<<" | ">>>")) = self.peek().tok {
            return Err(self.here(Code::Subset, format!("operator '{p}' is outside the subset")));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> R<VExpr> {
        if self.is_punct("~") || self.is_punct("-") {
            let op = if self.is_punct("~") { VUnOp::Not } else { VUnOp::Neg };
            self.next();
            let a = self.unary()?;
            return Ok(VExpr::Unary(op, Box::new(a)));
        }
        if self.is_punct("!") {
            return Err(self.here(Code::Subset, "operator '!' is outside the subset"));
        }
        let e = self.primary()?;
        if self.is_punct("[") {
            return Err(self.here(Code::VSyntax, "part-select is only allowed on an identifier"));
        }
        Ok(e)
    }

    fn primary(&mut self) -> R<VExpr> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(_) => {
                let id = self.ident()?;
                if self.is_punct("[") {
                    self.next();
                    let hi = self.number()?;
                    self.punct(":")?;
                    let lo = self.number()?;
                    self.punct("]")?;
                    return Ok(VExpr::Select(id, hi, lo));
                }
                Ok(VExpr::Id(id))
            }
            Tok::Sized(w, ref digits) => {
                self.next();
                if w == 0 || w > MAX_WIDTH {
                    return Err(err(Code::VSyntax, t.line, t.col, format!("constant width {w} is out of range")));
                }
                let b = Bits::from_hex(w, digits)
                    .ok_or_else(|| err(Code::VSyntax, t.line, t.col, format!("constant {w}'h{digits} does not fit")))?;
                Ok(VExpr::Const(b))
            }
            Tok::Num(_) => Err(err(Code::Subset, t.line, t.col, "unsized constants are outside the subset")),
            Tok::System(ref s) if s == "$signed" => {
                self.next();
                self.punct("(")?;
                let id = match self.peek().tok {
                    Tok::Ident(_) => self.ident()?,
                    _ => return Err(self.here(Code::VSyntax, "$signed takes an identifier")),
                };
                self.punct(")")?;
                Ok(VExpr::Signed(id))
            }
            Tok::System(ref s) => Err(err(Code::Subset, t.line, t.col, format!("system function '{s}' is outside the subset"))),
            Tok::Punct("(") => {
                self.next();
                let e = self.expr()?;
                self.punct(")")?;
                Ok(e)
            }
            Tok::Punct("{") => {
                self.next();
                let mut parts = vec![self.expr()?];
                while self.is_punct(",") {
                    self.next();
                    parts.push(self.expr()?);
                }
                if self.is_punct("{") {
                    return Err(self.here(Code::Subset, "replication is outside the subset"));
                }
                self.punct("}")?;
                Ok(VExpr::Concat(parts))
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

fn split_label(text: &str) -> (Option<String>, String) {
    let prefix = format!("{}check_", super::emit::ESCAPE_PREFIX);
    if text.starts_with(&prefix) {
        if let Some((label, rest)) = text.split_once(": ") {
            if label.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_') {
                return (Some(label.to_string()), rest.to_string());
            }
        }
    }
    (None, text.to_string())
}

/// Parses text in the emitted subset back into a module.
pub fn parse_subset(text: &str) -> Result<VModule, Diagnostic> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.module()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(text: &str) -> Code {
        parse_subset(text).unwrap_err().code
    }

    #[test]
    fn part_select_of_expression_is_a_syntax_error() {
        let t = "module m (input logic unsigned [7:0] a, input logic unsigned [7:0] b);\n  logic unsigned [3:0] x;\n  assign x = (a + b)[3:0];\nendmodule\n";
        let e = parse_subset(t).unwrap_err();
        assert_eq!(e.code, Code::VSyntax);
        assert_eq!(e.loc.as_ref().map(|l| (l.line, l.col)), Some((3, 21)));
    }

    #[test]
    fn sequential_constructs_are_rejected() {
        assert_eq!(code("module m (input logic unsigned [0:0] clk);\n  always_ff @(posedge clk) begin end\nendmodule\n"), Code::Subset);
        assert_eq!(code("module m ();\n  initial begin end\nendmodule\n"), Code::Subset);
        assert_eq!(code("module m ();\n  reg x;\nendmodule\n"), Code::Subset);
    }

    #[test]
    fn minimal_module() {
        let t = "module m (\n  input logic unsigned [0:0] a,\n  output logic unsigned [0:0] b\n);\n  assign b = a;\nendmodule\n";
        let m = parse_subset(t).unwrap();
        assert_eq!(m.ports.len(), 2);
        assert_eq!(render_text(&m), t);
    }
}
