//! Tokeniser for C-lite source text.

use std::sync::Arc;

use crate::diag::{Code, Diagnostic, SourceLoc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokKind {
    Keyword,
    Ident,
    Int,
    Float,
    Char,
    Str,
    Punct,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokKind,
    pub text: Arc<str>,
    pub loc: SourceLoc,
    /// First token on its physical line.
    pub bol: bool,
    /// Whitespace directly precedes the token.
    pub space: bool,
}

impl Token {
    pub fn is(&self, s: &str) -> bool {
        matches!(self.kind, TokKind::Punct | TokKind::Keyword) && &*self.text == s
    }
}

pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern",
    "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed",
    "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "_Bool",
];

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", "##", "[", "]", "(", ")", "{", "}", ".", "&", "*", "+", "-", "~", "!", "/", "%", "<",
    ">", "^", "|", "?", ":", ";", "=", ",", "#",
];

pub fn lex(file: &Arc<str>, src: &str) -> Result<Vec<Token>, Diagnostic> {
    let b = src.as_bytes();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut bol = true;
    let mut space = false;
    let loc = |line, col| SourceLoc { file: file.clone(), line, col };
    while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            bol = true;
            space = false;
            continue;
        }
        if c == b'\\' && b.get(i + 1) == Some(&b'\n') {
            i += 2;
            line += 1;
            col = 1;
            space = true;
            continue;
        }
        if c == b'\\' && b.get(i + 1) == Some(&b'\r') && b.get(i + 2) == Some(&b'\n') {
            i += 3;
            line += 1;
            col = 1;
            space = true;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            space = true;
            continue;
        }
        if c == b'/' && b.get(i + 1) == Some(&b'/') {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            space = true;
            continue;
        }
        if c == b'/' && b.get(i + 1) == Some(&b'*') {
            let start = loc(line, col);
            i += 2;
            col += 2;
            loop {
                if i >= b.len() {
                    return Err(Diagnostic::at(Code::Syntax, &start, "unterminated comment"));
                }
                if b[i] == b'*' && b.get(i + 1) == Some(&b'/') {
                    i += 2;
                    col += 2;
                    break;
                }
                if b[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
            space = true;
            continue;
        }
        let start = i;
        let here = loc(line, col);
        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            if KEYWORDS.contains(&&src[start..i]) {
                TokKind::Keyword
            } else {
                TokKind::Ident
            }
        } else if c.is_ascii_digit() || (c == b'.' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut float = false;
            if c == b'0' && matches!(b.get(i + 1), Some(b'x' | b'X')) {
                i += 2;
                while i < b.len() && b[i].is_ascii_hexdigit() {
                    i += 1;
                }
            } else {
                while i < b.len() {
                    let d = b[i];
                    if d.is_ascii_digit() {
                        i += 1;
                    } else if d == b'.' {
                        float = true;
                        i += 1;
                    } else if (d == b'e' || d == b'E')
                        && (b.get(i + 1).is_some_and(|x| x.is_ascii_digit())
                            || (matches!(b.get(i + 1), Some(b'+' | b'-'))
                                && b.get(i + 2).is_some_and(|x| x.is_ascii_digit())))
                    {
                        float = true;
                        i += 2;
                    } else {
                        break;
                    }
                }
            }
            while i < b.len() && matches!(b[i], b'u' | b'U' | b'l' | b'L' | b'f' | b'F') {
                if matches!(b[i], b'f' | b'F') {
                    float = true;
                }
                i += 1;
            }
            if i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                return Err(Diagnostic::at(Code::Syntax, &here, "malformed numeric constant"));
            }
            if float {
                TokKind::Float
            } else {
                TokKind::Int
            }
        } else if c == b'\'' || c == b'"' {
            i += 1;
            while i < b.len() && b[i] != c {
                if b[i] == b'\n' {
                    return Err(Diagnostic::at(Code::Syntax, &here, "unterminated literal"));
                }
                if b[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            if i >= b.len() {
                return Err(Diagnostic::at(Code::Syntax, &here, "unterminated literal"));
            }
            i += 1;
            if c == b'"' {
                TokKind::Str
            } else {
                TokKind::Char
            }
        } else {
            match PUNCTS.iter().find(|p| src[i..].starts_with(**p)) {
                Some(p) => {
                    i += p.len();
                    TokKind::Punct
                }
                None => {
                    let ch = src[i..].chars().next().unwrap();
                    return Err(Diagnostic::at(Code::Syntax, &here, format!("unexpected character '{ch}'")));
                }
            }
        };
        let text = &src[start..i];
        col += text.chars().count() as u32;
        toks.push(Token { kind, text: text.into(), loc: here, bol, space });
        bol = false;
        space = false;
    }
    Ok(toks)
}

/// Decodes the body of a character or string literal.
pub fn unescape(lit: &str) -> Result<Vec<u8>, String> {
    let inner = &lit.as_bytes()[1..lit.len() - 1];
    let mut out = Vec::new();
    let mut i = 0;
    while i < inner.len() {
        if inner[i] != b'\\' {
            out.push(inner[i]);
            i += 1;
            continue;
        }
        i += 1;
        let e = *inner.get(i).ok_or("dangling escape")?;
        i += 1;
        out.push(match e {
            b'n' => b'\n',
            b't' => b'\t',
            b'r' => b'\r',
            b'0'..=b'7' => {
                let mut v = (e - b'0') as u32;
                let mut k = 0;
                while k < 2 && i < inner.len() && (b'0'..=b'7').contains(&inner[i]) {
                    v = v * 8 + (inner[i] - b'0') as u32;
                    i += 1;
                    k += 1;
                }
                v as u8
            }
            b'x' => {
                let mut v = 0u32;
                while i < inner.len() && inner[i].is_ascii_hexdigit() {
                    v = v * 16 + (inner[i] as char).to_digit(16).unwrap();
                    i += 1;
                }
                v as u8
            }
            b'a' => 7,
            b'b' => 8,
            b'f' => 12,
            b'v' => 11,
            b'\\' | b'\'' | b'"' | b'?' => e,
            _ => return Err(format!("unknown escape '\\{}'", e as char)),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokKind, String)> {
        lex(&Arc::from("t.c"), src).unwrap().into_iter().map(|t| (t.kind, t.text.to_string())).collect()
    }

    #[test]
    fn numbers_and_puncts() {
        let k = kinds("x<<=0x3Fu+1.5f;");
        assert_eq!(
            k,
            vec![
                (TokKind::Ident, "x".into()),
                (TokKind::Punct, "<<=".into()),
                (TokKind::Int, "0x3Fu".into()),
                (TokKind::Punct, "+".into()),
                (TokKind::Float, "1.5f".into()),
                (TokKind::Punct, ";".into()),
            ]
        );
    }

    #[test]
    fn locations_are_one_based() {
        let t = lex(&Arc::from("t.c"), "int a;\n  /* c */ b").unwrap();
        assert_eq!((t[0].loc.line, t[0].loc.col), (1, 1));
        assert_eq!((t[3].loc.line, t[3].loc.col), (2, 11));
        assert!(t[3].bol);
    }

    #[test]
    fn escapes() {
        assert_eq!(unescape("'\\n'").unwrap(), vec![b'\n']);
        assert_eq!(unescape("\"a\\x41\\0\"").unwrap(), vec![b'a', b'A', 0]);
    }
}
