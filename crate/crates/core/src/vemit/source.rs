//! Source text lookup for back-annotation entries.

use std::collections::HashMap;

use crate::cfront::prelude::{SOFTFLOAT_FILE, SOFTFLOAT_SOURCE};
use crate::diag::SourceLoc;

const MAX_SNIPPET: usize = 160;

/// Caches source files by name. The soft-float prelude is always known;
/// other files are read from disk on first use unless added explicitly.
#[derive(Default)]
pub struct Sources {
    files: HashMap<String, Option<Vec<String>>>,
}

impl Sources {
    pub fn new() -> Self {
        let mut s = Sources::default();
        s.add(SOFTFLOAT_FILE, SOFTFLOAT_SOURCE);
        s
    }

    pub fn add(&mut self, file: &str, text: &str) {
        self.files.insert(file.to_string(), Some(text.lines().map(str::to_string).collect()));
    }

    fn lines(&mut self, file: &str) -> Option<&Vec<String>> {
        self.files
            .entry(file.to_string())
            .or_insert_with(|| std::fs::read_to_string(file).ok().map(|t| t.lines().map(str::to_string).collect()))
            .as_ref()
    }

    /// The C text starting at `loc` up to the end of its statement or
    /// enclosing bracket, with whitespace collapsed. Empty when the file
    /// is unavailable.
    pub fn snippet(&mut self, loc: &SourceLoc) -> String {
        let Some(lines) = self.lines(&loc.file) else {
            return String::new();
        };
        let first = loc.line as usize;
        if first == 0 || first > lines.len() {
            return String::new();
        }
        let mut raw = String::new();
        let mut depth = 0i32;
        'lines: for (i, line) in lines[first - 1..].iter().enumerate().take(4) {
            let text = if i == 0 {
                line.char_indices().nth(loc.col.saturating_sub(1) as usize).map_or("", |(b, _)| &line[b..])
            } else {
                line.as_str()
            };
            for c in text.chars() {
                match c {
                    ';' => break 'lines,
                    '(' | '[' | '{' => depth += 1,
                    ')' | ']' | '}' | ',' if depth == 0 => break 'lines,
                    ')' | ']' | '}' => depth -= 1,
                    _ => {}
                }
                raw.push(c);
            }
            raw.push(' ');
        }
        let mut out = raw.split_whitespace().collect::<Vec<_>>().join(" ");
        if out.len() > MAX_SNIPPET {
            let cut = (0..=MAX_SNIPPET).rev().find(|&i| out.is_char_boundary(i)).unwrap_or(0);
            out.truncate(cut);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snippet_stops_at_semicolon() {
        let mut s = Sources::new();
        s.add("m.c", "int f(void) {\n  x = a +\n      b; y = 2;\n  g(p + 1, q);\n}\n");
        assert_eq!(s.snippet(&SourceLoc::new("m.c", 2, 3)), "x = a + b");
        assert_eq!(s.snippet(&SourceLoc::new("m.c", 4, 5)), "p + 1");
        assert_eq!(s.snippet(&SourceLoc::new("missing.c", 1, 1)), "");
    }
}
