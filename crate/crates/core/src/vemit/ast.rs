//! The emitted Verilog subset and its deterministic printer.

use std::fmt::Write;

use serde::Serialize;

use crate::bvir::Bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VPort {
    pub dir: Dir,
    pub name: String,
    pub width: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VWire {
    pub name: String,
    pub width: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VAssign {
    pub lhs: String,
    pub rhs: VExpr,
}

/// `always_comb assert (expr) else $error("...")`; check labels are
/// carried at the front of the message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VAssert {
    pub expr: VExpr,
    pub label: Option<String>,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VUnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VBinOp {
    And,
    Or,
    Xor,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl VBinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            VBinOp::And => "&",
            VBinOp::Or => "|",
            VBinOp::Xor => "^",
            VBinOp::Add => "+",
            VBinOp::Sub => "-",
            VBinOp::Mul => "*",
            VBinOp::Div => "/",
            VBinOp::Mod => "%",
            VBinOp::Shl => "<<",
            VBinOp::Shr => ">>",
            VBinOp::Eq => "==",
            VBinOp::Ne => "!=",
            VBinOp::Lt => "<",
            VBinOp::Le => "<=",
            VBinOp::Gt => ">",
            VBinOp::Ge => ">=",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            VBinOp::Mul | VBinOp::Div | VBinOp::Mod => 9,
            VBinOp::Add | VBinOp::Sub => 8,
            VBinOp::Shl | VBinOp::Shr => 7,
            VBinOp::Lt | VBinOp::Le | VBinOp::Gt | VBinOp::Ge => 6,
            VBinOp::Eq | VBinOp::Ne => 5,
            VBinOp::And => 4,
            VBinOp::Xor => 3,
            VBinOp::Or => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VExpr {
    Id(String),
    Const(Bits),
    /// `$signed(id)`
    Signed(String),
    /// `id[hi:lo]`
    Select(String, u32, u32),
    Unary(VUnOp, Box<VExpr>),
    Binary(VBinOp, Box<VExpr>, Box<VExpr>),
    Ternary(Box<VExpr>, Box<VExpr>, Box<VExpr>),
    Concat(Vec<VExpr>),
}

impl VExpr {
    fn atomic(&self) -> bool {
        matches!(self, VExpr::Id(_) | VExpr::Const(_) | VExpr::Signed(_) | VExpr::Select(..) | VExpr::Concat(_))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s);
        s
    }

    fn write_operand(&self, s: &mut String) {
        if self.atomic() {
            self.write(s);
        } else {
            s.push('(');
            self.write(s);
            s.push(')');
        }
    }

    fn write(&self, s: &mut String) {
        match self {
            VExpr::Id(n) => s.push_str(n),
            VExpr::Const(b) => {
                let _ = write!(s, "{}'h{}", b.width(), b.to_hex());
            }
            VExpr::Signed(n) => {
                let _ = write!(s, "$signed({n})");
            }
            VExpr::Select(n, h, l) => {
                let _ = write!(s, "{n}[{h}:{l}]");
            }
            VExpr::Unary(op, a) => {
                s.push(if *op == VUnOp::Not { '~' } else { '-' });
                a.write_operand(s);
            }
            VExpr::Binary(op, a, b) => {
                a.write_operand(s);
                let _ = write!(s, " {} ", op.symbol());
                b.write_operand(s);
            }
            VExpr::Ternary(c, a, b) => {
                c.write_operand(s);
                s.push_str(" ? ");
                a.write_operand(s);
                s.push_str(" : ");
                b.write_operand(s);
            }
            VExpr::Concat(parts) => {
                s.push('{');
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    p.write(s);
                }
                s.push('}');
            }
        }
    }

    /// Identifiers read by this expression, in order of appearance.
    pub fn idents<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            VExpr::Id(n) | VExpr::Signed(n) | VExpr::Select(n, ..) => out.push(n),
            VExpr::Const(_) => {}
            VExpr::Unary(_, a) => a.idents(out),
            VExpr::Binary(_, a, b) => {
                a.idents(out);
                b.idents(out);
            }
            VExpr::Ternary(c, a, b) => {
                c.idents(out);
                a.idents(out);
                b.idents(out);
            }
            VExpr::Concat(ps) => ps.iter().for_each(|p| p.idents(out)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VModule {
    pub name: String,
    pub ports: Vec<VPort>,
    pub wires: Vec<VWire>,
    pub assigns: Vec<VAssign>,
    pub asserts: Vec<VAssert>,
}

impl VModule {
    pub fn width_of(&self, name: &str) -> Option<u32> {
        self.ports
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.width)
            .or_else(|| self.wires.iter().find(|w| w.name == name).map(|w| w.width))
    }

    pub fn inputs(&self) -> impl Iterator<Item = &VPort> {
        self.ports.iter().filter(|p| p.dir == Dir::Input)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &VPort> {
        self.ports.iter().filter(|p| p.dir == Dir::Output)
    }
}

fn range(width: u32) -> String {
    format!("[{}:0]", width - 1)
}

pub(crate) fn escape_message(m: &str) -> String {
    let mut s = String::with_capacity(m.len());
    for c in m.chars() {
        match c {
            '"' => s.push_str("\\\""),
            '\\' => s.push_str("\\\\"),
            '\n' => s.push_str("\\n"),
            c => s.push(c),
        }
    }
    s
}

/// Deterministic text of a module: one item per line, two-space indent.
pub fn render_text(m: &VModule) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "module {} (", m.name);
    for (i, p) in m.ports.iter().enumerate() {
        let dir = if p.dir == Dir::Input { "input" } else { "output" };
        let sep = if i + 1 < m.ports.len() { "," } else { "" };
        let _ = writeln!(s, "  {dir} logic unsigned {} {}{sep}", range(p.width), p.name);
    }
    s.push_str(");\n");
    for w in &m.wires {
        if w.width == 1 {
            let _ = writeln!(s, "  logic {};", w.name);
        } else {
            let _ = writeln!(s, "  logic unsigned {} {};", range(w.width), w.name);
        }
    }
    for a in &m.assigns {
        let _ = writeln!(s, "  assign {} = {};", a.lhs, a.rhs.render());
    }
    for a in &m.asserts {
        let msg = match &a.label {
            Some(l) => format!("{l}: {}", a.message),
            None => a.message.clone(),
        };
        let _ = writeln!(s, "  always_comb assert ({}) else $error(\"{}\");", a.expr.render(), escape_message(&msg));
    }
    s.push_str("endmodule\n");
    s
}

/// One back-annotation record: a Verilog identifier and the C source
/// position it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BackMapEntry {
    pub id: String,
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub expr: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BackMap {
    pub entries: Vec<BackMapEntry>,
}

/// JSON array of `{id, file, line, col, expr}` in emission order.
pub fn emit_backmap(map: &BackMap) -> String {
    if map.entries.is_empty() {
        return "[]\n".to_string();
    }
    let mut s = serde_json::to_string_pretty(&map.entries).expect("backmap serializes");
    s.push('\n');
    s
}
