//! Line-oriented debug dump: `id = op(args) : width @file:line`.

use std::fmt::Write;

use super::expr::{ExprId, ExprPool, Op};

pub fn op_text(pool: &ExprPool, e: ExprId) -> String {
    let n = |x: &ExprId| format!("%{}", x.0);
    match pool.op(e) {
        Op::Const(b) => format!("const({}'h{})", b.width(), b.to_hex()),
        Op::Var(name) => format!("var({name})"),
        Op::Not(a) => format!("not({})", n(a)),
        Op::Neg(a) => format!("neg({})", n(a)),
        Op::Bin(o, a, b) => format!("{}({}, {})", o.name(), n(a), n(b)),
        Op::Ite(c, a, b) => format!("ite({}, {}, {})", n(c), n(a), n(b)),
        Op::Extract(h, l, a) => format!("extract({h}, {l}, {})", n(a)),
        Op::Concat(a, b) => format!("concat({}, {})", n(a), n(b)),
        Op::Zext(a) => format!("zext({})", n(a)),
        Op::Sext(a) => format!("sext({})", n(a)),
    }
}

/// Dumps every node reachable from `roots`, children first.
pub fn dump(pool: &ExprPool, roots: &[ExprId]) -> String {
    let mut out = String::new();
    for e in pool.postorder(roots) {
        let _ = write!(out, "%{} = {} : {}", e.0, op_text(pool, e), pool.width(e));
        if let Some(loc) = pool.loc(e) {
            let _ = write!(out, " @{}:{}", loc.file, loc.line);
        }
        out.push('\n');
    }
    out
}
