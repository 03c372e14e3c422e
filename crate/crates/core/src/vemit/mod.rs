//! Verilog emission, re-parsing and evaluation of the emitted subset.

mod ast;
mod emit;
mod lower;
mod parse;
mod source;

pub use ast::{
    emit_backmap, render_text, BackMap, BackMapEntry, Dir, VAssert, VAssign, VBinOp, VExpr, VModule, VPort, VUnOp,
    VWire,
};
pub use emit::{assert_groups, emit_module, emit_module_with, escape_ident, is_reserved, AssertGroup, ESCAPE_PREFIX};
pub use lower::{eval_module, lower_module, lower_module_renamed, CompiledModule, Lowered, ModuleValues};
pub use parse::parse_subset;
pub use source::Sources;

/// Emission lint: a part-select directly after a closing parenthesis.
pub fn has_expression_select(text: &str) -> bool {
    let mut prev = None;
    for c in text.chars().filter(|c| !c.is_whitespace()) {
        if c == '[' && prev == Some(')') {
            return true;
        }
        prev = Some(c);
    }
    false
}
