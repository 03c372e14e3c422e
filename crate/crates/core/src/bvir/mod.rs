//! Pure bitvector IR shared by symbolic execution, emission and
//! bit-blasting.

mod bits;
mod dump;
mod eval;
mod expr;
mod simplify;

pub use bits::{Bits, MAX_WIDTH};
pub use dump::{dump, op_text};
pub use eval::{eval, Plan};
pub use expr::{BinOp, ExprId, ExprPool, Node, Op};
pub use simplify::{simplify, simplify_with};
