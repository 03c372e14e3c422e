//! Translate bounded C programs into flat bit-level Verilog models and
//! check them in-tool.

pub mod bvir;
pub mod cfront;
pub mod diag;
pub mod equiv;
pub mod oracle;
pub mod semantics;
pub mod symex;
pub mod vemit;

pub use diag::{Code, Diagnostic, SourceLoc};
