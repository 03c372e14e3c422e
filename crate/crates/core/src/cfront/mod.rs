//! C-lite front end: preprocessing, parsing, typechecking.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pp;
pub mod prelude;
pub mod render;
pub mod tast;
pub mod typeck;
pub mod types;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::diag::Diagnostic;
pub use tast::TypedProgram;

/// Preprocessor configuration.
#[derive(Clone, Debug, Default)]
pub struct FrontendOptions {
    pub include_dirs: Vec<PathBuf>,
    pub defines: Vec<(String, String)>,
}

fn prelude_unit() -> Result<ast::TranslationUnit, Diagnostic> {
    let mut pp = pp::Preprocessor::new(&[], &[])?;
    let toks = pp.run_source(&Arc::from(prelude::SOFTFLOAT_FILE), prelude::SOFTFLOAT_SOURCE)?;
    parser::parse(&toks)
}

fn check_with_prelude(user: impl FnOnce(&[String]) -> Result<ast::TranslationUnit, Diagnostic>) -> Result<TypedProgram, Diagnostic> {
    let mut unit = prelude_unit()?;
    let names = parser::typedef_names(&unit);
    let tu = user(&names)?;
    unit.items.extend(tu.items);
    typeck::typecheck(&unit)
}

/// Preprocesses, parses and typechecks a source file.
pub fn compile_file(path: &Path, opts: &FrontendOptions) -> Result<TypedProgram, Diagnostic> {
    check_with_prelude(|names| {
        let mut pp = pp::Preprocessor::new(&opts.include_dirs, &opts.defines)?;
        let toks = pp.run_file(path)?;
        parser::parse_with_typedefs(&toks, names.iter().cloned())
    })
}

/// Like [`compile_file`] for in-memory source text.
pub fn compile_source(file: &str, src: &str, opts: &FrontendOptions) -> Result<TypedProgram, Diagnostic> {
    check_with_prelude(|names| {
        let mut pp = pp::Preprocessor::new(&opts.include_dirs, &opts.defines)?;
        let toks = pp.run_source(&Arc::from(file), src)?;
        parser::parse_with_typedefs(&toks, names.iter().cloned())
    })
}

/// Parses a file without typechecking. Prelude typedef names are known.
pub fn parse_file(path: &Path, opts: &FrontendOptions) -> Result<ast::TranslationUnit, Diagnostic> {
    let names = parser::typedef_names(&prelude_unit()?);
    let mut pp = pp::Preprocessor::new(&opts.include_dirs, &opts.defines)?;
    let toks = pp.run_file(path)?;
    parser::parse_with_typedefs(&toks, names)
}

/// Like [`parse_file`] for in-memory source text.
pub fn parse_source(file: &str, src: &str, opts: &FrontendOptions) -> Result<ast::TranslationUnit, Diagnostic> {
    let names = parser::typedef_names(&prelude_unit()?);
    let mut pp = pp::Preprocessor::new(&opts.include_dirs, &opts.defines)?;
    let toks = pp.run_source(&Arc::from(file), src)?;
    parser::parse_with_typedefs(&toks, names)
}
