//! Source locations and diagnostics shared by every pipeline stage.

use std::fmt;
use std::sync::Arc;

/// A position in a source file. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
}

impl SourceLoc {
    pub fn new(file: impl Into<Arc<str>>, line: u32, col: u32) -> Self {
        SourceLoc { file: file.into(), line, col }
    }

    /// Location used for entities synthesized by the tool itself.
    pub fn builtin() -> Self {
        SourceLoc::new("<builtin>", 1, 1)
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

/// Machine-readable diagnostic codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Code {
    IncludeNotFound,
    MacroRecursion,
    PpSyntax,
    Syntax,
    UnsupportedConstruct,
    Type,
    Recursion,
    Incomplete,
    NoEntry,
    Interface,
    Unsupported,
    UnsupportedFloat,
    WildPointer,
    NoCandidates,
    NameCollision,
    VSyntax,
    Subset,
    UnboundVar,
    WidthMismatch,
    Width,
    PortMismatch,
    FuelExhausted,
    MissingInput,
    Io,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::IncludeNotFound => "E_INCLUDE_NOT_FOUND",
            Code::MacroRecursion => "E_MACRO_RECURSION",
            Code::PpSyntax => "E_PP_SYNTAX",
            Code::Syntax => "E_SYNTAX",
            Code::UnsupportedConstruct => "E_UNSUPPORTED_CONSTRUCT",
            Code::Type => "E_TYPE",
            Code::Recursion => "E_RECURSION",
            Code::Incomplete => "E_INCOMPLETE",
            Code::NoEntry => "E_NO_ENTRY",
            Code::Interface => "E_INTERFACE",
            Code::Unsupported => "E_UNSUPPORTED",
            Code::UnsupportedFloat => "E_UNSUPPORTED_FLOAT",
            Code::WildPointer => "E_WILD_POINTER",
            Code::NoCandidates => "E_NO_CANDIDATES",
            Code::NameCollision => "E_NAME_COLLISION",
            Code::VSyntax => "E_VSYNTAX",
            Code::Subset => "E_SUBSET",
            Code::UnboundVar => "E_UNBOUND_VAR",
            Code::WidthMismatch => "E_WIDTH_MISMATCH",
            Code::Width => "E_WIDTH",
            Code::PortMismatch => "E_PORT_MISMATCH",
            Code::FuelExhausted => "E_FUEL_EXHAUSTED",
            Code::MissingInput => "E_MISSING_INPUT",
            Code::Io => "E_IO",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A diagnostic rendered as `file:line:col: CODE: message`.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}", self.render())]
pub struct Diagnostic {
    pub code: Code,
    pub loc: Option<SourceLoc>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, loc: Option<SourceLoc>, message: impl Into<String>) -> Self {
        Diagnostic { code, loc, message: message.into() }
    }

    pub fn at(code: Code, loc: &SourceLoc, message: impl Into<String>) -> Self {
        Diagnostic::new(code, Some(loc.clone()), message)
    }

    pub fn bare(code: Code, message: impl Into<String>) -> Self {
        Diagnostic::new(code, None, message)
    }

    pub fn render(&self) -> String {
        match &self.loc {
            Some(loc) => format!("{}: {}: {}", loc, self.code, self.message),
            None => format!("<none>:0:0: {}: {}", self.code, self.message),
        }
    }
}

pub type Result<T, E = Diagnostic> = std::result::Result<T, E>;
