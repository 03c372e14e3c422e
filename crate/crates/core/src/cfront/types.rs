//! C-lite types, layout and arithmetic conversions.

use std::fmt;
use std::sync::Arc;

use crate::diag::{Code, Diagnostic, SourceLoc};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CType {
    Void,
    Bool,
    Int { signed: bool, bits: u32 },
    Float,
    Double,
    /// Arrays of unknown length have `None`.
    Array(Box<CType>, Option<u64>),
    Pointer(Box<CType>),
    /// Index into the record table.
    Record(usize),
    Function(Arc<FnSig>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FnSig {
    pub ret: CType,
    pub params: Vec<CType>,
}

pub const INT: CType = CType::Int { signed: true, bits: 32 };
pub const UINT: CType = CType::Int { signed: false, bits: 32 };
pub const LONG: CType = CType::Int { signed: true, bits: 64 };
pub const ULONG: CType = CType::Int { signed: false, bits: 64 };
pub const CHAR: CType = CType::Int { signed: true, bits: 8 };

impl CType {
    pub fn int(signed: bool, bits: u32) -> CType {
        CType::Int { signed, bits }
    }

    pub fn ptr(to: CType) -> CType {
        CType::Pointer(Box::new(to))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, CType::Int { .. } | CType::Bool)
    }

    pub fn is_arithmetic(&self) -> bool {
        self.is_integer() || self.is_float()
    }

    pub fn is_float(&self) -> bool {
        matches!(self, CType::Float | CType::Double)
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self, CType::Pointer(_))
    }

    pub fn is_scalar(&self) -> bool {
        self.is_arithmetic() || self.is_pointer()
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, CType::Int { signed: true, .. })
    }

    pub fn pointee(&self) -> Option<&CType> {
        match self {
            CType::Pointer(t) => Some(t),
            _ => None,
        }
    }

    /// Width in bits of a scalar value of this type.
    pub fn scalar_bits(&self) -> Option<u32> {
        Some(match self {
            CType::Bool => 8,
            CType::Int { bits, .. } => *bits,
            CType::Float => 32,
            CType::Double | CType::Pointer(_) => 64,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub name: Option<String>,
    pub ty: CType,
    pub offset: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub tag: Option<String>,
    pub is_union: bool,
    /// `None` until the definition is seen.
    pub fields: Option<Vec<Field>>,
    pub size: u64,
    pub align: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub size: u64,
    pub align: u64,
}

/// Table of record types referenced by [`CType::Record`].
#[derive(Clone, Debug, Default)]
pub struct TypeTable {
    pub records: Vec<Record>,
}

impl TypeTable {
    pub fn record(&self, id: usize) -> &Record {
        &self.records[id]
    }

    pub fn is_complete(&self, t: &CType) -> bool {
        match t {
            CType::Void | CType::Function(_) => false,
            CType::Array(e, n) => n.is_some() && self.is_complete(e),
            CType::Record(id) => self.records[*id].fields.is_some(),
            _ => true,
        }
    }

    pub fn layout(&self, t: &CType, loc: &SourceLoc) -> Result<Layout, Diagnostic> {
        let incomplete = || Diagnostic::at(Code::Incomplete, loc, format!("incomplete type '{}'", self.display(t)));
        Ok(match t {
            CType::Bool => Layout { size: 1, align: 1 },
            CType::Int { bits, .. } => Layout { size: *bits as u64 / 8, align: *bits as u64 / 8 },
            CType::Float => Layout { size: 4, align: 4 },
            CType::Double | CType::Pointer(_) => Layout { size: 8, align: 8 },
            CType::Array(e, Some(n)) => {
                let l = self.layout(e, loc)?;
                Layout { size: l.size * n, align: l.align }
            }
            CType::Record(id) => {
                let r = &self.records[*id];
                if r.fields.is_none() {
                    return Err(incomplete());
                }
                Layout { size: r.size, align: r.align }
            }
            CType::Void | CType::Function(_) | CType::Array(_, None) => return Err(incomplete()),
        })
    }

    pub fn size_of(&self, t: &CType) -> u64 {
        self.layout(t, &SourceLoc::builtin()).map(|l| l.size).unwrap_or(0)
    }

    /// Places `fields` according to the layout rules and records the
    /// resulting size and alignment.
    pub fn complete_record(&mut self, id: usize, members: Vec<(Option<String>, CType)>, loc: &SourceLoc) -> Result<(), Diagnostic> {
        let is_union = self.records[id].is_union;
        let mut fields = Vec::new();
        let mut offset = 0u64;
        let mut size = 0u64;
        let mut align = 1u64;
        for (name, ty) in members {
            let l = self.layout(&ty, loc)?;
            align = align.max(l.align);
            if is_union {
                fields.push(Field { name, ty, offset: 0 });
                size = size.max(l.size);
            } else {
                offset = round_up(offset, l.align);
                fields.push(Field { name, ty, offset });
                offset += l.size;
                size = offset;
            }
        }
        let r = &mut self.records[id];
        r.fields = Some(fields);
        r.align = align;
        r.size = round_up(size, align);
        Ok(())
    }

    pub fn display(&self, t: &CType) -> String {
        TypeDisplay { table: self, ty: t }.to_string()
    }

    /// Looks up a member, searching anonymous members recursively; returns
    /// the member type and its byte offset.
    pub fn find_member(&self, id: usize, name: &str) -> Option<(CType, u64)> {
        let fields = self.records[id].fields.as_ref()?;
        for f in fields {
            match &f.name {
                Some(n) if n == name => return Some((f.ty.clone(), f.offset)),
                None => {
                    if let CType::Record(inner) = f.ty {
                        if let Some((t, off)) = self.find_member(inner, name) {
                            return Some((t, f.offset + off));
                        }
                    }
                }
                _ => {}
            }
        }
        None
    }
}

pub fn round_up(x: u64, a: u64) -> u64 {
    x.div_ceil(a) * a
}

struct TypeDisplay<'a> {
    table: &'a TypeTable,
    ty: &'a CType,
}

impl fmt::Display for TypeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |t| TypeDisplay { table: self.table, ty: t };
        match self.ty {
            CType::Void => write!(f, "void"),
            CType::Bool => write!(f, "_Bool"),
            CType::Int { signed, bits } => write!(f, "{}int{bits}", if *signed { "" } else { "u" }),
            CType::Float => write!(f, "float"),
            CType::Double => write!(f, "double"),
            CType::Array(e, Some(n)) => write!(f, "{}[{n}]", sub(e)),
            CType::Array(e, None) => write!(f, "{}[]", sub(e)),
            CType::Pointer(t) => write!(f, "{}*", sub(t)),
            CType::Record(id) => {
                let r = &self.table.records[*id];
                let kw = if r.is_union { "union" } else { "struct" };
                match &r.tag {
                    Some(t) => write!(f, "{kw} {t}"),
                    None => write!(f, "{kw} <anonymous#{id}>"),
                }
            }
            CType::Function(sig) => {
                write!(f, "{}(", sub(&sig.ret))?;
                for (i, p) in sig.params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", sub(p))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Integer promotion: everything narrower than 32 bits becomes `int`.
pub fn promote(t: &CType) -> CType {
    match t {
        CType::Bool => INT,
        CType::Int { bits, .. } if *bits < 32 => INT,
        other => other.clone(),
    }
}

/// Common type of two integer operands under the usual arithmetic
/// conversions.
pub fn usual_arith_conversions(a: &CType, b: &CType) -> Result<CType, Diagnostic> {
    if !a.is_integer() || !b.is_integer() {
        return Err(Diagnostic::bare(Code::Type, "usual arithmetic conversions need integer operands"));
    }
    let (CType::Int { signed: sa, bits: wa }, CType::Int { signed: sb, bits: wb }) = (promote(a), promote(b)) else {
        unreachable!()
    };
    Ok(if sa == sb {
        CType::int(sa, wa.max(wb))
    } else {
        let (uw, sw) = if sa { (wb, wa) } else { (wa, wb) };
        if uw >= sw {
            CType::int(false, uw)
        } else {
            CType::int(true, sw)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        let u8_ = CType::int(false, 8);
        let i16 = CType::int(true, 16);
        assert_eq!(usual_arith_conversions(&u8_, &i16).unwrap(), INT);
        assert_eq!(usual_arith_conversions(&UINT, &INT).unwrap(), UINT);
        assert_eq!(usual_arith_conversions(&LONG, &UINT).unwrap(), LONG);
        assert_eq!(usual_arith_conversions(&ULONG, &LONG).unwrap(), ULONG);
        assert_eq!(usual_arith_conversions(&CType::Bool, &CType::Bool).unwrap(), INT);
        assert!(usual_arith_conversions(&CType::Float, &INT).is_err());
    }

    #[test]
    fn layouts() {
        let mut t = TypeTable::default();
        let l = t.layout(&UINT, &SourceLoc::builtin()).unwrap();
        assert_eq!((l.size, l.align), (4, 4));
        t.records.push(Record { tag: None, is_union: false, fields: None, size: 0, align: 1 });
        t.complete_record(0, vec![(Some("a".into()), CType::int(false, 8)), (Some("b".into()), UINT)], &SourceLoc::builtin())
            .unwrap();
        assert_eq!(t.find_member(0, "b"), Some((UINT, 4)));
        assert_eq!((t.records[0].size, t.records[0].align), (8, 4));
        t.records.push(Record { tag: None, is_union: true, fields: None, size: 0, align: 1 });
        t.complete_record(
            1,
            vec![(Some("a".into()), CType::int(false, 16)), (Some("b".into()), CType::Array(Box::new(CType::int(false, 8)), Some(3)))],
            &SourceLoc::builtin(),
        )
        .unwrap();
        assert_eq!((t.records[1].size, t.records[1].align), (4, 2));
        assert_eq!(t.layout(&CType::Record(1), &SourceLoc::builtin()).unwrap().size, 4);
    }
}
