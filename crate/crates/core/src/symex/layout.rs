//! Storage cells: every object is split into leaf scalars (plus padding
//! runs), and each cell gets its own SSA name base.

use std::collections::HashSet;
use std::sync::Arc;

use crate::cfront::types::{CType, TypeTable};

#[derive(Clone, Debug)]
pub(crate) struct Cell {
    pub start: usize,
    pub len: usize,
    pub base: Arc<str>,
}

/// Splits an object of type `ty` into cells named after `base`.
pub(crate) fn cells_of(types: &TypeTable, ty: &CType, base: &str) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    walk(types, ty, 0, base.to_string(), &mut out);
    let size = types.size_of(ty) as usize;
    let mut filled = Vec::new();
    let mut at = 0;
    for (start, len, name) in out {
        if start > at {
            filled.push((at, start - at, format!("{base}_pad{at}")));
        }
        at = start + len;
        filled.push((start, len, name));
    }
    if at < size {
        filled.push((at, size - at, format!("{base}_pad{at}")));
    }
    filled
}

fn walk(types: &TypeTable, ty: &CType, off: usize, path: String, out: &mut Vec<(usize, usize, String)>) {
    match ty {
        CType::Array(elem, Some(n)) => {
            let es = types.size_of(elem) as usize;
            for i in 0..*n as usize {
                walk(types, elem, off + i * es, format!("{path}_{i}"), out);
            }
        }
        CType::Record(id) => {
            let rec = types.record(*id);
            let fields = rec.fields.as_deref().unwrap_or(&[]);
            if rec.is_union {
                let widest = fields.iter().enumerate().max_by_key(|(i, f)| (types.size_of(&f.ty), std::cmp::Reverse(*i)));
                if let Some((_, f)) = widest {
                    walk(types, &f.ty, off, field_path(&path, f.name.as_deref()), out);
                }
            } else {
                for f in fields {
                    walk(types, &f.ty, off + f.offset as usize, field_path(&path, f.name.as_deref()), out);
                }
            }
        }
        _ => {
            let size = types.size_of(ty) as usize;
            if size > 0 {
                out.push((off, size, path));
            }
        }
    }
}

fn field_path(path: &str, name: Option<&str>) -> String {
    match name {
        Some(n) => format!("{path}_{n}"),
        None => path.to_string(),
    }
}

/// Hands out cell name bases that can never produce a versioned name equal
/// to a port or an auxiliary wire.
pub(crate) struct Namer {
    used: HashSet<String>,
    ports: Vec<String>,
}

impl Namer {
    pub fn new(ports: Vec<String>) -> Self {
        Namer { used: HashSet::new(), ports }
    }

    fn clashes(&self, base: &str) -> bool {
        if self.used.contains(base) || base == "aux" {
            return true;
        }
        self.ports.iter().any(|p| {
            p.strip_prefix(base)
                .and_then(|r| r.strip_prefix('_'))
                .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        })
    }

    pub fn fresh(&mut self, want: &str) -> Arc<str> {
        let mut name = want.to_string();
        let mut k = 0;
        while self.clashes(&name) {
            k += 1;
            name = format!("{want}_v{k}");
        }
        self.used.insert(name.clone());
        name.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn namer_avoids_port_versions() {
        let mut n = Namer::new(vec!["s_1".into()]);
        assert_eq!(&*n.fresh("s"), "s_v1");
        assert_eq!(&*n.fresh("s_1"), "s_1");
        assert_eq!(&*n.fresh("s_1"), "s_1_v1");
        assert_eq!(&*n.fresh("aux"), "aux_v1");
    }

    #[test]
    fn scalar_is_one_cell() {
        let t = TypeTable::default();
        let c = cells_of(&t, &CType::Int { bits: 32, signed: false }, "x");
        assert_eq!(c, vec![(0, 4, "x".to_string())]);
    }
}
