//! Pretty-printer from the untyped AST back to C-lite text.
//!
//! Every compound expression is parenthesised, so reparsing the output
//! reproduces the tree exactly.

use std::fmt::Write;

use super::ast::*;
use super::pp::{DRIVE_OUTPUT, SAMPLE_INPUT};

pub fn render_unit(tu: &TranslationUnit) -> String {
    let mut out = String::new();
    for item in &tu.items {
        match item {
            ExternalDecl::Decl(d) => {
                out.push_str(&render_declaration(d));
                out.push('\n');
            }
            ExternalDecl::Func(f) => {
                let _ = writeln!(out, "{} {}", render_specs(&f.specs), render_declarator(&f.declarator));
                render_block(&f.body, 0, &mut out);
                out.push('\n');
            }
        }
    }
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

pub fn render_specs(s: &DeclSpecs) -> String {
    let mut parts = Vec::new();
    match s.storage {
        Some(Storage::Typedef) => parts.push("typedef".to_string()),
        Some(Storage::Static) => parts.push("static".to_string()),
        Some(Storage::Extern) => parts.push("extern".to_string()),
        None => {}
    }
    if s.is_inline {
        parts.push("inline".into());
    }
    if s.is_const {
        parts.push("const".into());
    }
    parts.push(render_base(&s.base));
    parts.join(" ")
}

fn render_base(b: &BaseType) -> String {
    match b {
        BaseType::Void => "void".into(),
        BaseType::Bool => "_Bool".into(),
        BaseType::Char => "char".into(),
        BaseType::SChar => "signed char".into(),
        BaseType::UChar => "unsigned char".into(),
        BaseType::Short => "short".into(),
        BaseType::UShort => "unsigned short".into(),
        BaseType::Int => "int".into(),
        BaseType::UInt => "unsigned int".into(),
        BaseType::Long => "long".into(),
        BaseType::ULong => "unsigned long".into(),
        BaseType::LongLong => "long long".into(),
        BaseType::ULongLong => "unsigned long long".into(),
        BaseType::Float => "float".into(),
        BaseType::Double => "double".into(),
        BaseType::Named(n) => n.clone(),
        BaseType::Record(r) => {
            let mut s = String::from(if r.is_union { "union" } else { "struct" });
            if let Some(t) = &r.tag {
                s.push(' ');
                s.push_str(t);
            }
            if let Some(fields) = &r.fields {
                s.push_str(" { ");
                for f in fields {
                    s.push_str(&render_specs(&f.specs));
                    let ds: Vec<String> = f.declarators.iter().map(render_declarator).collect();
                    if !ds.is_empty() {
                        s.push(' ');
                        s.push_str(&ds.join(", "));
                    }
                    s.push_str("; ");
                }
                s.push('}');
            }
            s
        }
        BaseType::Enum(e) => {
            let mut s = String::from("enum");
            if let Some(t) = &e.tag {
                s.push(' ');
                s.push_str(t);
            }
            if let Some(items) = &e.items {
                let body: Vec<String> = items
                    .iter()
                    .map(|(n, v, _)| match v {
                        Some(v) => format!("{n} = {}", render_expr(v)),
                        None => n.clone(),
                    })
                    .collect();
                let _ = write!(s, " {{ {} }}", body.join(", "));
            }
            s
        }
    }
}

pub fn render_declarator(d: &Declarator) -> String {
    match d {
        Declarator::Ident(n, _) => n.clone().unwrap_or_default(),
        Declarator::Pointer(inner) => format!("*{}", render_declarator(inner)),
        Declarator::Array(inner, n) => {
            let len = n.as_ref().map(|e| render_expr(e)).unwrap_or_default();
            format!("{}[{len}]", wrap_declarator(inner))
        }
        Declarator::Function(inner, ps) => {
            let params: Vec<String> = ps
                .iter()
                .map(|p| {
                    let d = render_declarator(&p.declarator);
                    if d.is_empty() {
                        render_specs(&p.specs)
                    } else {
                        format!("{} {d}", render_specs(&p.specs))
                    }
                })
                .collect();
            let params = if params.is_empty() { "void".to_string() } else { params.join(", ") };
            format!("{}({params})", wrap_declarator(inner))
        }
    }
}

fn wrap_declarator(d: &Declarator) -> String {
    match d {
        Declarator::Pointer(_) => format!("({})", render_declarator(d)),
        _ => render_declarator(d),
    }
}

pub fn render_type_name(t: &TypeName) -> String {
    let d = render_declarator(&t.declarator);
    if d.is_empty() {
        render_specs(&t.specs)
    } else {
        format!("{} {d}", render_specs(&t.specs))
    }
}

fn render_declaration(d: &Declaration) -> String {
    let mut s = render_specs(&d.specs);
    let parts: Vec<String> = d
        .inits
        .iter()
        .map(|i| match &i.init {
            Some(init) => format!("{} = {}", render_declarator(&i.declarator), render_init(init)),
            None => render_declarator(&i.declarator),
        })
        .collect();
    if !parts.is_empty() {
        s.push(' ');
        s.push_str(&parts.join(", "));
    }
    s.push(';');
    s
}

fn render_init(i: &Initializer) -> String {
    match i {
        Initializer::Expr(e) => render_expr(e),
        Initializer::List(items, _) => {
            let parts: Vec<String> = items.iter().map(render_init).collect();
            format!("{{ {} }}", parts.join(", "))
        }
    }
}

fn render_block(b: &Block, level: usize, out: &mut String) {
    indent(level, out);
    out.push_str("{\n");
    for s in &b.items {
        render_stmt(s, level + 1, out);
    }
    indent(level, out);
    out.push_str("}\n");
}

fn render_sub(s: &Stmt, level: usize, out: &mut String) {
    match s {
        Stmt::Block(b) => render_block(b, level, out),
        other => render_stmt(other, level + 1, out),
    }
}

fn render_stmt(s: &Stmt, level: usize, out: &mut String) {
    match s {
        Stmt::Block(b) => return render_block(b, level, out),
        _ => indent(level, out),
    }
    match s {
        Stmt::Decl(d) => {
            out.push_str(&render_declaration(d));
            out.push('\n');
        }
        Stmt::Expr(e, _) => {
            if let Some(e) = e {
                out.push_str(&render_expr(e));
            }
            out.push_str(";\n");
        }
        Stmt::If(c, t, e, _) => {
            let _ = writeln!(out, "if ({})", render_expr(c));
            render_sub(t, level, out);
            if let Some(e) = e {
                indent(level, out);
                out.push_str("else\n");
                render_sub(e, level, out);
            }
        }
        Stmt::While(c, b, _) => {
            let _ = writeln!(out, "while ({})", render_expr(c));
            render_sub(b, level, out);
        }
        Stmt::DoWhile(b, c, _) => {
            out.push_str("do\n");
            render_sub(b, level, out);
            indent(level, out);
            let _ = writeln!(out, "while ({});", render_expr(c));
        }
        Stmt::For(init, c, step, b, _) => {
            let init = match init.as_deref() {
                Some(Stmt::Decl(d)) => render_declaration(d),
                Some(Stmt::Expr(Some(e), _)) => format!("{};", render_expr(e)),
                _ => ";".into(),
            };
            let c = c.as_ref().map(render_expr).unwrap_or_default();
            let step = step.as_ref().map(render_expr).unwrap_or_default();
            let _ = writeln!(out, "for ({init} {c}; {step})");
            render_sub(b, level, out);
        }
        Stmt::Switch(c, b, _) => {
            let _ = writeln!(out, "switch ({})", render_expr(c));
            render_sub(b, level, out);
        }
        Stmt::Case(v, b, _) => {
            let _ = writeln!(out, "case {}:", render_expr(v));
            render_sub(b, level, out);
        }
        Stmt::Default(b, _) => {
            out.push_str("default:\n");
            render_sub(b, level, out);
        }
        Stmt::Break(_) => out.push_str("break;\n"),
        Stmt::Continue(_) => out.push_str("continue;\n"),
        Stmt::Return(e, _) => match e {
            Some(e) => {
                let _ = writeln!(out, "return {};", render_expr(e));
            }
            None => out.push_str("return;\n"),
        },
        Stmt::Sample(t, n, _) => {
            let _ = writeln!(out, "{SAMPLE_INPUT}({}, {n});", render_type_name(t));
        }
        Stmt::Drive(t, n, _) => {
            let _ = writeln!(out, "{DRIVE_OUTPUT}({}, {n});", render_type_name(t));
        }
        Stmt::Block(_) => unreachable!(),
    }
}

pub fn render_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Ident(n) => n.clone(),
        ExprKind::IntLit(s) | ExprKind::FloatLit(s) | ExprKind::StrLit(s) => s.clone(),
        ExprKind::Unary(op, a) => {
            let a = render_expr(a);
            match op {
                UnaryOp::Plus => format!("(+{a})"),
                UnaryOp::Minus => format!("(-{a})"),
                UnaryOp::BitNot => format!("(~{a})"),
                UnaryOp::Not => format!("(!{a})"),
                UnaryOp::Deref => format!("(*{a})"),
                UnaryOp::AddrOf => format!("(&{a})"),
                UnaryOp::PreInc => format!("(++{a})"),
                UnaryOp::PreDec => format!("(--{a})"),
                UnaryOp::PostInc => format!("({a}++)"),
                UnaryOp::PostDec => format!("({a}--)"),
            }
        }
        ExprKind::Binary(op, a, b) => format!("({} {} {})", render_expr(a), op.token(), render_expr(b)),
        ExprKind::Assign(op, a, b) => {
            let op = op.map(|o| o.token()).unwrap_or("");
            format!("({} {op}= {})", render_expr(a), render_expr(b))
        }
        ExprKind::Cond(c, a, b) => format!("({} ? {} : {})", render_expr(c), render_expr(a), render_expr(b)),
        ExprKind::Cast(t, a) => format!("(({}){})", render_type_name(t), render_expr(a)),
        ExprKind::SizeofType(t) => format!("sizeof({})", render_type_name(t)),
        ExprKind::SizeofExpr(a) => format!("(sizeof {})", render_expr(a)),
        ExprKind::Index(a, i) => format!("{}[{}]", render_expr(a), render_expr(i)),
        ExprKind::Member(a, f) => format!("{}.{f}", render_expr(a)),
        ExprKind::Arrow(a, f) => format!("{}->{f}", render_expr(a)),
        ExprKind::Call(f, args) => {
            let args: Vec<String> = args.iter().map(render_expr).collect();
            format!("{}({})", render_expr(f), args.join(", "))
        }
        ExprKind::Comma(a, b) => format!("({}, {})", render_expr(a), render_expr(b)),
    }
}
