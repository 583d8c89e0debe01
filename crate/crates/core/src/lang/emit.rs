use std::fmt::Write;

use super::ast::{Program, Stmt, StmtKind};

/// Pretty-prints a program in the concrete syntax accepted by [`super::parse`].
pub fn emit(p: &Program) -> String {
    let mut out = String::new();
    let params: Vec<&str> = p.inputs().map(|v| v.name.as_str()).collect();
    let _ = writeln!(out, "prog {}({})", p.name, params.join(", "));
    let _ = writeln!(out, "pre: {}", p.pre);
    emit_block(&mut out, &p.body, 0);
    let _ = writeln!(out, "post: {}", p.post);
    out
}

pub fn emit_block(out: &mut String, block: &[Stmt], depth: usize) {
    let pad = "  ".repeat(depth);
    for s in block {
        match &s.kind {
            StmtKind::Assign(v, e) => {
                let _ = writeln!(out, "{pad}{v} = {e};");
            }
            StmtKind::Assume(c) => {
                let _ = writeln!(out, "{pad}assume({c});");
            }
            StmtKind::Assert(c) => {
                let _ = writeln!(out, "{pad}assert({c});");
            }
            StmtKind::If(c, t, e) => {
                let _ = writeln!(out, "{pad}if ({c}) {{");
                emit_block(out, t, depth + 1);
                if e.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    emit_block(out, e, depth + 1);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            StmtKind::While(c, b) => {
                let _ = writeln!(out, "{pad}while ({c}) {{");
                emit_block(out, b, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}
