//! Program syntax tree and printer.

use std::fmt::Write as _;

use crate::algorithms::ProofScript;
use crate::assertions::{print_expr, Assertion, Expr};
use crate::state_model::{FieldType, Name, Universe};
use crate::syntax::Pos;

#[derive(Clone, Debug)]
pub struct Program {
    /// Universe file as written in the program.
    pub universe_path: String,
    pub universe: Universe,
    pub fields: Vec<(Name, FieldType)>,
    pub methods: Vec<Method>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Method {
    pub name: Name,
    pub params: Vec<(Name, FieldType)>,
    pub requires: Vec<Assertion>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub pos: Pos,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Inhale(Assertion),
    Exhale(Assertion),
    Assert(Assertion),
    Var(Name, FieldType, Option<Expr>),
    Assign(Name, Expr),
    /// `e.f := v`
    Write(Expr, Name, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    Package(Assertion, ProofScript),
    Apply(Assertion),
}

impl StmtKind {
    #[must_use]
    pub fn name(&self) -> &'static str {
        match self {
            StmtKind::Inhale(_) => "inhale",
            StmtKind::Exhale(_) => "exhale",
            StmtKind::Assert(_) => "assert",
            StmtKind::Var(..) => "var",
            StmtKind::Assign(..) => "assign",
            StmtKind::Write(..) => "write",
            StmtKind::If(..) => "if",
            StmtKind::Package(..) => "package",
            StmtKind::Apply(_) => "apply",
        }
    }

    /// One-line rendering, without nested blocks.
    #[must_use]
    pub fn head(&self) -> String {
        match self {
            StmtKind::Inhale(a) => format!("inhale {a}"),
            StmtKind::Exhale(a) => format!("exhale {a}"),
            StmtKind::Assert(a) => format!("assert {a}"),
            StmtKind::Var(n, t, None) => format!("var {n}: {}", t.name()),
            StmtKind::Var(n, t, Some(e)) => format!("var {n}: {} := {}", t.name(), print_expr(e)),
            StmtKind::Assign(n, e) => format!("{n} := {}", print_expr(e)),
            StmtKind::Write(r, f, e) => format!("{}.{f} := {}", print_expr(r), print_expr(e)),
            StmtKind::If(b, _, _) => format!("if ({})", print_expr(b)),
            StmtKind::Package(w, _) => format!("package {w}"),
            StmtKind::Apply(w) => format!("apply {w}"),
        }
    }
}

fn print_block(stmts: &[Stmt], ind: usize, out: &mut String) {
    let pad = " ".repeat(ind);
    for s in stmts {
        match &s.kind {
            StmtKind::If(b, t, e) => {
                let _ = writeln!(out, "{pad}if ({}) {{", print_expr(b));
                print_block(t, ind + 4, out);
                if e.is_empty() {
                    let _ = writeln!(out, "{pad}}}");
                } else {
                    let _ = writeln!(out, "{pad}}} else {{");
                    print_block(e, ind + 4, out);
                    let _ = writeln!(out, "{pad}}}");
                }
            }
            StmtKind::Package(w, script) if !script.is_empty() => {
                let _ = writeln!(out, "{pad}package {w} {{");
                for st in &script.0 {
                    let _ = writeln!(out, "{pad}    {st}");
                }
                let _ = writeln!(out, "{pad}}}");
            }
            k => {
                let _ = writeln!(out, "{pad}{}", k.head());
            }
        }
    }
}

/// Prints a program in the concrete syntax accepted by the parser.
#[must_use]
pub fn print_program(p: &Program) -> String {
    let mut out = format!("{}\nuniverse \"{}\"\n", super::PROGRAM_HEADER, p.universe_path);
    for (f, t) in &p.fields {
        let _ = writeln!(out, "field {f}: {}", t.name());
    }
    for m in &p.methods {
        let params: Vec<String> = m.params.iter().map(|(n, t)| format!("{n}: {}", t.name())).collect();
        let _ = writeln!(out, "\nmethod {}({})", m.name, params.join(", "));
        for r in &m.requires {
            let _ = writeln!(out, "    requires {r}");
        }
        out.push_str("{\n");
        print_block(&m.body, 4, &mut out);
        out.push_str("}\n");
    }
    out
}
