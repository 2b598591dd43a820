//! Program parser.
//!
//! ```text
//! program := "wandpack-program 1" "universe" STRING field* method*
//! field   := "field" IDENT ":" type
//! method  := "method" IDENT "(" (IDENT ":" type),* ")" ("requires" A)* block
//! block   := "{" (stmt ";"?)* "}"
//! stmt    := "inhale" A | "exhale" A | "assert" A
//!          | "var" IDENT ":" type (":=" e)? | IDENT ":=" e | e "." IDENT ":=" e
//!          | "if" "(" e ")" block ("else" (block | stmt))?
//!          | "package" W block? | "apply" W
//! type    := "Ref" | "Int" | "Bool"
//! ```
//! Parameters are references and are bound to the universe object of the same name.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use super::ast::{Method, Program, Stmt, StmtKind};
use super::PROGRAM_HEADER;
use crate::algorithms::{script_at, ProofScript, ScriptStmt};
use crate::assertions::{assertion_at, check_wf, expr_at, Assertion, Expr};
use crate::state_model::{FieldType, Name, Universe};
use crate::syntax::{Cursor, Pos, SyntaxError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProgramError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("type error at {pos}: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("{0}")]
    Load(String),
}

fn type_err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ProgramError> {
    Err(ProgramError::Type { pos, msg: msg.into() })
}

/// Reads a program and the universe it names (relative to the program's directory).
pub fn load_program(path: &Path) -> Result<Program, ProgramError> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| ProgramError::Load(format!("cannot read {}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_program(&src, |name| {
        let full = dir.join(name);
        let text = std::fs::read_to_string(&full).map_err(|e| format!("cannot read {}: {e}", full.display()))?;
        Universe::parse(&text).map_err(|e| format!("{}: {e}", full.display()))
    })
}

/// Parses program text; `load` resolves the universe reference.
pub fn parse_program(src: &str, load: impl Fn(&str) -> Result<Universe, String>) -> Result<Program, ProgramError> {
    // The header is checked on raw text and blanked so that positions stay put.
    let mut body = String::with_capacity(src.len());
    let mut saw_header = false;
    for line in src.split_inclusive('\n') {
        let t = line.trim();
        if !saw_header && !t.is_empty() && !t.starts_with("//") {
            if t != PROGRAM_HEADER {
                return Err(ProgramError::Syntax(SyntaxError {
                    pos: Pos { line: 1, col: 1 },
                    msg: format!("expected header `{PROGRAM_HEADER}`"),
                }));
            }
            saw_header = true;
            body.push_str(&" ".repeat(line.trim_end_matches('\n').len()));
            if line.ends_with('\n') {
                body.push('\n');
            }
            continue;
        }
        body.push_str(line);
    }
    if !saw_header {
        return Err(ProgramError::Syntax(SyntaxError {
            pos: Pos { line: 1, col: 1 },
            msg: format!("expected header `{PROGRAM_HEADER}`"),
        }));
    }
    let mut c = Cursor::new(&body)?;
    c.expect_kw("universe")?;
    let upos = c.pos();
    let universe_path = match c.bump() {
        crate::syntax::Tok::Str(s) => s,
        t => return Err(SyntaxError { pos: upos, msg: format!("expected a quoted universe path, found {t}") }.into()),
    };
    let universe = load(&universe_path).map_err(ProgramError::Load)?;
    let mut p = Program { universe_path, universe, fields: Vec::new(), methods: Vec::new() };
    while c.is_kw("field") {
        let pos = c.pos();
        c.bump();
        let f = Name::new(&c.ident()?);
        c.expect_sym(":")?;
        let t = ty(&mut c)?;
        match p.universe.fields.get(&f) {
            Some(ut) if *ut == t => {}
            Some(ut) => return type_err(pos, format!("field `{f}` has type {} in the universe", ut.name())),
            None => return type_err(pos, format!("field `{f}` is not declared by the universe")),
        }
        p.fields.push((f, t));
    }
    while !c.at_eof() {
        let m = method(&mut c, &p.universe)?;
        if p.methods.iter().any(|o| o.name == m.name) {
            return type_err(m.pos, format!("duplicate method `{}`", m.name));
        }
        p.methods.push(m);
    }
    Ok(p)
}

fn ty(c: &mut Cursor) -> Result<FieldType, ProgramError> {
    let pos = c.pos();
    let t = c.ident()?;
    FieldType::parse(&t).map_err(|msg| ProgramError::Type { pos, msg })
}

struct Scope<'u> {
    universe: &'u Universe,
    frames: Vec<BTreeSet<Name>>,
}

impl Scope<'_> {
    fn declared(&self, n: &Name) -> bool {
        self.frames.iter().any(|f| f.contains(n))
    }

    fn declare(&mut self, n: Name, pos: Pos) -> Result<(), ProgramError> {
        if self.declared(&n) {
            return type_err(pos, format!("`{n}` is already declared"));
        }
        self.frames.last_mut().expect("scope frame").insert(n);
        Ok(())
    }

    fn check_expr(&self, e: &Expr, pos: Pos) -> Result<(), ProgramError> {
        let mut bad = None;
        e.visit(&mut |x| {
            if bad.is_some() {
                return;
            }
            match x {
                Expr::Var(n) if !self.declared(n) && !self.universe.is_ref(n) => {
                    bad = Some(format!("unknown identifier `{n}`"));
                }
                Expr::Field(_, f) | Expr::PermOf(_, f) if !self.universe.fields.contains_key(f) => {
                    bad = Some(format!("unknown field `{f}`"));
                }
                _ => {}
            }
        });
        match bad {
            Some(m) => type_err(pos, m),
            None => Ok(()),
        }
    }

    fn check_assertion(&self, a: &Assertion, pos: Pos) -> Result<(), ProgramError> {
        let mut res = Ok(());
        a.visit_exprs(&mut |e| {
            if res.is_ok() {
                res = self.check_expr(e, pos);
            }
        });
        res?;
        self.check_preds(a, pos)
    }

    fn check_preds(&self, a: &Assertion, pos: Pos) -> Result<(), ProgramError> {
        match a {
            Assertion::Star(x, y) | Assertion::Or(x, y) | Assertion::Wand(x, y, _) => {
                self.check_preds(x, pos)?;
                self.check_preds(y, pos)
            }
            Assertion::Imp(_, x) => self.check_preds(x, pos),
            Assertion::Pred(n, args, _) => match self.universe.predicates.get(n) {
                Some(d) if d.params.len() == args.len() => Ok(()),
                Some(d) => type_err(pos, format!("predicate `{n}` takes {} arguments", d.params.len())),
                None => type_err(pos, format!("unknown predicate `{n}`")),
            },
            Assertion::Acc(_, f, _) if !self.universe.fields.contains_key(f) => {
                type_err(pos, format!("unknown field `{f}`"))
            }
            Assertion::Pure(_) | Assertion::Acc(..) => Ok(()),
        }
    }

    fn check_wand(&self, w: &Assertion, pos: Pos, what: &str) -> Result<(), ProgramError> {
        let Some((l, r, _)) = w.as_wand() else {
            return type_err(pos, format!("`{what}` expects a wand, found `{w}`"));
        };
        self.check_assertion(w, pos)?;
        check_wf(l).map_err(|e| ProgramError::Type { pos, msg: format!("wand left-hand side: {e}") })?;
        check_wf(r).map_err(|e| ProgramError::Type { pos, msg: format!("wand right-hand side: {e}") })
    }

    fn check_script(&self, s: &ProofScript, pos: Pos) -> Result<(), ProgramError> {
        for st in &s.0 {
            match st {
                ScriptStmt::Assert(a) | ScriptStmt::Fold(a) | ScriptStmt::Unfold(a) => self.check_assertion(a, pos)?,
                ScriptStmt::Apply(w) => self.check_wand(w, pos, "apply")?,
                ScriptStmt::If(b, t, e) => {
                    self.check_expr(b, pos)?;
                    self.check_script(t, pos)?;
                    self.check_script(e, pos)?;
                }
            }
        }
        Ok(())
    }
}

fn method(c: &mut Cursor, u: &Universe) -> Result<Method, ProgramError> {
    let pos = c.pos();
    c.expect_kw("method")?;
    let name = Name::new(&c.ident()?);
    c.expect_sym("(")?;
    let mut scope = Scope { universe: u, frames: vec![BTreeSet::new()] };
    let mut params = Vec::new();
    if !c.is_sym(")") {
        loop {
            let ppos = c.pos();
            let n = Name::new(&c.ident()?);
            c.expect_sym(":")?;
            let t = ty(c)?;
            if t != FieldType::Ref || !u.is_ref(&n) {
                return type_err(ppos, format!("parameter `{n}` must be a Ref named after a universe object"));
            }
            scope.declare(n.clone(), ppos)?;
            params.push((n, t));
            if !c.eat_sym(",") {
                break;
            }
        }
    }
    c.expect_sym(")")?;
    let mut requires = Vec::new();
    while c.is_kw("requires") {
        let rpos = c.pos();
        c.bump();
        let a = assertion_at(c)?;
        scope.check_assertion(&a, rpos)?;
        requires.push(a);
    }
    let body = block(c, &mut scope)?;
    Ok(Method { name, params, requires, body, pos })
}

fn block(c: &mut Cursor, scope: &mut Scope<'_>) -> Result<Vec<Stmt>, ProgramError> {
    c.expect_sym("{")?;
    scope.frames.push(BTreeSet::new());
    let mut out = Vec::new();
    loop {
        while c.eat_sym(";") {}
        if c.eat_sym("}") {
            break;
        }
        if c.at_eof() {
            return Err(c.error("unterminated block").into());
        }
        out.push(stmt(c, scope)?);
    }
    scope.frames.pop();
    Ok(out)
}

fn stmt(c: &mut Cursor, scope: &mut Scope<'_>) -> Result<Stmt, ProgramError> {
    let pos = c.pos();
    let kind = if c.eat_kw("inhale") {
        let a = assertion_at(c)?;
        scope.check_assertion(&a, pos)?;
        StmtKind::Inhale(a)
    } else if c.eat_kw("exhale") {
        let a = assertion_at(c)?;
        scope.check_assertion(&a, pos)?;
        StmtKind::Exhale(a)
    } else if c.eat_kw("assert") {
        let a = assertion_at(c)?;
        scope.check_assertion(&a, pos)?;
        StmtKind::Assert(a)
    } else if c.eat_kw("var") {
        let n = Name::new(&c.ident()?);
        c.expect_sym(":")?;
        let t = ty(c)?;
        let init = if c.eat_sym(":=") {
            let e = expr_at(c)?;
            scope.check_expr(&e, pos)?;
            Some(e)
        } else {
            None
        };
        scope.declare(n.clone(), pos)?;
        StmtKind::Var(n, t, init)
    } else if c.eat_kw("if") {
        c.expect_sym("(")?;
        let b = expr_at(c)?;
        c.expect_sym(")")?;
        scope.check_expr(&b, pos)?;
        let t = block(c, scope)?;
        let e = if c.eat_kw("else") {
            if c.is_sym("{") {
                block(c, scope)?
            } else {
                vec![stmt(c, scope)?]
            }
        } else {
            Vec::new()
        };
        StmtKind::If(b, t, e)
    } else if c.eat_kw("package") {
        let w = assertion_at(c)?;
        scope.check_wand(&w, pos, "package")?;
        let script = if c.eat_sym("{") {
            let s = script_at(c)?;
            c.expect_sym("}")?;
            s
        } else {
            ProofScript::default()
        };
        scope.check_script(&script, pos)?;
        StmtKind::Package(w, script)
    } else if c.eat_kw("apply") {
        let w = assertion_at(c)?;
        scope.check_wand(&w, pos, "apply")?;
        StmtKind::Apply(w)
    } else {
        let target = expr_at(c)?;
        c.expect_sym(":=")?;
        let e = expr_at(c)?;
        scope.check_expr(&e, pos)?;
        match target {
            Expr::Var(n) => {
                if !scope.declared(&n) {
                    return type_err(pos, format!("assignment to undeclared variable `{n}`"));
                }
                StmtKind::Assign(n, e)
            }
            Expr::Field(r, f) => {
                scope.check_expr(&r, pos)?;
                StmtKind::Write(*r, f, e)
            }
            other => return type_err(pos, format!("cannot assign to `{}`", crate::assertions::print_expr(&other))),
        }
    };
    Ok(Stmt { pos, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::print_program;

    const U1: &str = include_str!("../../corpus/u1.universe");
    const U3: &str = include_str!("../../corpus/u3.universe");

    fn load(name: &str) -> Result<Universe, String> {
        let text = match name {
            "u1.universe" => U1,
            "u3.universe" => U3,
            _ => return Err(format!("unknown universe {name}")),
        };
        Universe::parse(text).map_err(|e| e.to_string())
    }

    #[test]
    fn printed_programs_parse_back() {
        for src in [
            include_str!("../../corpus/fia_unsound.wnd"),
            include_str!("../../corpus/branches.wnd"),
            include_str!("../../corpus/basics.wnd"),
            include_str!("../../corpus/fold.wnd"),
        ] {
            let p = parse_program(src, load).unwrap();
            let printed = print_program(&p);
            let q = parse_program(&printed, load).unwrap();
            assert_eq!(print_program(&q), printed);
            assert_eq!(p.methods.len(), q.methods.len());
        }
    }

    #[test]
    fn scope_errors_are_reported() {
        let bad = [
            "method m(x: Ref) { assert acc(w.f) }",
            "method m(x: Ref) { package acc(x.f) }",
            "method m(x: Ref) { assert Q(x) }",
            "method m(x: Int) { }",
            "method m(x: Ref) { assert acc(x.h) }",
        ];
        for body in bad {
            let src = format!("wandpack-program 1\nuniverse \"u1.universe\"\n{body}\n");
            assert!(parse_program(&src, load).is_err(), "accepted: {body}");
        }
    }

    #[test]
    fn missing_header_is_a_syntax_error() {
        assert!(matches!(parse_program("universe \"u1.universe\"\n", load), Err(ProgramError::Syntax(_))));
    }
}
