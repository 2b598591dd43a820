//! Proof scripts: the ghost operations run inside a package block.
//!
//! ```text
//! script := (stmt ";"?)*
//! stmt   := "assert" A | "fold" P(args) | "unfold" P(args) | "apply" W
//!         | "if" "(" e ")" "{" script "}" ("else" "{" script "}")?
//! ```
//! A predicate amount is written `acc(P(x), 1/2)`.

use std::fmt;

use super::{Engine, PackageError};
use crate::assertions::{assertion_at, expr_at, minimal_models_from, pred_resource, Assertion, EvalCtx, Expr};
use crate::package_logic::{extract_footprint, Context, WitnessPair, WitnessSet};
use crate::state_model::State;
use crate::syntax::{Cursor, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptStmt {
    Assert(Assertion),
    Fold(Assertion),
    Unfold(Assertion),
    Apply(Assertion),
    If(Expr, ProofScript, ProofScript),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProofScript(pub Vec<ScriptStmt>);

impl ProofScript {
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True if the script rewrites left-hand side states (fold, unfold or apply).
    #[must_use]
    pub fn rewrites(&self) -> bool {
        self.0.iter().any(|s| match s {
            ScriptStmt::Assert(_) => false,
            ScriptStmt::If(_, t, e) => t.rewrites() || e.rewrites(),
            _ => true,
        })
    }
}

impl fmt::Display for ScriptStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptStmt::Assert(a) => write!(f, "assert {a}"),
            ScriptStmt::Fold(a) => write!(f, "fold {a}"),
            ScriptStmt::Unfold(a) => write!(f, "unfold {a}"),
            ScriptStmt::Apply(a) => write!(f, "apply {a}"),
            ScriptStmt::If(b, t, e) => {
                write!(f, "if ({}) {{ {t} }}", crate::assertions::print_expr(b))?;
                if !e.is_empty() {
                    write!(f, " else {{ {e} }}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ProofScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Parses statements up to a closing `}` or the end of input.
pub fn script_at(c: &mut Cursor) -> Result<ProofScript, SyntaxError> {
    let mut out = Vec::new();
    loop {
        while c.eat_sym(";") {}
        if c.is_sym("}") || c.at_eof() {
            return Ok(ProofScript(out));
        }
        out.push(stmt_at(c)?);
    }
}

fn stmt_at(c: &mut Cursor) -> Result<ScriptStmt, SyntaxError> {
    if c.eat_kw("assert") {
        return Ok(ScriptStmt::Assert(assertion_at(c)?));
    }
    for kw in ["fold", "unfold"] {
        if c.is_kw(kw) {
            c.bump();
            let a = assertion_at(c)?;
            if !matches!(a, Assertion::Pred(..)) {
                return Err(c.error(&format!("`{kw}` expects a predicate instance")));
            }
            return Ok(if kw == "fold" { ScriptStmt::Fold(a) } else { ScriptStmt::Unfold(a) });
        }
    }
    if c.eat_kw("apply") {
        let a = assertion_at(c)?;
        if !matches!(a, Assertion::Wand(..)) {
            return Err(c.error("`apply` expects a wand"));
        }
        return Ok(ScriptStmt::Apply(a));
    }
    if c.eat_kw("if") {
        c.expect_sym("(")?;
        let b = expr_at(c)?;
        c.expect_sym(")")?;
        let t = block(c)?;
        let e = if c.eat_kw("else") { block(c)? } else { ProofScript::default() };
        return Ok(ScriptStmt::If(b, t, e));
    }
    Err(c.error(&format!("expected a script statement, found {}", c.peek())))
}

fn block(c: &mut Cursor) -> Result<ProofScript, SyntaxError> {
    c.expect_sym("{")?;
    let s = script_at(c)?;
    c.expect_sym("}")?;
    Ok(s)
}

pub fn parse_script(src: &str) -> Result<ProofScript, SyntaxError> {
    let mut c = Cursor::new(src)?;
    let s = script_at(&mut c)?;
    if !c.at_eof() {
        return Err(c.error(&format!("unexpected {}", c.peek())));
    }
    Ok(s)
}

/// What running a script did to the context.
pub(crate) struct ScriptRun {
    pub ctx: Context,
    /// Footprints moved out of the outer state, one per extracting statement.
    pub extracts: Vec<State>,
}

impl Engine<'_> {
    /// Extracts what proving `a` would, without consuming anything from the pairs.
    fn extract_for(
        &self,
        ctx: Context,
        pc: &[Expr],
        a: &Assertion,
        run: &mut Vec<State>,
    ) -> Result<Context, PackageError> {
        let (probe, _) = self.prove_rhs(ctx.clone(), pc, a)?;
        let w = extract_footprint(&ctx.outer, &probe.outer)?;
        if w.is_unit() {
            return Ok(ctx);
        }
        run.push(w.clone());
        self.extract(ctx, &w)
    }

    pub(crate) fn run_script(
        &self,
        ctx: Context,
        pc: &[Expr],
        script: &ProofScript,
    ) -> Result<ScriptRun, PackageError> {
        let mut run = ScriptRun { ctx, extracts: Vec::new() };
        for s in &script.0 {
            self.run_stmt(&mut run, pc, s)?;
        }
        Ok(run)
    }

    fn run_stmt(&self, run: &mut ScriptRun, pc: &[Expr], s: &ScriptStmt) -> Result<(), PackageError> {
        let ctx = std::mem::replace(&mut run.ctx, Context::new(State::unit(), WitnessSet::new()));
        run.ctx = match s {
            ScriptStmt::Assert(a) => self.extract_for(ctx, pc, a, &mut run.extracts)?,
            ScriptStmt::If(b, t, e) => {
                let mut pt = pc.to_vec();
                pt.push(b.clone());
                let mut pe = pc.to_vec();
                pe.push(Expr::negate(b.clone()));
                let mut inner = ScriptRun { ctx, extracts: std::mem::take(&mut run.extracts) };
                for s in &t.0 {
                    self.run_stmt(&mut inner, &pt, s)?;
                }
                for s in &e.0 {
                    self.run_stmt(&mut inner, &pe, s)?;
                }
                run.extracts = inner.extracts;
                inner.ctx
            }
            ScriptStmt::Fold(p) => {
                let Assertion::Pred(name, args, amount) = p else { unreachable!("parser checks fold") };
                let def = self
                    .universe
                    .predicates
                    .get(name)
                    .ok_or_else(|| PackageError(format!("unknown predicate `{name}`")))?;
                let body = def.instantiate(args).scale(*amount);
                let ctx = self.extract_for(ctx, pc, &body, &mut run.extracts)?;
                self.rewrite(ctx, pc, |p, joint| {
                    let d = self
                        .covered(&body, p)?
                        .ok_or_else(|| PackageError(format!("cannot fold {name}: body not held by {}", p.a)))?;
                    let r = pred_resource(name, args, &EvalCtx::new(joint.heap(), self.store))
                        .map_err(|e| PackageError(e.to_string()))?;
                    let a = p.a.sub(&d).map_err(|e| PackageError(e.to_string()))?;
                    let a = a
                        .add(&State::resource(r, *amount))
                        .ok_or_else(|| PackageError(format!("folding {name} exceeds full permission")))?;
                    Ok(vec![a])
                })?
            }
            ScriptStmt::Unfold(p) => {
                let Assertion::Pred(name, args, amount) = p else { unreachable!("parser checks unfold") };
                let def = self
                    .universe
                    .predicates
                    .get(name)
                    .ok_or_else(|| PackageError(format!("unknown predicate `{name}`")))?;
                let body = def.instantiate(args).scale(*amount);
                let ctx = self.extract_for(ctx, pc, p, &mut run.extracts)?;
                self.rewrite(ctx, pc, |pair, joint| {
                    let r = pred_resource(name, args, &EvalCtx::new(joint.heap(), self.store))
                        .map_err(|e| PackageError(e.to_string()))?;
                    let a = pair
                        .a
                        .sub(&State::resource(r, *amount))
                        .map_err(|_| PackageError(format!("cannot unfold {p}: instance not held by {}", pair.a)))?;
                    self.produce(&a, &body, joint)
                })?
            }
            ScriptStmt::Apply(w) => {
                let Assertion::Wand(lhs, rhs, _) = w else { unreachable!("parser checks apply") };
                let need = Assertion::star(w.clone(), (**lhs).clone());
                let ctx = self.extract_for(ctx, pc, &need, &mut run.extracts)?;
                self.rewrite(ctx, pc, |pair, joint| {
                    let d = self
                        .covered(&need, pair)?
                        .ok_or_else(|| PackageError(format!("cannot apply {w}: not held by {}", pair.a)))?;
                    let a = pair.a.sub(&d).map_err(|e| PackageError(e.to_string()))?;
                    self.produce(&a, rhs, joint)
                })?
            }
        };
        Ok(())
    }

    /// Every minimal way of adding `a` to `base`, reading values from `joint`.
    fn produce(&self, base: &State, a: &Assertion, joint: &State) -> Result<Vec<State>, PackageError> {
        let models =
            minimal_models_from(a, self.store, self.universe, joint.heap()).map_err(|e| PackageError(e.to_string()))?;
        Ok(models.iter().filter_map(|m| base.add(m)).collect())
    }

    /// Replaces `σ_A` of every pair under `pc` by the states `f` returns, dropping undefined pairs.
    fn rewrite(
        &self,
        ctx: Context,
        pc: &[Expr],
        f: impl Fn(&WitnessPair, &State) -> Result<Vec<State>, PackageError>,
    ) -> Result<Context, PackageError> {
        let mut pairs = WitnessSet::new();
        for p in &ctx.pairs {
            if !self.pc(pc, p)? {
                pairs.insert(p.clone());
                continue;
            }
            let joint = self.joint(p)?;
            for a in f(p, &joint)? {
                if a.compatible(&p.b) {
                    pairs.insert(WitnessPair::new(a, p.b.clone(), p.t.clone()));
                }
            }
        }
        Ok(Context { outer: ctx.outer, pairs, extracted: ctx.extracted })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_statements() {
        let s = parse_script(
            "assert acc(x.f); if (x.f == y) { fold acc(P(x), 1/2) } else { apply acc(x.f) --* acc(x.g) }; unfold P(x)",
        )
        .unwrap();
        assert_eq!(s.0.len(), 3);
        assert!(s.rewrites());
        let again = parse_script(&s.to_string()).unwrap();
        assert_eq!(again, s);
        assert!(!parse_script("assert acc(x.f)").unwrap().rewrites());
    }

    #[test]
    fn rejects_bad_statements() {
        assert!(parse_script("fold acc(x.f)").is_err());
        assert!(parse_script("apply acc(x.f)").is_err());
        assert!(parse_script("frobnicate").is_err());
    }
}
