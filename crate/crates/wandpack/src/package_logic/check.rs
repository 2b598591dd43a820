//! Re-validation of derivations, premise by premise.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{Configuration, Context, Derivation, WitnessPair, WitnessSet};
use crate::assertions::{sat, Assertion, EvalCtx, EvalError, Expr, Store};
use crate::state_model::State;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{rule} at {path}: {msg}")]
pub struct CheckError {
    pub rule: &'static str,
    /// Position in the tree, e.g. `root.extract.star[1].atom`.
    pub path: String,
    pub msg: String,
}

/// `σ_0 ⊖ σ_1` restricted to positively held resources: what was extracted.
pub fn extract_footprint(initial: &State, final_: &State) -> Result<State, String> {
    initial.sub(final_).map(|s| s.stable_part()).map_err(|e| e.to_string())
}

/// Evaluates a path condition on the heap of `σ_A ⊕ σ_B`; conjuncts are read left to right.
pub fn pc_holds(pc: &[Expr], pair: &WitnessPair, store: &Store) -> Result<bool, EvalError> {
    let joint = pair.joint().unwrap_or_else(|| pair.a.clone());
    let ctx = EvalCtx::new(joint.heap(), store);
    for b in pc {
        if !ctx.eval_bool(b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Adds the (transformed) part of `w` to every pair compatible with it, dropping the rest.
///
/// `before` is the footprint extracted prior to `w`; it only matters for the lifted logic.
pub fn extend_pairs(pairs: &WitnessSet, before: &State, w: &State, lifted: bool) -> Result<WitnessSet, String> {
    let after = before.add(w).ok_or_else(|| format!("footprint so far {before} is incompatible with {w}"))?;
    let mut out = WitnessSet::new();
    for p in pairs {
        let delta = if lifted {
            let (hi, lo) = (p.t.apply(&after), p.t.apply(before));
            hi.sub(&lo).map_err(|e| format!("transformer is not monotonic: {e}"))?
        } else {
            w.clone()
        };
        let Some(joint) = p.joint() else { return Err(format!("pair ({}, {}) is not compatible", p.a, p.b)) };
        if joint.compatible(&delta) {
            let a = p.a.add(&delta).expect("σ_A is compatible with delta whenever σ_A ⊕ σ_B is");
            out.insert(WitnessPair::new(a, p.b.clone(), p.t.clone()));
        }
    }
    Ok(out)
}

struct Checker<'a> {
    store: &'a Store,
    lifted: bool,
}

/// Checks a derivation of the standard logic; transformers on the pairs are ignored.
pub fn check_derivation(conf: &Configuration, d: &Derivation) -> Result<Context, CheckError> {
    Checker { store: &conf.store, lifted: false }.go(&conf.rhs, &conf.pc, conf.ctx.clone(), d, "root")
}

/// Checks a derivation of the lifted logic: Extract adds `t(σ_f ⊕ σ_w) ⊖ t(σ_f)` per pair.
pub fn check_derivation_lifted(conf: &Configuration, d: &Derivation) -> Result<Context, CheckError> {
    Checker { store: &conf.store, lifted: true }.go(&conf.rhs, &conf.pc, conf.ctx.clone(), d, "root")
}

fn err(rule: &'static str, path: &str, msg: impl Into<String>) -> CheckError {
    CheckError { rule, path: path.to_string(), msg: msg.into() }
}

impl Checker<'_> {
    fn go(&self, b: &Assertion, pc: &[Expr], ctx: Context, d: &Derivation, path: &str) -> Result<Context, CheckError> {
        match d {
            Derivation::Extract { w, child } => {
                let path = format!("{path}.extract");
                let ctx = self.extract(ctx, w, &path)?;
                self.go(b, pc, ctx, child, &path)
            }
            Derivation::Star(d1, d2) => {
                let Assertion::Star(b1, b2) = b else {
                    return Err(err("Star", path, format!("`{b}` is not a separating conjunction")));
                };
                let ctx = self.go(b1, pc, ctx, d1, &format!("{path}.star[0]"))?;
                self.go(b2, pc, ctx, d2, &format!("{path}.star[1]"))
            }
            Derivation::Implication(child) => {
                let Assertion::Imp(g, body) = b else {
                    return Err(err("Implication", path, format!("`{b}` is not an implication")));
                };
                let mut pc = pc.to_vec();
                pc.push(g.clone());
                self.go(body, &pc, ctx, child, &format!("{path}.implication"))
            }
            Derivation::Atom(choices) => self.atom(b, pc, ctx, choices, &format!("{path}.atom")),
            Derivation::Disjunction { left, a, b: db } => {
                let Assertion::Or(b1, b2) = b else {
                    return Err(err("Disjunction", path, format!("`{b}` is not a disjunction")));
                };
                self.disjunction(b1, b2, pc, ctx, left, a, db, &format!("{path}.disjunction"))
            }
        }
    }

    fn extract(&self, ctx: Context, w: &State, path: &str) -> Result<Context, CheckError> {
        if !w.is_stable() {
            return Err(err("Extract", path, format!("σ_w = {w} is not stable")));
        }
        let outer = ctx
            .outer
            .sub(w)
            .map_err(|_| err("Extract", path, format!("outer state {} does not contain σ_w = {w}", ctx.outer)))?;
        let pairs = extend_pairs(&ctx.pairs, &ctx.extracted, w, self.lifted).map_err(|m| err("Extract", path, m))?;
        let extracted = ctx.extracted.add(w).expect("checked by extend_pairs");
        Ok(Context { outer, pairs, extracted })
    }

    fn atom(
        &self,
        b: &Assertion,
        pc: &[Expr],
        ctx: Context,
        choices: &[super::Choice],
        path: &str,
    ) -> Result<Context, CheckError> {
        if !b.is_atom() {
            return Err(err("Atom", path, format!("`{b}` is not an atom")));
        }
        for c in choices {
            if !ctx.pairs.iter().any(|p| p.a == c.a && p.b == c.b) {
                return Err(err("Atom", path, format!("choice for unknown pair ({}, {})", c.a, c.b)));
            }
        }
        let mut out = WitnessSet::new();
        for p in &ctx.pairs {
            let holds = pc_holds(pc, p, self.store)
                .map_err(|e| err("Atom", path, format!("path condition on ({}, {}): {e}", p.a, p.b)))?;
            if !holds {
                out.insert(p.clone());
                continue;
            }
            let choice =
                choices.iter().find(|c| c.a == p.a && c.b == p.b).map_or_else(State::unit, |c| c.choice.clone());
            if !p.a.geq(&choice) {
                return Err(err("Atom", path, format!("choice {choice} is not below σ_A = {}", p.a)));
            }
            let joint = p.joint().ok_or_else(|| err("Atom", path, "incompatible pair"))?;
            let probe =
                choice.add(&joint.core()).ok_or_else(|| err("Atom", path, "choice disagrees with the pair's heap"))?;
            if !sat(&probe, b, self.store) {
                return Err(err(
                    "Atom",
                    path,
                    format!("choice {choice} does not satisfy `{b}` for pair ({}, {})", p.a, p.b),
                ));
            }
            let a = p.a.sub(&choice).expect("checked above");
            let bb = p.b.add(&choice).ok_or_else(|| err("Atom", path, "σ_B ⊕ choice is undefined"))?;
            out.insert(WitnessPair::new(a, bb, p.t.clone()));
        }
        Ok(Context { pairs: out, ..ctx })
    }

    #[allow(clippy::too_many_arguments)]
    fn disjunction(
        &self,
        b1: &Assertion,
        b2: &Assertion,
        pc: &[Expr],
        ctx: Context,
        left: &[(State, State)],
        d1: &Derivation,
        d2: &Derivation,
        path: &str,
    ) -> Result<Context, CheckError> {
        let keys: BTreeSet<(&State, &State)> = left.iter().map(|(a, b)| (a, b)).collect();
        for (a, b) in &keys {
            if !ctx.pairs.iter().any(|p| &&p.a == a && &&p.b == b) {
                return Err(err("Disjunction", path, format!("left pair ({a}, {b}) is not in the witness set")));
            }
        }
        let (s1, sb): (WitnessSet, WitnessSet) = ctx.pairs.iter().cloned().partition(|p| keys.contains(&(&p.a, &p.b)));
        let c1 = self.go(
            b1,
            pc,
            Context { outer: ctx.outer.clone(), pairs: s1, extracted: ctx.extracted.clone() },
            d1,
            &format!("{path}[0]"),
        )?;
        let w1 = extract_footprint(&ctx.outer, &c1.outer).map_err(|m| err("Disjunction", path, m))?;
        let sb = extend_pairs(&sb, &ctx.extracted, &w1, self.lifted).map_err(|m| err("Disjunction", path, m))?;
        let c2 = self.go(
            b2,
            pc,
            Context { outer: c1.outer.clone(), pairs: sb, extracted: c1.extracted.clone() },
            d2,
            &format!("{path}[1]"),
        )?;
        let w2 = extract_footprint(&c1.outer, &c2.outer).map_err(|m| err("Disjunction", path, m))?;
        let s1 = extend_pairs(&c1.pairs, &c1.extracted, &w2, self.lifted).map_err(|m| err("Disjunction", path, m))?;
        let mut pairs = s1;
        pairs.extend(c2.pairs);
        Ok(Context { outer: c2.outer, pairs, extracted: c2.extracted })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_assertion;
    use crate::package_logic::{Choice, Transformer};

    fn st(s: &str) -> State {
        State::parse(s).unwrap()
    }

    fn conf(rhs: &str, outer: &str, pairs: &[&str]) -> Configuration {
        let pairs = pairs.iter().map(|a| WitnessPair::new(st(a), State::unit(), Transformer::Identity)).collect();
        Configuration {
            rhs: parse_assertion(rhs).unwrap(),
            pc: vec![],
            ctx: Context::new(st(outer), pairs),
            store: Store::new(),
        }
    }

    #[test]
    fn atom_rejects_choice_not_below_lhs_state() {
        let c = conf("acc(y.g)", "{}", &["{x.f@1=y}"]);
        let d = Derivation::Atom(vec![Choice { a: st("{x.f@1=y}"), b: State::unit(), choice: st("{y.g@1=0}") }]);
        let e = check_derivation(&c, &d).unwrap_err();
        assert_eq!(e.rule, "Atom");
    }

    #[test]
    fn extract_rejects_unstable_state() {
        let c = conf("true", "{y.g@1=0}", &[]);
        let d = Derivation::extract(st("{y.g@0=0}"), Derivation::Atom(vec![]));
        assert_eq!(check_derivation(&c, &d).unwrap_err().rule, "Extract");
    }

    #[test]
    fn extract_drops_exactly_the_incompatible_pairs() {
        let c = conf("true", "{x.b@1=false}", &["{x.b@1/2=true}", "{x.b@1/2=false}"]);
        let d = Derivation::extract(st("{x.b@1/2=false}"), Derivation::Atom(vec![]));
        let out = check_derivation(&c, &d).unwrap();
        let firsts: Vec<State> = out.pairs.iter().map(|p| p.a.clone()).collect();
        assert_eq!(firsts, vec![st("{x.b@1=false}")]);
        assert_eq!(out.outer, st("{x.b@1/2=false}"));
        assert_eq!(out.extracted, st("{x.b@1/2=false}"));
    }

    #[test]
    fn lifted_extract_adds_the_restricted_delta() {
        let mut c = conf("true", "{x.f@1=0}", &[]);
        c.ctx.pairs.insert(WitnessPair::new(
            st("{x.f@1/2=0}"),
            State::unit(),
            Transformer::CombinableR(st("{x.f@1/2=0}")),
        ));
        let d = Derivation::extract(st("{x.f@1=0}"), Derivation::Atom(vec![]));
        let out = check_derivation_lifted(&c, &d).unwrap();
        assert_eq!(out.pairs.iter().next().unwrap().a, st("{x.f@1=0}"));
        // The standard logic drops the same pair instead.
        assert!(check_derivation(&c, &d).unwrap().pairs.is_empty());
    }

    #[test]
    fn footprint_of_unchanged_state_is_unit() {
        let s = st("{x.f@1=y, y.g@0=0}");
        assert_eq!(extract_footprint(&s, &s).unwrap(), State::unit());
        assert_eq!(
            extract_footprint(&st("{y.g@1=0, z.g@1=0}"), &st("{y.g@0=0, z.g@0=0}")).unwrap(),
            st("{y.g@1=0, z.g@1=0}")
        );
    }
}
