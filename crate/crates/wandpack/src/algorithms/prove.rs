//! Proof search for the right-hand side.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::PackageError;
use crate::assertions::{demands, sat, Assertion, EvalCtx, Expr, Store, WandKind};
use crate::package_logic::{
    extend_pairs, extract_footprint, pc_holds, Choice, Context, Derivation, WitnessPair, WitnessSet,
};
use crate::state_model::{Perm, ResourceId, State, Universe};

/// Shared inputs of the search.
#[derive(Clone, Copy)]
pub struct Engine<'a> {
    pub universe: &'a Universe,
    pub store: &'a Store,
    /// Selects the lifted Extract.
    pub kind: WandKind,
}

fn fail<T>(msg: String) -> Result<T, PackageError> {
    Err(PackageError(msg))
}

impl<'a> Engine<'a> {
    #[must_use]
    pub fn new(universe: &'a Universe, store: &'a Store, kind: WandKind) -> Self {
        Engine { universe, store, kind }
    }

    fn lifted(&self) -> bool {
        self.kind == WandKind::Combinable
    }

    pub(crate) fn pc(&self, pc: &[Expr], p: &WitnessPair) -> Result<bool, PackageError> {
        pc_holds(pc, p, self.store)
            .map_err(|e| PackageError(format!("path condition for pair ({}, {}): {e}", p.a, p.b)))
    }

    /// Heap-closing context for a pair.
    pub(crate) fn joint(&self, p: &WitnessPair) -> Result<State, PackageError> {
        p.joint().ok_or_else(|| PackageError(format!("incompatible pair ({}, {})", p.a, p.b)))
    }

    /// The Extract rule applied to a context.
    pub fn extract(&self, ctx: Context, w: &State) -> Result<Context, PackageError> {
        let outer = ctx.outer.sub(w).map_err(|e| PackageError(e.to_string()))?;
        let pairs = extend_pairs(&ctx.pairs, &ctx.extracted, w, self.lifted())?;
        let extracted = ctx.extracted.add(w).ok_or_else(|| PackageError("extracted footprint overflows".into()))?;
        Ok(Context { outer, pairs, extracted })
    }

    /// The first demand of `b` covered by the pair's `σ_A`, if any.
    pub(crate) fn covered(&self, b: &Assertion, p: &WitnessPair) -> Result<Option<State>, PackageError> {
        let joint = self.joint(p)?;
        let ds = demands(b, &EvalCtx::new(joint.heap(), self.store), false).unwrap_or_default();
        Ok(ds.into_iter().find(|d| p.a.geq(d)))
    }

    /// Proves `b` for every pair satisfying `pc`, extracting from the outer state as needed.
    pub fn prove_rhs(&self, ctx: Context, pc: &[Expr], b: &Assertion) -> Result<(Context, Derivation), PackageError> {
        match b {
            Assertion::Star(x, y) => {
                let (c1, d1) = self.prove_rhs(ctx, pc, x)?;
                let (c2, d2) = self.prove_rhs(c1, pc, y)?;
                Ok((c2, Derivation::star(d1, d2)))
            }
            Assertion::Imp(g, x) => {
                let mut pc = pc.to_vec();
                pc.push(g.clone());
                let (c, d) = self.prove_rhs(ctx, &pc, x)?;
                Ok((c, Derivation::implication(d)))
            }
            Assertion::Pure(_) => {
                for p in &ctx.pairs {
                    if self.pc(pc, p)? && !sat(&self.joint(p)?.core(), b, self.store) {
                        return fail(format!("`{b}` does not hold for the left-hand side state {}", p.a));
                    }
                }
                Ok((ctx, Derivation::Atom(Vec::new())))
            }
            Assertion::Or(x, y) => self.prove_or(ctx, pc, b, x, y),
            Assertion::Acc(..) | Assertion::Pred(..) | Assertion::Wand(..) => self.prove_resource(ctx, pc, b),
        }
    }

    /// Applies the Atom rule with the first covered demand per pair, or returns a pair
    /// whose `σ_A` covers no demand.
    fn atom(
        &self,
        ctx: &Context,
        pc: &[Expr],
        b: &Assertion,
    ) -> Result<Result<(Context, Derivation), WitnessPair>, PackageError> {
        let mut choices = Vec::new();
        let mut pairs = WitnessSet::new();
        for p in &ctx.pairs {
            if !self.pc(pc, p)? {
                pairs.insert(p.clone());
                continue;
            }
            let Some(d) = self.covered(b, p)? else {
                return Ok(Err(p.clone()));
            };
            let a = p.a.sub(&d).map_err(|e| PackageError(e.to_string()))?;
            let nb = p.b.add(&d).ok_or_else(|| PackageError(format!("choice {d} overflows {}", p.b)))?;
            if !d.is_unit() {
                choices.push(Choice { a: p.a.clone(), b: p.b.clone(), choice: d });
            }
            pairs.insert(WitnessPair::new(a, nb, p.t.clone()));
        }
        let ctx = Context { outer: ctx.outer.clone(), pairs, extracted: ctx.extracted.clone() };
        Ok(Ok((ctx, Derivation::Atom(choices))))
    }

    fn prove_resource(&self, ctx: Context, pc: &[Expr], b: &Assertion) -> Result<(Context, Derivation), PackageError> {
        if let Ok(done) = self.atom(&ctx, pc, b)? {
            return Ok(done);
        }
        // Per resource, the largest shortfall over the pairs that need it.
        let mut need: BTreeMap<ResourceId, Perm> = BTreeMap::new();
        for p in &ctx.pairs {
            if !self.pc(pc, p)? {
                continue;
            }
            let joint = self.joint(p)?;
            let ds = demands(b, &EvalCtx::new(joint.heap(), self.store), false).unwrap_or_default();
            let Some(d) = ds.first() else {
                return fail(format!("`{b}` cannot hold for the left-hand side state {}", p.a));
            };
            for (r, amount) in d.mask() {
                let short = *amount - p.a.perm(r);
                if short > Perm::zero() {
                    let e = need.entry(r.clone()).or_insert_with(Perm::zero);
                    if short > *e {
                        *e = short;
                    }
                }
            }
        }
        let mut w = State::unit();
        for (r, amount) in &need {
            if ctx.outer.perm(r) < *amount {
                return fail(format!(
                    "insufficient permission for `{b}`: needs {} of {r}, the current state holds {}",
                    crate::state_model::fmt_perm(amount),
                    crate::state_model::fmt_perm(&ctx.outer.perm(r))
                ));
            }
            w.set_perm(r.clone(), *amount);
            if let ResourceId::Field(l) = r {
                let v =
                    ctx.outer.value(l).ok_or_else(|| PackageError(format!("no value for {l} in the current state")))?;
                w.set_value(l.clone(), v.clone());
            }
        }
        let ctx = self.extract(ctx, &w)?;
        match self.atom(&ctx, pc, b)? {
            Ok((ctx, d)) => Ok((ctx, Derivation::extract(w, d))),
            Err(p) => {
                fail(format!("combining the current state with {} does not cover `{b}` (after extracting {w})", p.a))
            }
        }
    }

    fn prove_or(
        &self,
        ctx: Context,
        pc: &[Expr],
        b: &Assertion,
        x: &Assertion,
        y: &Assertion,
    ) -> Result<(Context, Derivation), PackageError> {
        if let Ok(done) = self.atom(&ctx, pc, b)? {
            return Ok(done);
        }
        // Each pair goes to the leftmost disjunct it already covers, otherwise to the left.
        let mut left = WitnessSet::new();
        let mut right = WitnessSet::new();
        for p in &ctx.pairs {
            let go_right = self.pc(pc, p)? && self.covered(x, p)?.is_none() && self.covered(y, p)?.is_some();
            if go_right {
                right.insert(p.clone());
            } else {
                left.insert(p.clone());
            }
        }
        let keys: Vec<(State, State)> = left.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
        let outer0 = ctx.outer.clone();
        let f0 = ctx.extracted.clone();
        let (c1, d1) = self.prove_rhs(Context { outer: outer0.clone(), pairs: left, extracted: f0.clone() }, pc, x)?;
        let w1 = extract_footprint(&outer0, &c1.outer)?;
        let right = extend_pairs(&right, &f0, &w1, self.lifted())?;
        let (c2, d2) =
            self.prove_rhs(Context { outer: c1.outer.clone(), pairs: right, extracted: c1.extracted.clone() }, pc, y)?;
        let w2 = extract_footprint(&c1.outer, &c2.outer)?;
        let mut pairs = extend_pairs(&c1.pairs, &c1.extracted, &w2, self.lifted())?;
        pairs.extend(c2.pairs);
        let d = Derivation::Disjunction { left: keys, a: Box::new(d1), b: Box::new(d2) };
        Ok((Context { outer: c2.outer, pairs, extracted: c2.extracted }, d))
    }
}
