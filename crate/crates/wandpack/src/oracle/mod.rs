//! Brute-force semantic ground truth over enumerated universes.
//!
//! Wand atoms are decided by their footprint definition, quantifying over the enumerated
//! states that satisfy the left-hand side; the combinable kind first transforms the
//! footprint with `R`. Everything else is decided by demand sets, whose agreement with
//! split enumeration is itself tested.

mod plan;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::assertions::{antichain, demands, sat, Assertion, EvalCtx, Expr, Store, WandKind};
use crate::state_model::{bin_state, mult, restrict, Perm, ResourceId, State, Universe};

pub use plan::{EnumerationPlan, DEFAULT_BUDGET};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration needs {needed} states, above the budget of {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("`{0}` is not a wand")]
    NotAWand(String),
}

/// A violation of `A^p * A^q ⊨ A^(p+q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinableCex {
    pub p: Perm,
    pub q: Perm,
    pub sigma: State,
}

/// Filters for [`Oracle::minimal_footprints`].
#[derive(Clone, Debug, Default)]
pub struct FootprintSearch {
    /// Only footprints below this state.
    pub within: Option<State>,
    /// Only footprints compatible with some state satisfying the left-hand side.
    pub nonvacuous: bool,
}

/// Semantic queries over one universe and store.
pub struct Oracle<'u> {
    pub universe: &'u Universe,
    pub store: Store,
    pub budget: u128,
    lhs_cache: Mutex<HashMap<String, Arc<Vec<State>>>>,
}

impl<'u> Oracle<'u> {
    #[must_use]
    pub fn new(universe: &'u Universe, store: Store) -> Self {
        Oracle { universe, store, budget: DEFAULT_BUDGET, lhs_cache: Mutex::new(HashMap::new()) }
    }

    /// Wands are interpreted semantically here, so wand instances get no column.
    fn plan(&self, xs: &[&Assertion]) -> EnumerationPlan<'u> {
        let mut plan = EnumerationPlan::new(self.universe).budget(self.budget).with_assertions(xs, &self.store);
        plan.extra.retain(|r| !matches!(r, ResourceId::Wand(_)));
        plan
    }

    /// Semantic satisfaction.
    pub fn sat(&self, sigma: &State, a: &Assertion) -> Result<bool, OracleError> {
        if !a.contains_wand() {
            return Ok(sat(sigma, a, &self.store));
        }
        match a {
            Assertion::Wand(l, r, k) => self.wand_holds(sigma, l, r, *k).map(|v| v.is_none()),
            Assertion::Or(x, y) => Ok(self.sat(sigma, x)? || self.sat(sigma, y)?),
            Assertion::Imp(b, x) => match EvalCtx::new(sigma.heap(), &self.store).eval_bool(b) {
                Ok(false) => Ok(true),
                Ok(true) => self.sat(sigma, x),
                Err(_) => Ok(false),
            },
            Assertion::Star(x, y) => self.sat_star(sigma, x, y),
            Assertion::Pure(_) | Assertion::Acc(..) | Assertion::Pred(..) => unreachable!("no wand inside"),
        }
    }

    /// All assertions here are intuitionistic, so a wand-free conjunct may take a minimal
    /// demand and leave everything else to its sibling. Two wand-carrying conjuncts fall
    /// back to enumerating mask splits over a shared heap.
    fn sat_star(&self, sigma: &State, x: &Assertion, y: &Assertion) -> Result<bool, OracleError> {
        let (plain, other) = match (x.contains_wand(), y.contains_wand()) {
            (false, _) => (x, y),
            (_, false) => (y, x),
            _ => {
                for (s1, s2) in mask_splits(sigma, self.universe.granularity) {
                    if self.sat(&s1, x)? && self.sat(&s2, y)? {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
        };
        let Ok(ds) = demands(plain, &EvalCtx::new(sigma.heap(), &self.store), false) else { return Ok(false) };
        for d in ds.iter().filter(|d| sigma.geq(d)) {
            let rest = sigma.sub(d).expect("geq checked");
            if self.sat(&rest, other)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Enumerated states satisfying the left-hand side of a wand (cached per wand). States
    /// holding permission to a location without a value for it are skipped, as heaps are total.
    pub fn lhs_states(&self, lhs: &Assertion, rhs: &Assertion) -> Result<Arc<Vec<State>>, OracleError> {
        let key = format!("{lhs} ## {rhs}");
        if let Some(v) = self.lhs_cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let states = self.plan(&[lhs, rhs]).states()?;
        let mut out = Vec::new();
        for s in states.into_iter().filter(State::is_valued) {
            if self.sat(&s, lhs)? {
                out.push(s);
            }
        }
        let v = Arc::new(out);
        self.lhs_cache.lock().expect("cache lock").insert(key, v.clone());
        Ok(v)
    }

    /// `None` when `σ_w` is a footprint, otherwise a left-hand-side state refuting it.
    fn wand_holds(
        &self,
        w: &State,
        lhs: &Assertion,
        rhs: &Assertion,
        kind: WandKind,
    ) -> Result<Option<State>, OracleError> {
        for a in self.lhs_states(lhs, rhs)?.iter() {
            let t = match kind {
                WandKind::Standard => w.clone(),
                WandKind::Combinable => restrict(a, w),
            };
            if let Some(joint) = a.add(&t) {
                if !self.sat(&joint, rhs)? {
                    return Ok(Some(a.clone()));
                }
            }
        }
        Ok(None)
    }

    /// States of the plan satisfying `a`, skipping states that hold a location without a value.
    pub fn sat_states(&self, a: &Assertion, stable_only: bool) -> Result<Vec<State>, OracleError> {
        let mut plan = self.plan(&[a]);
        plan.stable_only = stable_only;
        let mut out = Vec::new();
        for s in plan.states()?.into_iter().filter(State::is_valued) {
            if self.sat(&s, a)? {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// Whether `σ_w` is a footprint of the wand, under its own kind's semantics.
    pub fn is_footprint(&self, w: &State, wand: &Assertion) -> Result<bool, OracleError> {
        self.footprint_counterexample(w, wand).map(|c| c.is_none())
    }

    /// A left-hand-side state for which `σ_w` fails, if any.
    pub fn footprint_counterexample(&self, w: &State, wand: &Assertion) -> Result<Option<State>, OracleError> {
        let (l, r, k) = wand.as_wand().ok_or_else(|| OracleError::NotAWand(wand.to_string()))?;
        self.wand_holds(w, l, r, k)
    }

    /// ⪰-minimal stable footprints among the enumerated states.
    pub fn minimal_footprints(&self, wand: &Assertion, search: &FootprintSearch) -> Result<Vec<State>, OracleError> {
        let (l, r, _) = wand.as_wand().ok_or_else(|| OracleError::NotAWand(wand.to_string()))?;
        let lhs = self.lhs_states(l, r)?;
        let mut found = Vec::new();
        for s in self.plan(&[l, r]).stable_only().states()? {
            if search.within.as_ref().is_some_and(|o| !o.geq(&s)) {
                continue;
            }
            if search.nonvacuous && !lhs.iter().any(|a| a.compatible(&s)) {
                continue;
            }
            if self.is_footprint(&s, wand)? {
                found.push(s);
            }
        }
        let mut out = antichain(found);
        out.sort();
        Ok(out)
    }

    /// Decides `A^p * A^q ⊨ A^(p+q)` for lattice amounts `p + q ≤ 1`.
    pub fn check_combinable(&self, a: &Assertion) -> Result<Option<CombinableCex>, OracleError> {
        let sats = self.sat_states(a, false)?;
        let lattice: Vec<Perm> = self.universe.lattice().into_iter().filter(|p| !p.is_zero()).collect();
        let mut memo: HashSet<State> = HashSet::new();
        for &p in &lattice {
            for &q in &lattice {
                if p + q > Perm::one() {
                    continue;
                }
                let sp: Vec<State> = sats.iter().filter_map(|s| mult(p, s)).collect();
                let sq: Vec<State> = sats.iter().filter_map(|s| mult(q, s)).collect();
                for (i, x) in sp.iter().enumerate() {
                    // With p = q the sum is symmetric, so half the pairs suffice.
                    let from = if p == q { i } else { 0 };
                    for y in &sq[from..] {
                        let Some(sigma) = x.add(y) else { continue };
                        if memo.contains(&sigma) {
                            continue;
                        }
                        let member = match mult(Perm::one() / (p + q), &sigma) {
                            Some(base) => self.sat(&base, a)?,
                            None => false,
                        };
                        if !member {
                            return Ok(Some(CombinableCex { p, q, sigma }));
                        }
                        memo.insert(sigma);
                    }
                }
                memo.clear();
            }
        }
        Ok(None)
    }

    /// A state satisfying `a` but not `b`, if any.
    pub fn check_entailment(&self, a: &Assertion, b: &Assertion) -> Result<Option<State>, OracleError> {
        for s in self.plan(&[a, b]).states()? {
            if self.sat(&s, a)? && !self.sat(&s, b)? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    /// Adding pure (zero-mask) content never falsifies `e`; unframed reads count as false.
    pub fn check_mono_pure(&self, e: &Expr) -> Result<bool, OracleError> {
        let states = self.plan(&[]).states()?;
        let pures: Vec<&State> = states.iter().filter(|s| s.mask().is_empty()).collect();
        let holds = |s: &State| EvalCtx::new(s.heap(), &self.store).with_mask(s.mask()).eval_bool(e).unwrap_or(false);
        for s in states.iter().filter(|s| holds(s)) {
            for p in &pures {
                if let Some(t) = s.add(p) {
                    if !holds(&t) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Whether `(bin(π), h) ⊨ A` for every enumerated `(π, h) ⊨ A`.
    pub fn is_binary(&self, a: &Assertion) -> Result<bool, OracleError> {
        for s in self.sat_states(a, false)? {
            if !self.sat(&bin_state(&s), a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Mask splits `σ = (π1, h) ⊕ (π − π1, h)` with `π1` drawn from a finite candidate set.
fn mask_splits(sigma: &State, g: u32) -> Vec<(State, State)> {
    let g = i64::from(g);
    let cols: Vec<(ResourceId, Vec<Perm>)> = sigma
        .mask()
        .iter()
        .map(|(r, p)| {
            let mut c: BTreeSet<Perm> = [Perm::zero(), *p].into_iter().collect();
            for k in 0..=g {
                let step = Perm::new(k, g);
                if step <= *p {
                    c.insert(step);
                    c.insert(*p - step);
                }
            }
            (r.clone(), c.into_iter().collect())
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; cols.len()];
    loop {
        let (mut m1, mut m2) = (sigma.core(), sigma.core());
        for (c, (r, opts)) in cols.iter().enumerate() {
            let p1 = opts[idx[c]];
            m1.set_perm(r.clone(), p1);
            m2.set_perm(r.clone(), sigma.perm(r) - p1);
        }
        out.push((m1, m2));
        let mut c = cols.len();
        loop {
            if c == 0 {
                return out;
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < cols[c].1.len() {
                break;
            }
            idx[c] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_assertion;

    #[test]
    fn splits_cover_both_extremes() {
        let s = State::parse("{x.f@1=0}").unwrap();
        let splits = mask_splits(&s, 2);
        assert_eq!(splits.len(), 3);
        assert!(splits.iter().all(|(a, b)| a.add(b) == Some(s.clone())));
    }

    #[test]
    fn wand_atom_semantics() {
        let u = Universe::build(
            2,
            &[("x", "f", &[crate::state_model::Value::Int(0)]), ("x", "g", &[crate::state_model::Value::Int(0)])],
        );
        let o = Oracle::new(&u, Store::new());
        let w = parse_assertion("acc(x.f, 1/2) --* acc(x.g)").unwrap();
        assert!(o.is_footprint(&State::parse("{x.f@1=0}").unwrap(), &w).unwrap());
        assert!(o.is_footprint(&State::parse("{x.g@1=0}").unwrap(), &w).unwrap());
        assert!(!o.is_footprint(&State::parse("{x.f@1/2=0, x.g@1/2=0}").unwrap(), &w).unwrap());
        assert!(o.sat(&State::parse("{x.f@1=0}").unwrap(), &w).unwrap());
    }
}
