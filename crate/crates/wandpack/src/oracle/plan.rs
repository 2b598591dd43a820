//! Enumeration of the states of a universe.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::OracleError;
use crate::assertions::{pred_resource, wand_resource, Assertion, EvalCtx, Store};
use crate::state_model::{Heap, Loc, Perm, ResourceId, State, Universe, Value};

/// Default bound on the number of enumerated states.
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// One resource with its possible amounts and values.
type Column = (ResourceId, Vec<(Perm, Option<Value>)>);

/// Which states of a universe to enumerate.
///
/// Every field location takes an amount from the granularity lattice and either no value
/// or a domain value. Predicate and wand resources named by the plan take lattice amounts.
/// States come out in a fixed order: an odometer over resources in key order.
#[derive(Clone, Debug)]
pub struct EnumerationPlan<'u> {
    pub universe: &'u Universe,
    pub stable_only: bool,
    pub total_heap_only: bool,
    pub extra: BTreeSet<ResourceId>,
    pub budget: u128,
}

impl<'u> EnumerationPlan<'u> {
    #[must_use]
    pub fn new(universe: &'u Universe) -> Self {
        EnumerationPlan {
            universe,
            stable_only: false,
            total_heap_only: false,
            extra: BTreeSet::new(),
            budget: DEFAULT_BUDGET,
        }
    }

    #[must_use]
    pub fn stable_only(mut self) -> Self {
        self.stable_only = true;
        self
    }

    #[must_use]
    pub fn total_heap_only(mut self) -> Self {
        self.total_heap_only = true;
        self
    }

    #[must_use]
    pub fn budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    #[must_use]
    pub fn with_resources(mut self, rs: impl IntoIterator<Item = ResourceId>) -> Self {
        self.extra.extend(rs.into_iter().filter(|r| r.as_field().is_none()));
        self
    }

    /// Adds the predicate and wand instances the assertions can name without reading the heap.
    #[must_use]
    pub fn with_assertions(self, xs: &[&Assertion], store: &Store) -> Self {
        let mut rs = BTreeSet::new();
        for a in xs {
            collect(a, store, &mut rs);
        }
        self.with_resources(rs)
    }

    fn field_options(&self, l: &Loc) -> Vec<(Perm, Option<Value>)> {
        let dom = self.universe.domain(l).unwrap_or(&[]);
        let mut out = Vec::new();
        for p in self.universe.lattice() {
            let mut vals: Vec<Option<Value>> = Vec::new();
            if !self.total_heap_only && !(self.stable_only && !p.is_zero()) {
                vals.push(None);
            }
            if !(self.stable_only && p.is_zero()) {
                vals.extend(dom.iter().cloned().map(Some));
            }
            out.extend(vals.into_iter().map(|v| (p, v)));
        }
        out
    }

    fn columns(&self) -> Vec<Column> {
        let mut cols: Vec<Column> =
            self.universe.locations.keys().map(|l| (ResourceId::Field(l.clone()), self.field_options(l))).collect();
        for r in &self.extra {
            cols.push((r.clone(), self.universe.lattice().into_iter().map(|p| (p, None)).collect()));
        }
        cols
    }

    /// Number of states the plan would produce.
    #[must_use]
    pub fn cardinality(&self) -> u128 {
        self.columns().iter().map(|(_, o)| o.len() as u128).product()
    }

    pub fn states(&self) -> Result<Vec<State>, OracleError> {
        let n = self.cardinality();
        if n > self.budget {
            return Err(OracleError::Budget { needed: n, budget: self.budget });
        }
        let cols = self.columns();
        let mut out = Vec::with_capacity(n as usize);
        let mut idx = vec![0usize; cols.len()];
        loop {
            let mut s = State::unit();
            let mut heap = Heap::new();
            for (c, (r, opts)) in cols.iter().enumerate() {
                let (p, v) = &opts[idx[c]];
                s.set_perm(r.clone(), *p);
                if let (Some(v), ResourceId::Field(l)) = (v, r) {
                    heap.insert(l.clone(), v.clone());
                }
            }
            out.push(State::from_parts(s.mask().clone(), heap));
            // Advance the odometer, last column fastest.
            let mut c = cols.len();
            loop {
                if c == 0 {
                    return Ok(out);
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
}

fn collect(a: &Assertion, store: &Store, out: &mut BTreeSet<ResourceId>) {
    let empty = Heap::new();
    match a {
        Assertion::Star(x, y) | Assertion::Or(x, y) => {
            collect(x, store, out);
            collect(y, store, out);
        }
        Assertion::Imp(_, x) => collect(x, store, out),
        Assertion::Pred(n, args, _) => {
            if let Ok(r) = pred_resource(n, args, &EvalCtx::new(&empty, store)) {
                out.insert(r);
            }
        }
        Assertion::Wand(x, y, _) => {
            out.insert(wand_resource(a, store));
            collect(x, store, out);
            collect(y, store, out);
        }
        Assertion::Pure(_) | Assertion::Acc(..) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_model::Name;

    fn u1() -> Universe {
        let y = Value::Ref(Name::new("y"));
        let z = Value::Ref(Name::new("z"));
        Universe::build(2, &[("x", "f", &[y, z]), ("y", "g", &[Value::Int(0)]), ("z", "g", &[Value::Int(0)])])
    }

    #[test]
    fn cardinalities() {
        let u = u1();
        // x.f: 3 amounts × (none + 2 values); y.g and z.g: 3 × 2.
        assert_eq!(EnumerationPlan::new(&u).cardinality(), 9 * 6 * 6);
        assert_eq!(EnumerationPlan::new(&u).stable_only().cardinality(), 5 * 3 * 3);
        assert_eq!(EnumerationPlan::new(&u).total_heap_only().cardinality(), 6 * 3 * 3);
        let states = EnumerationPlan::new(&u).stable_only().states().unwrap();
        assert_eq!(states.len(), 45);
        assert!(states.iter().all(State::is_stable));
        assert_eq!(states.iter().collect::<BTreeSet<_>>().len(), 45);
    }

    #[test]
    fn budget_is_enforced() {
        let u = u1();
        assert!(matches!(EnumerationPlan::new(&u).budget(10).states(), Err(OracleError::Budget { needed: 324, .. })));
    }
}
