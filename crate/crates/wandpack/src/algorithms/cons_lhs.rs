//! Construction of LHS states over total heaps.

use std::collections::BTreeSet;

use crate::assertions::{demands, sat, Assertion, EvalCtx, Expr, Store};
use crate::state_model::{Heap, State, Universe};

/// Every total heap of `u` as a state with an empty mask, in a fixed order.
#[must_use]
pub fn total_heaps(u: &Universe) -> Vec<State> {
    let mut heaps = vec![Heap::new()];
    for (l, dom) in &u.locations {
        let mut next = Vec::with_capacity(heaps.len() * dom.len());
        for h in &heaps {
            for v in dom {
                let mut h = h.clone();
                h.insert(l.clone(), v.clone());
                next.push(h);
            }
        }
        heaps = next;
    }
    heaps.into_iter().map(|h| State::from_parts(Default::default(), h)).collect()
}

fn guard(pc: &[Expr], s: &State, store: &Store) -> bool {
    let ctx = EvalCtx::new(s.heap(), store);
    pc.iter().all(|e| ctx.eval_bool(e).unwrap_or(false))
}

/// Adds `a` to every state of `t` whose heap satisfies `pc`; others pass through.
///
/// Starting from [`total_heaps`] with an empty path condition this yields every way
/// of satisfying `a` with a minimal mask, one state per heap and disjunct choice.
#[must_use]
pub fn cons_lhs(t: &[State], pc: &[Expr], a: &Assertion, store: &Store) -> Vec<State> {
    let mut out = BTreeSet::new();
    for s in t {
        if !guard(pc, s, store) {
            out.insert(s.clone());
            continue;
        }
        match a {
            Assertion::Star(x, y) => {
                let mid = cons_lhs(std::slice::from_ref(s), pc, x, store);
                out.extend(cons_lhs(&mid, pc, y, store));
            }
            Assertion::Imp(g, x) => {
                let mut pc = pc.to_vec();
                pc.push(g.clone());
                out.extend(cons_lhs(std::slice::from_ref(s), &pc, x, store));
            }
            Assertion::Or(x, y) => {
                out.extend(cons_lhs(std::slice::from_ref(s), pc, x, store));
                out.extend(cons_lhs(std::slice::from_ref(s), pc, y, store));
            }
            Assertion::Pure(_) => {
                if sat(&s.core(), a, store) {
                    out.insert(s.clone());
                }
            }
            Assertion::Acc(..) | Assertion::Pred(..) | Assertion::Wand(..) => {
                let ds = demands(a, &EvalCtx::new(s.heap(), store), false).unwrap_or_default();
                out.extend(ds.iter().filter_map(|d| s.add(d)));
            }
        }
    }
    out.into_iter().collect()
}
