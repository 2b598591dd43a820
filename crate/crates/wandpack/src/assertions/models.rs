//! ⪰-minimal stable models of an assertion over a universe.
//!
//! Values are only chosen when evaluation needs them: a read of a location without a
//! value forks over the location's domain, and so does an accessed location whose value
//! the demand would otherwise leave open.

use super::ast::{Assertion, Store};
use super::demands::{antichain, demands, sat};
use super::eval::{EvalCtx, EvalError};
use crate::state_model::{Heap, Loc, State, Universe};

/// All ⪰-minimal stable states satisfying `a`, sorted.
pub fn minimal_models(a: &Assertion, store: &Store, u: &Universe) -> Result<Vec<State>, EvalError> {
    minimal_models_from(a, store, u, &Heap::new())
}

/// As [`minimal_models`], with some heap values fixed up front.
pub fn minimal_models_from(a: &Assertion, store: &Store, u: &Universe, heap: &Heap) -> Result<Vec<State>, EvalError> {
    let mut out = Vec::new();
    explore(a, store, u, heap.clone(), &mut out)?;
    let mut out = antichain(out);
    out.sort();
    Ok(out)
}

fn explore(a: &Assertion, store: &Store, u: &Universe, heap: Heap, out: &mut Vec<State>) -> Result<(), EvalError> {
    let ds = match demands(a, &EvalCtx::new(&heap, store), true) {
        Ok(ds) => ds,
        Err(EvalError::Unframed(l)) => return fork(a, store, u, &heap, &l, out),
        Err(EvalError::NullDeref(_)) => return Ok(()),
        Err(e) => return Err(e),
    };
    let open = ds.iter().find_map(|d| d.held_fields().find(|l| d.value(l).is_none()).cloned());
    if let Some(l) = open {
        return fork(a, store, u, &heap, &l, out);
    }
    out.extend(ds.into_iter().filter(|d| sat(d, a, store)));
    Ok(())
}

fn fork(
    a: &Assertion,
    store: &Store,
    u: &Universe,
    heap: &Heap,
    l: &Loc,
    out: &mut Vec<State>,
) -> Result<(), EvalError> {
    // Locations outside the universe can never be framed.
    let Some(dom) = u.domain(l) else { return Ok(()) };
    for v in dom {
        let mut h = heap.clone();
        h.insert(l.clone(), v.clone());
        explore(a, store, u, h, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_assertion;
    use crate::state_model::{Name, Value};

    fn u1() -> Universe {
        let y = Value::Ref(Name::new("y"));
        let z = Value::Ref(Name::new("z"));
        Universe::build(2, &[("x", "f", &[y, z]), ("y", "g", &[Value::Int(0)]), ("z", "g", &[Value::Int(0)])])
    }

    #[test]
    fn two_minimal_lhs_states() {
        let a = parse_assertion("acc(x.f) && (x.f == y || x.f == z)").unwrap();
        let m = minimal_models(&a, &Store::new(), &u1()).unwrap();
        let want: Vec<State> = ["{x.f@1=y}", "{x.f@1=z}"].iter().map(|s| State::parse(s).unwrap()).collect();
        assert_eq!(m, want);
    }

    #[test]
    fn contradiction_has_no_models() {
        let a = parse_assertion("acc(x.f) && x.f == y && x.f == z").unwrap();
        assert!(minimal_models(&a, &Store::new(), &u1()).unwrap().is_empty());
    }
}
