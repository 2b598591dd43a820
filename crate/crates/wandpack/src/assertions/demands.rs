//! Demand sets: the ⪰-minimal states that satisfy an assertion once the heap fixes
//! every value it reads. Resource-level satisfaction is decided through them.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::ast::{Assertion, Expr, Store};
use super::eval::{EvalCtx, EvalError};
use crate::state_model::{Name, ResourceId, State, Value};

/// Keeps the first occurrence of each ⪰-minimal state, in order.
#[must_use]
pub fn antichain(states: Vec<State>) -> Vec<State> {
    let mut out: Vec<State> = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let dominated = states.iter().enumerate().any(|(j, t)| if s == t { j < i } else { s.geq(t) });
        if !dominated {
            out.push(s.clone());
        }
    }
    out
}

/// Closes a wand over the store: bound references become reference names and other
/// bound values become literals.
#[must_use]
pub fn close_wand(wand: &Assertion, store: &Store) -> Assertion {
    let m: BTreeMap<Name, Expr> = store
        .0
        .iter()
        .map(|(k, v)| {
            let e = match v {
                Value::Ref(r) => Expr::Var(r.clone()),
                other => Expr::Lit(other.clone()),
            };
            (k.clone(), e)
        })
        .collect();
    wand.subst(&m)
}

/// The mask key recording an instance of `wand` under `store`.
#[must_use]
pub fn wand_resource(wand: &Assertion, store: &Store) -> ResourceId {
    ResourceId::Wand(Name::new(&close_wand(wand, store).to_string()))
}

/// Evaluates predicate arguments to a mask key.
pub fn pred_resource(name: &Name, args: &[Expr], ctx: &EvalCtx) -> Result<ResourceId, EvalError> {
    let args = args.iter().map(|a| ctx.eval(a)).collect::<Result<Vec<_>, _>>()?;
    Ok(ResourceId::Pred { name: name.clone(), args })
}

/// Demand set of `a` under the heap and store of `ctx`.
///
/// In lenient mode a disjunct whose evaluation fails contributes nothing, which is its
/// satisfaction reading. Strict mode reports the failure so that callers can resolve it.
pub fn demands(a: &Assertion, ctx: &EvalCtx, strict: bool) -> Result<Vec<State>, EvalError> {
    Ok(match a {
        Assertion::Pure(e) => {
            if ctx.eval_bool(e)? {
                vec![State::unit()]
            } else {
                vec![]
            }
        }
        Assertion::Acc(e, f, p) => match ctx.loc_or_null(e, f)? {
            None => vec![],
            Some(_) if p.is_zero() => vec![State::unit()],
            Some(l) => {
                let v = ctx.heap.get(&l).cloned();
                vec![State::field(l, *p, v)]
            }
        },
        Assertion::Pred(n, args, p) => {
            let r = pred_resource(n, args, ctx)?;
            if p.is_zero() {
                vec![State::unit()]
            } else {
                vec![State::resource(r, *p)]
            }
        }
        Assertion::Wand(..) => vec![State::resource(wand_resource(a, ctx.store), num_traits::One::one())],
        Assertion::Imp(b, x) => {
            if ctx.eval_bool(b)? {
                demands(x, ctx, strict)?
            } else {
                vec![State::unit()]
            }
        }
        Assertion::Star(x, y) => {
            let dx = demands(x, ctx, strict)?;
            if dx.is_empty() {
                return Ok(vec![]);
            }
            let dy = demands(y, ctx, strict)?;
            let mut out = Vec::new();
            for s in &dx {
                for t in &dy {
                    if let Some(u) = s.add(t) {
                        out.push(u);
                    }
                }
            }
            antichain(out)
        }
        Assertion::Or(x, y) => {
            let (dx, dy) = (demands(x, ctx, strict), demands(y, ctx, strict));
            // Strict mode only surfaces missing values; other failures falsify the disjunct.
            let fatal = |e: &EvalError| strict && matches!(e, EvalError::Unframed(_));
            let out = match (dx, dy) {
                (Ok(a), Ok(b)) => [a, b].concat(),
                (Err(e), _) | (_, Err(e)) if fatal(&e) => return Err(e),
                (Ok(a), Err(_)) | (Err(_), Ok(a)) => a,
                (Err(e), Err(_)) => return Err(e),
            };
            antichain(out)
        }
    })
}

/// Resource-level satisfaction: some demand under `σ`'s own heap lies below `σ`.
#[must_use]
pub fn sat(sigma: &State, a: &Assertion, store: &Store) -> bool {
    sat_in(sigma, a, &EvalCtx::new(sigma.heap(), store))
}

/// As [`sat`], with a caller-supplied context (heap and possibly a mask for `perm`).
#[must_use]
pub fn sat_in(sigma: &State, a: &Assertion, ctx: &EvalCtx) -> bool {
    demands(a, ctx, false).is_ok_and(|ds| ds.iter().any(|d| sigma.geq(d)))
}

/// The first demand covered by `sigma`, if any.
#[must_use]
pub fn covered_demand(sigma: &State, a: &Assertion, ctx: &EvalCtx) -> Option<State> {
    demands(a, ctx, false).ok()?.into_iter().find(|d| sigma.geq(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_assertion;

    fn st(s: &str) -> State {
        State::parse(s).unwrap()
    }

    fn dem(a: &str, heap: &str) -> Vec<State> {
        let h = st(heap);
        let store = Store::parse("x=x").unwrap();
        demands(&parse_assertion(a).unwrap(), &EvalCtx::new(h.heap(), &store), false).unwrap()
    }

    #[test]
    fn chained_access_collects_values() {
        assert_eq!(dem("acc(x.f) * acc(x.f.g)", "{x.f@0=y, y.g@0=0}"), vec![st("{x.f@1=y, y.g@1=0}")]);
    }

    #[test]
    fn true_pure_disjunction_demands_nothing() {
        assert_eq!(dem("x.f == y || x.f == z", "{x.f@0=y}"), vec![State::unit()]);
    }

    #[test]
    fn resource_disjunction_has_two_minimal_choices() {
        assert_eq!(dem("acc(y.g) || acc(z.g)", "{y.g@0=0, z.g@0=0}"), vec![st("{y.g@1=0}"), st("{z.g@1=0}")]);
    }

    #[test]
    fn antichain_drops_dominated_and_duplicates() {
        let v = vec![st("{y.g@1}"), st("{y.g@1/2}"), st("{y.g@1/2}"), st("{z.g@1}")];
        assert_eq!(antichain(v), vec![st("{y.g@1/2}"), st("{z.g@1}")]);
    }

    #[test]
    fn sat_examples() {
        let store = Store::parse("x=x").unwrap();
        assert!(sat(&st("{x.f@1=y}"), &parse_assertion("acc(x.f)").unwrap(), &store));
        assert!(sat(&st("{x.b@1=false}"), &parse_assertion("x.b ==> acc(x.f)").unwrap(), &store));
        assert!(!sat(&st("{x.b@1=true}"), &parse_assertion("x.b ==> acc(x.f)").unwrap(), &store));
        assert!(!sat(&st("{x.f@1/2=y}"), &parse_assertion("acc(x.f)").unwrap(), &store));
    }

    #[test]
    fn unframed_disjunct_is_false_not_fatal() {
        let store = Store::new();
        let a = parse_assertion("(acc(x.f) * x.f.g == 0) || acc(z.g)").unwrap();
        assert!(sat(&st("{x.f@1=y, z.g@1=0}"), &a, &store));
        assert!(!sat(&st("{x.f@1=y}"), &a, &store));
    }

    #[test]
    fn wand_keys_close_over_the_store() {
        let w = parse_assertion("acc(a.f) --* acc(a.f)").unwrap();
        let store = Store::parse("a=x").unwrap();
        assert_eq!(wand_resource(&w, &store).to_string(), "wand[acc(x.f) --* acc(x.f)]");
    }
}
