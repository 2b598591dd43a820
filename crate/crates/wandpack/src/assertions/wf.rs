//! Syntactic well-formedness: self-framing reads and no permission introspection.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::ast::{Assertion, Expr};
use crate::state_model::Name;

/// Why an assertion is not well-formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfError(pub String);

impl std::fmt::Display for WfError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Framed = BTreeSet<(Expr, Name)>;

#[must_use]
pub fn wf(a: &Assertion) -> bool {
    check_wf(a).is_ok()
}

/// Every dereference must be preceded, left to right through `*`, by an accessibility
/// predicate for it; both sides of a wand are checked on their own.
pub fn check_wf(a: &Assertion) -> Result<(), WfError> {
    if a.uses_perm() {
        return Err(WfError("perm() may not occur in packaged assertions".into()));
    }
    walk(a, &mut Framed::new())
}

fn walk(a: &Assertion, framed: &mut Framed) -> Result<(), WfError> {
    match a {
        Assertion::Pure(e) => expr(e, framed),
        Assertion::Acc(e, f, p) => {
            expr(e, framed)?;
            if !p.is_zero() {
                framed.insert((e.clone(), f.clone()));
            }
            Ok(())
        }
        Assertion::Pred(_, args, _) => args.iter().try_for_each(|e| expr(e, framed)),
        Assertion::Star(x, y) => {
            walk(x, framed)?;
            walk(y, framed)
        }
        Assertion::Imp(b, x) => {
            expr(b, framed)?;
            walk(x, &mut framed.clone())
        }
        Assertion::Or(x, y) => {
            walk(x, &mut framed.clone())?;
            walk(y, &mut framed.clone())
        }
        Assertion::Wand(x, y, _) => {
            walk(x, &mut Framed::new())?;
            walk(y, &mut Framed::new())
        }
    }
}

fn expr(e: &Expr, framed: &Framed) -> Result<(), WfError> {
    let mut err = None;
    e.visit(&mut |sub| {
        if let Expr::Field(x, f) = sub {
            if err.is_none() && !framed.contains(&((**x).clone(), f.clone())) {
                err = Some(WfError(format!("read of {sub} is not framed")));
            }
        }
    });
    err.map_or(Ok(()), Err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_assertion;

    fn w(s: &str) -> bool {
        wf(&parse_assertion(s).unwrap())
    }

    #[test]
    fn self_framing_examples() {
        assert!(w("acc(x.f) * x.f == y"));
        assert!(!w("x.f == y"));
        assert!(w("acc(x.f) * acc(x.f.g)"));
        assert!(!w("acc(x.f.g) * acc(x.f)"));
        assert!(w("acc(x.f) && (x.f == y || x.f == z) --* acc(x.f) && acc(x.f.g)"));
    }

    #[test]
    fn branches_do_not_frame_their_siblings() {
        assert!(!w("(x.b ==> acc(x.f)) * x.f == 0"));
        assert!(!w("(acc(x.f) || acc(x.g)) * x.f == 0"));
    }

    #[test]
    fn introspection_is_rejected() {
        assert!(!w("perm(x.f) == write"));
    }
}
