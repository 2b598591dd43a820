//! Evaluation of heap-dependent expressions.

use std::cmp::Ordering;

use thiserror::Error;

use super::ast::{CmpOp, Expr, Store};
use crate::state_model::{Heap, Loc, Mask, Name, Perm, ResourceId, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum EvalError {
    #[error("unframed read of {0}")]
    Unframed(Loc),
    #[error("dereference of null in `{0}`")]
    NullDeref(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("perm() is only available in verifier assertions")]
    PermUnavailable,
}

/// Everything an expression may read.
#[derive(Clone, Copy)]
pub struct EvalCtx<'a> {
    pub heap: &'a Heap,
    pub store: &'a Store,
    /// Present only at verifier level, where `perm(e.f)` reads the world's mask.
    pub mask: Option<&'a Mask>,
}

impl<'a> EvalCtx<'a> {
    #[must_use]
    pub fn new(heap: &'a Heap, store: &'a Store) -> Self {
        EvalCtx { heap, store, mask: None }
    }

    #[must_use]
    pub fn with_mask(mut self, mask: &'a Mask) -> Self {
        self.mask = Some(mask);
        self
    }

    /// Identifiers not bound in the store denote the universe reference of the same name.
    fn var(&self, n: &Name) -> Value {
        self.store.get(n).cloned().unwrap_or_else(|| Value::Ref(n.clone()))
    }

    /// Resolves `e.f` to a location.
    pub fn loc(&self, e: &Expr, f: &Name) -> Result<Loc, EvalError> {
        match self.eval(e)? {
            Value::Ref(o) => Ok(Loc { obj: o, field: f.clone() }),
            Value::Null => Err(EvalError::NullDeref(format!("{e}.{f}"))),
            v => Err(EvalError::Type(format!("`{e}` is {v}, not a reference"))),
        }
    }

    /// Like [`EvalCtx::loc`] but maps a null receiver to `None`.
    pub fn loc_or_null(&self, e: &Expr, f: &Name) -> Result<Option<Loc>, EvalError> {
        match self.eval(e)? {
            Value::Ref(o) => Ok(Some(Loc { obj: o, field: f.clone() })),
            Value::Null => Ok(None),
            v => Err(EvalError::Type(format!("`{e}` is {v}, not a reference"))),
        }
    }

    pub fn eval(&self, e: &Expr) -> Result<Value, EvalError> {
        match e {
            Expr::Var(n) => Ok(self.var(n)),
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Field(x, f) => {
                let l = self.loc(x, f)?;
                self.heap.get(&l).cloned().ok_or(EvalError::Unframed(l))
            }
            Expr::PermOf(x, f) => {
                let mask = self.mask.ok_or(EvalError::PermUnavailable)?;
                let l = self.loc(x, f)?;
                Ok(Value::Perm(mask.get(&ResourceId::Field(l)).copied().unwrap_or_default()))
            }
            Expr::Cmp(op, x, y) => {
                let (a, b) = (self.eval(x)?, self.eval(y)?);
                Ok(Value::Bool(compare(op, &a, &b)?))
            }
            Expr::Not(x) => Ok(Value::Bool(!self.eval_bool(x)?)),
            Expr::And(x, y) => Ok(Value::Bool(self.eval_bool(x)? && self.eval_bool(y)?)),
            Expr::Or(x, y) => Ok(Value::Bool(self.eval_bool(x)? || self.eval_bool(y)?)),
            Expr::Implies(x, y) => Ok(Value::Bool(!self.eval_bool(x)? || self.eval_bool(y)?)),
            Expr::Ite(c, t, f) => {
                if self.eval_bool(c)? {
                    self.eval(t)
                } else {
                    self.eval(f)
                }
            }
        }
    }

    pub fn eval_bool(&self, e: &Expr) -> Result<bool, EvalError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            v => Err(EvalError::Type(format!("`{e}` is {v}, not a boolean"))),
        }
    }
}

fn compare(op: &CmpOp, a: &Value, b: &Value) -> Result<bool, EvalError> {
    let numeric = |a: &Value, b: &Value| -> Result<Ordering, EvalError> {
        match (a.as_rational(), b.as_rational()) {
            (Some(x), Some(y)) => Ok(x.cmp(&y)),
            _ => Err(EvalError::Type(format!("cannot order {a} and {b}"))),
        }
    };
    Ok(match op {
        CmpOp::Eq | CmpOp::Ne => {
            let same = match (a.as_rational(), b.as_rational()) {
                (Some(x), Some(y)) => x == y,
                _ => a == b,
            };
            same == (*op == CmpOp::Eq)
        }
        CmpOp::Lt => numeric(a, b)? == Ordering::Less,
        CmpOp::Le => numeric(a, b)? != Ordering::Greater,
    })
}

/// Amount of a field location held by a mask.
#[must_use]
pub fn field_amount(mask: &Mask, l: &Loc) -> Perm {
    mask.get(&ResourceId::Field(l.clone())).copied().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_expr;
    use crate::state_model::State;

    fn ev(e: &str, s: &str, store: &str) -> Result<Value, EvalError> {
        let st = State::parse(s).unwrap();
        let store = Store::parse(store).unwrap();
        EvalCtx::new(st.heap(), &store).eval(&parse_expr(e).unwrap())
    }

    #[test]
    fn reads_through_store() {
        assert_eq!(ev("x.f", "{x.f@1=y}", "x=x").unwrap(), Value::Ref(Name::new("y")));
        assert_eq!(ev("x.f.g", "{x.f@1=y}", "x=x"), Err(EvalError::Unframed(Loc::new("y", "g"))));
    }

    #[test]
    fn conditional_matches_heap() {
        let e = "x.f == y ? x.f.g == 0 : false";
        assert_eq!(ev(e, "{x.f@1=y, y.g@1=0}", "x=x").unwrap(), Value::Bool(true));
        assert_eq!(ev(e, "{x.f@1=z}", "x=x").unwrap(), Value::Bool(false));
    }

    #[test]
    fn perm_needs_a_mask() {
        assert_eq!(ev("perm(y.g) == write", "{y.g@1=0}", ""), Err(EvalError::PermUnavailable));
        let st = State::parse("{y.g@1/2=0}").unwrap();
        let store = Store::new();
        let ctx = EvalCtx::new(st.heap(), &store).with_mask(st.mask());
        assert_eq!(ctx.eval(&parse_expr("perm(y.g)").unwrap()).unwrap(), Value::Perm(Perm::new(1, 2)));
        assert!(ctx.eval_bool(&parse_expr("perm(y.g) < write").unwrap()).unwrap());
    }

    #[test]
    fn null_dereference() {
        assert!(matches!(ev("x.f.g", "{x.f@1=null}", ""), Err(EvalError::NullDeref(_))));
    }
}
