//! Expression and assertion syntax trees.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::state_model::{Name, Perm, Value};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl CmpOp {
    #[must_use]
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }
}

/// Heap-dependent expressions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Expr {
    Var(Name),
    /// Non-reference literal: `null`, booleans, integers, amounts.
    Lit(Value),
    Field(Box<Expr>, Name),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    /// `perm(e.f)`: the held amount, only meaningful at verifier level.
    PermOf(Box<Expr>, Name),
}

impl Expr {
    #[must_use]
    pub fn var(n: &str) -> Expr {
        Expr::Var(Name::new(n))
    }

    #[must_use]
    pub fn field(e: Expr, f: &str) -> Expr {
        Expr::Field(Box::new(e), Name::new(f))
    }

    #[must_use]
    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::Cmp(CmpOp::Eq, Box::new(a), Box::new(b))
    }

    #[must_use]
    pub fn negate(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    #[must_use]
    pub fn tt() -> Expr {
        Expr::Lit(Value::Bool(true))
    }

    #[must_use]
    pub fn uses_perm(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if matches!(e, Expr::PermOf(..)) {
                found = true;
            }
        });
        found
    }

    pub fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Var(_) | Expr::Lit(_) => {}
            Expr::Field(e, _) | Expr::Not(e) | Expr::PermOf(e, _) => e.visit(f),
            Expr::Cmp(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Ite(c, t, e) => {
                c.visit(f);
                t.visit(f);
                e.visit(f);
            }
        }
    }

    /// Replaces variables by expressions.
    #[must_use]
    pub fn subst(&self, m: &BTreeMap<Name, Expr>) -> Expr {
        let b = |e: &Expr| Box::new(e.subst(m));
        match self {
            Expr::Var(v) => m.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Lit(_) => self.clone(),
            Expr::Field(e, f) => Expr::Field(b(e), f.clone()),
            Expr::Cmp(op, x, y) => Expr::Cmp(op.clone(), b(x), b(y)),
            Expr::And(x, y) => Expr::And(b(x), b(y)),
            Expr::Or(x, y) => Expr::Or(b(x), b(y)),
            Expr::Not(x) => Expr::Not(b(x)),
            Expr::Implies(x, y) => Expr::Implies(b(x), b(y)),
            Expr::Ite(c, t, e) => Expr::Ite(b(c), b(t), b(e)),
            Expr::PermOf(e, f) => Expr::PermOf(b(e), f.clone()),
        }
    }
}

/// Standard wand `--*` or combinable wand `--*c`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum WandKind {
    Standard,
    Combinable,
}

impl WandKind {
    #[must_use]
    pub fn symbol(self) -> &'static str {
        match self {
            WandKind::Standard => "--*",
            WandKind::Combinable => "--*c",
        }
    }

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            WandKind::Standard => "standard",
            WandKind::Combinable => "combinable",
        }
    }

    pub fn parse(s: &str) -> Result<WandKind, String> {
        match s {
            "standard" => Ok(WandKind::Standard),
            "combinable" => Ok(WandKind::Combinable),
            _ => Err(format!("unknown wand kind `{s}`")),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Assertion {
    Star(Box<Assertion>, Box<Assertion>),
    Imp(Expr, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Pure(Expr),
    Acc(Expr, Name, Perm),
    Pred(Name, Vec<Expr>, Perm),
    Wand(Box<Assertion>, Box<Assertion>, WandKind),
}

impl Assertion {
    #[must_use]
    pub fn star(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Star(Box::new(a), Box::new(b))
    }

    #[must_use]
    pub fn or(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Or(Box::new(a), Box::new(b))
    }

    #[must_use]
    pub fn imp(b: Expr, a: Assertion) -> Assertion {
        Assertion::Imp(b, Box::new(a))
    }

    #[must_use]
    pub fn acc(e: Expr, f: &str, p: Perm) -> Assertion {
        Assertion::Acc(e, Name::new(f), p)
    }

    #[must_use]
    pub fn wand(l: Assertion, r: Assertion, k: WandKind) -> Assertion {
        Assertion::Wand(Box::new(l), Box::new(r), k)
    }

    #[must_use]
    pub fn tt() -> Assertion {
        Assertion::Pure(Expr::tt())
    }

    /// Atoms of the package logic: everything except `*` and `==>`.
    #[must_use]
    pub fn is_atom(&self) -> bool {
        !matches!(self, Assertion::Star(..) | Assertion::Imp(..))
    }

    #[must_use]
    pub fn is_resource_atom(&self) -> bool {
        matches!(self, Assertion::Acc(..) | Assertion::Pred(..) | Assertion::Wand(..))
    }

    /// True when the assertion holds no resource atoms.
    #[must_use]
    pub fn is_pure(&self) -> bool {
        match self {
            Assertion::Pure(_) => true,
            Assertion::Acc(..) | Assertion::Pred(..) | Assertion::Wand(..) => false,
            Assertion::Star(a, b) | Assertion::Or(a, b) => a.is_pure() && b.is_pure(),
            Assertion::Imp(_, a) => a.is_pure(),
        }
    }

    #[must_use]
    pub fn contains_wand(&self) -> bool {
        match self {
            Assertion::Wand(..) => true,
            Assertion::Star(a, b) | Assertion::Or(a, b) => a.contains_wand() || b.contains_wand(),
            Assertion::Imp(_, a) => a.contains_wand(),
            _ => false,
        }
    }

    #[must_use]
    pub fn contains_pred(&self) -> bool {
        match self {
            Assertion::Pred(..) => true,
            Assertion::Star(a, b) | Assertion::Or(a, b) => a.contains_pred() || b.contains_pred(),
            Assertion::Imp(_, a) => a.contains_pred(),
            Assertion::Wand(a, b, _) => a.contains_pred() || b.contains_pred(),
            _ => false,
        }
    }

    /// Visits every expression occurring in the assertion (not inside nested wands).
    pub fn visit_exprs(&self, f: &mut dyn FnMut(&Expr)) {
        match self {
            Assertion::Star(a, b) | Assertion::Or(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
            Assertion::Imp(e, a) => {
                f(e);
                a.visit_exprs(f);
            }
            Assertion::Pure(e) | Assertion::Acc(e, _, _) => f(e),
            Assertion::Pred(_, args, _) => args.iter().for_each(&mut *f),
            Assertion::Wand(..) => {}
        }
    }

    #[must_use]
    pub fn uses_perm(&self) -> bool {
        match self {
            Assertion::Star(a, b) | Assertion::Or(a, b) | Assertion::Wand(a, b, _) => a.uses_perm() || b.uses_perm(),
            Assertion::Imp(e, a) => e.uses_perm() || a.uses_perm(),
            Assertion::Pure(e) | Assertion::Acc(e, _, _) => e.uses_perm(),
            Assertion::Pred(_, args, _) => args.iter().any(Expr::uses_perm),
        }
    }

    #[must_use]
    pub fn subst(&self, m: &BTreeMap<Name, Expr>) -> Assertion {
        match self {
            Assertion::Star(a, b) => Assertion::star(a.subst(m), b.subst(m)),
            Assertion::Or(a, b) => Assertion::or(a.subst(m), b.subst(m)),
            Assertion::Imp(e, a) => Assertion::imp(e.subst(m), a.subst(m)),
            Assertion::Pure(e) => Assertion::Pure(e.subst(m)),
            Assertion::Acc(e, f, p) => Assertion::Acc(e.subst(m), f.clone(), *p),
            Assertion::Pred(n, args, p) => Assertion::Pred(n.clone(), args.iter().map(|a| a.subst(m)).collect(), *p),
            Assertion::Wand(a, b, k) => Assertion::wand(a.subst(m), b.subst(m), *k),
        }
    }

    /// Multiplies every accessibility and predicate amount by `p` (the `A^p` reading).
    #[must_use]
    pub fn scale(&self, p: Perm) -> Assertion {
        match self {
            Assertion::Star(a, b) => Assertion::star(a.scale(p), b.scale(p)),
            Assertion::Or(a, b) => Assertion::or(a.scale(p), b.scale(p)),
            Assertion::Imp(e, a) => Assertion::imp(e.clone(), a.scale(p)),
            Assertion::Pure(_) | Assertion::Wand(..) => self.clone(),
            Assertion::Acc(e, f, q) => Assertion::Acc(e.clone(), f.clone(), *q * p),
            Assertion::Pred(n, args, q) => Assertion::Pred(n.clone(), args.clone(), *q * p),
        }
    }

    /// Merges pure-only `||` and `==>` nodes into expressions, the form the parser produces.
    #[must_use]
    pub fn normalize(&self) -> Assertion {
        match self {
            Assertion::Star(a, b) => Assertion::star(a.normalize(), b.normalize()),
            Assertion::Or(a, b) => match (a.normalize(), b.normalize()) {
                (Assertion::Pure(x), Assertion::Pure(y)) => Assertion::Pure(Expr::Or(Box::new(x), Box::new(y))),
                (x, y) => Assertion::or(x, y),
            },
            Assertion::Imp(e, a) => match a.normalize() {
                Assertion::Pure(y) => Assertion::Pure(Expr::Implies(Box::new(e.clone()), Box::new(y))),
                x => Assertion::imp(e.clone(), x),
            },
            Assertion::Wand(a, b, k) => Assertion::wand(a.normalize(), b.normalize(), *k),
            other => other.clone(),
        }
    }

    /// Splits a wand into its sides.
    #[must_use]
    pub fn as_wand(&self) -> Option<(&Assertion, &Assertion, WandKind)> {
        match self {
            Assertion::Wand(a, b, k) => Some((a, b, *k)),
            _ => None,
        }
    }
}

/// Variable store.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Store(pub BTreeMap<Name, Value>);

impl Store {
    #[must_use]
    pub fn new() -> Self {
        Store::default()
    }

    #[must_use]
    pub fn get(&self, n: &Name) -> Option<&Value> {
        self.0.get(n)
    }

    pub fn set(&mut self, n: Name, v: Value) {
        self.0.insert(n, v);
    }

    /// Parses `x=x, y=y` (commas or whitespace separate bindings).
    pub fn parse(text: &str) -> Result<Store, String> {
        let mut s = Store::new();
        for part in text.split([',', ' ', '\t']).filter(|p| !p.trim().is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected `var=value`, got `{part}`"))?;
            let k = k.trim();
            if !crate::state_model::is_ident(k) {
                return Err(format!("bad variable name `{k}`"));
            }
            s.set(Name::new(k), Value::parse_token(v)?);
        }
        Ok(s)
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Full permission.
#[must_use]
pub fn full() -> Perm {
    Perm::one()
}
