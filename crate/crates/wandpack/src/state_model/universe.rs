//! Finite universes bounding every enumeration.
//!
//! File format (line based, `#` starts a comment):
//!
//! ```text
//! wandpack-universe 1
//! granularity 2
//! refs x y z
//! field f: Ref
//! field g: Int
//! loc x.f in {y, z}
//! loc y.g in {0, 1}
//! predicate P(a) = acc(a.f)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use super::state::{Loc, ResourceId, State};
use super::value::{is_ident, Name, Perm, Value};
use crate::assertions::{parse_assertion, Assertion};

pub const UNIVERSE_HEADER: &str = "wandpack-universe 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldType {
    Ref,
    Int,
    Bool,
}

impl FieldType {
    pub fn parse(s: &str) -> Result<FieldType, String> {
        match s {
            "Ref" => Ok(FieldType::Ref),
            "Int" => Ok(FieldType::Int),
            "Bool" => Ok(FieldType::Bool),
            _ => Err(format!("unknown field type `{s}`")),
        }
    }

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            FieldType::Ref => "Ref",
            FieldType::Int => "Int",
            FieldType::Bool => "Bool",
        }
    }

    #[must_use]
    pub fn admits(self, v: &Value) -> bool {
        matches!(
            (self, v),
            (FieldType::Ref, Value::Ref(_) | Value::Null)
                | (FieldType::Int, Value::Int(_))
                | (FieldType::Bool, Value::Bool(_))
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDef {
    pub params: Vec<Name>,
    pub body: Assertion,
}

impl PredicateDef {
    /// The body with parameters replaced by the given argument expressions.
    #[must_use]
    pub fn instantiate(&self, args: &[crate::assertions::Expr]) -> Assertion {
        let m = self.params.iter().cloned().zip(args.iter().cloned()).collect();
        self.body.subst(&m)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("universe line {line}: {msg}")]
pub struct UniverseError {
    pub line: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    pub granularity: u32,
    pub refs: BTreeSet<Name>,
    pub fields: BTreeMap<Name, FieldType>,
    pub locations: BTreeMap<Loc, Vec<Value>>,
    pub predicates: BTreeMap<Name, PredicateDef>,
}

impl Universe {
    /// Replaces predicate instances by their scaled bodies, up to a nesting depth of the
    /// number of declared predicates. Deeper instances are kept.
    #[must_use]
    pub fn unfold_preds(&self, a: &Assertion) -> Assertion {
        self.unfold_depth(a, self.predicates.len())
    }

    fn unfold_depth(&self, a: &Assertion, depth: usize) -> Assertion {
        let rec = |x: &Assertion| Box::new(self.unfold_depth(x, depth));
        match a {
            Assertion::Pred(n, args, p) => match self.predicates.get(n) {
                Some(def) if depth > 0 => self.unfold_depth(&def.instantiate(args).scale(*p), depth - 1),
                _ => a.clone(),
            },
            Assertion::Star(x, y) => Assertion::Star(rec(x), rec(y)),
            Assertion::Or(x, y) => Assertion::Or(rec(x), rec(y)),
            Assertion::Imp(b, x) => Assertion::Imp(b.clone(), rec(x)),
            Assertion::Wand(x, y, k) => Assertion::Wand(rec(x), rec(y), *k),
            Assertion::Pure(_) | Assertion::Acc(..) => a.clone(),
        }
    }

    #[must_use]
    pub fn domain(&self, l: &Loc) -> Option<&[Value]> {
        self.locations.get(l).map(Vec::as_slice)
    }

    #[must_use]
    pub fn has_loc(&self, l: &Loc) -> bool {
        self.locations.contains_key(l)
    }

    #[must_use]
    pub fn is_ref(&self, n: &Name) -> bool {
        self.refs.contains(n)
    }

    /// `{0, 1/g, …, 1}`.
    #[must_use]
    pub fn lattice(&self) -> Vec<Perm> {
        let g = i64::from(self.granularity);
        (0..=g).map(|k| Perm::new(k, g)).collect()
    }

    /// Checks that a state only mentions declared locations, domain values and amounts in `[0, 1]`.
    pub fn validate_state(&self, s: &State) -> Result<(), String> {
        for (r, p) in s.mask() {
            if *p < Perm::zero() || *p > Perm::from_integer(1) {
                return Err(format!("amount {p} for {r} outside [0, 1]"));
            }
            match r {
                ResourceId::Field(l) if !self.has_loc(l) => return Err(format!("undeclared location {l}")),
                ResourceId::Pred { name, args } => match self.predicates.get(name) {
                    None => return Err(format!("undeclared predicate {name}")),
                    Some(d) if d.params.len() != args.len() => return Err(format!("arity mismatch for {r}")),
                    _ => {}
                },
                _ => {}
            }
        }
        for (l, v) in s.heap() {
            match self.domain(l) {
                None => return Err(format!("undeclared location {l}")),
                Some(d) if !d.contains(v) => return Err(format!("value {v} outside the domain of {l}")),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Universe, UniverseError> {
        let mut u = Universe {
            granularity: 1,
            refs: BTreeSet::new(),
            fields: BTreeMap::new(),
            locations: BTreeMap::new(),
            predicates: BTreeMap::new(),
        };
        let mut saw_header = false;
        let mut saw_granularity = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| UniverseError { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != UNIVERSE_HEADER {
                    return Err(err(format!("expected header `{UNIVERSE_HEADER}`")));
                }
                saw_header = true;
                continue;
            }
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match kw {
                "granularity" => {
                    let g: u32 = rest.parse().map_err(|_| err(format!("bad granularity `{rest}`")))?;
                    if g == 0 {
                        return Err(err("granularity must be positive".into()));
                    }
                    u.granularity = g;
                    saw_granularity = true;
                }
                "refs" => {
                    for r in rest.split_whitespace() {
                        if !is_ident(r) || r == "null" {
                            return Err(err(format!("bad reference name `{r}`")));
                        }
                        u.refs.insert(Name::new(r));
                    }
                }
                "field" => {
                    let (n, t) = rest.split_once(':').ok_or_else(|| err("expected `field name: Type`".into()))?;
                    let n = n.trim();
                    if !is_ident(n) {
                        return Err(err(format!("bad field name `{n}`")));
                    }
                    let t = FieldType::parse(t.trim()).map_err(err)?;
                    if u.fields.insert(Name::new(n), t).is_some() {
                        return Err(err(format!("duplicate field `{n}`")));
                    }
                }
                "loc" => {
                    let (l, d) = rest.split_once(" in ").ok_or_else(|| err("expected `loc r.f in {..}`".into()))?;
                    let (obj, field) = l.trim().split_once('.').ok_or_else(|| err("expected `r.f`".into()))?;
                    let loc = Loc::new(obj.trim(), field.trim());
                    if obj.trim() == "null" {
                        return Err(err("null carries no locations".into()));
                    }
                    if !u.refs.contains(&loc.obj) {
                        return Err(err(format!("undeclared reference `{}`", loc.obj)));
                    }
                    let ty =
                        *u.fields.get(&loc.field).ok_or_else(|| err(format!("undeclared field `{}`", loc.field)))?;
                    let inner = d
                        .trim()
                        .strip_prefix('{')
                        .and_then(|s| s.strip_suffix('}'))
                        .ok_or_else(|| err("domain must be written `{v1, v2}`".into()))?;
                    let mut dom = Vec::new();
                    for v in inner.split(',').filter(|v| !v.trim().is_empty()) {
                        let v = Value::parse_token(v).map_err(err)?;
                        if !ty.admits(&v) {
                            return Err(err(format!("value {v} does not have type {}", ty.name())));
                        }
                        if let Value::Ref(r) = &v {
                            if !u.refs.contains(r) {
                                return Err(err(format!("undeclared reference `{r}`")));
                            }
                        }
                        if !dom.contains(&v) {
                            dom.push(v);
                        }
                    }
                    if dom.is_empty() {
                        return Err(err(format!("empty domain for {loc}")));
                    }
                    dom.sort();
                    if u.locations.insert(loc.clone(), dom).is_some() {
                        return Err(err(format!("duplicate location {loc}")));
                    }
                }
                "predicate" => {
                    let (head, body) =
                        rest.split_once('=').ok_or_else(|| err("expected `predicate P(a) = body`".into()))?;
                    let head = head.trim();
                    let open = head.find('(').ok_or_else(|| err("expected parameter list".into()))?;
                    let name = head[..open].trim();
                    let params_text =
                        head[open + 1..].strip_suffix(')').ok_or_else(|| err("unclosed parameter list".into()))?;
                    if !is_ident(name) {
                        return Err(err(format!("bad predicate name `{name}`")));
                    }
                    let params: Vec<Name> = params_text
                        .split(',')
                        .map(str::trim)
                        .filter(|p| !p.is_empty())
                        .map(|p| if is_ident(p) { Ok(Name::new(p)) } else { Err(err(format!("bad parameter `{p}`"))) })
                        .collect::<Result<_, _>>()?;
                    let body = parse_assertion(body.trim()).map_err(|e| err(format!("predicate body: {e}")))?;
                    if u.predicates.insert(Name::new(name), PredicateDef { params, body }).is_some() {
                        return Err(err(format!("duplicate predicate `{name}`")));
                    }
                }
                _ => return Err(err(format!("unknown directive `{kw}`"))),
            }
        }
        if !saw_header {
            return Err(UniverseError { line: 1, msg: format!("missing header `{UNIVERSE_HEADER}`") });
        }
        if !saw_granularity {
            return Err(UniverseError { line: 1, msg: "missing `granularity`".into() });
        }
        u.check_predicates()?;
        Ok(u)
    }

    fn check_predicates(&self) -> Result<(), UniverseError> {
        let err = |msg: String| UniverseError { line: 0, msg };
        for (name, def) in &self.predicates {
            if def.body.contains_wand() {
                return Err(err(format!("predicate {name} mentions a wand")));
            }
            let mut seen = BTreeSet::new();
            self.reaches(name, &mut seen);
            if seen.contains(name) {
                return Err(err(format!("predicate {name} is recursive")));
            }
            let mut bad_field = None;
            def.body.visit_exprs(&mut |e| {
                e.visit(&mut |x| {
                    if let crate::assertions::Expr::Field(_, f) = x {
                        if !self.fields.contains_key(f) {
                            bad_field = Some(f.clone());
                        }
                    }
                });
            });
            for f in acc_fields(&def.body) {
                if !self.fields.contains_key(&f) {
                    bad_field = Some(f);
                }
            }
            if let Some(f) = bad_field {
                return Err(err(format!("predicate {name} mentions undeclared field {f}")));
            }
            for p in called_preds(&def.body) {
                if !self.predicates.contains_key(&p) {
                    return Err(err(format!("predicate {name} calls undeclared predicate {p}")));
                }
            }
        }
        Ok(())
    }

    fn reaches(&self, from: &Name, seen: &mut BTreeSet<Name>) {
        if let Some(def) = self.predicates.get(from) {
            for p in called_preds(&def.body) {
                if seen.insert(p.clone()) {
                    self.reaches(&p, seen);
                }
            }
        }
    }

    /// A universe with the given locations, reference list and granularity; field types are inferred.
    pub fn build(granularity: u32, locs: &[(&str, &str, &[Value])]) -> Universe {
        let mut u = Universe {
            granularity,
            refs: BTreeSet::new(),
            fields: BTreeMap::new(),
            locations: BTreeMap::new(),
            predicates: BTreeMap::new(),
        };
        for (obj, field, dom) in locs {
            u.refs.insert(Name::new(obj));
            for v in dom.iter() {
                if let Value::Ref(r) = v {
                    u.refs.insert(r.clone());
                }
            }
            let ty = match dom.first() {
                Some(Value::Bool(_)) => FieldType::Bool,
                Some(Value::Int(_)) => FieldType::Int,
                _ => FieldType::Ref,
            };
            u.fields.insert(Name::new(field), ty);
            let mut d = dom.to_vec();
            d.sort();
            u.locations.insert(Loc::new(obj, field), d);
        }
        u
    }
}

fn called_preds(a: &Assertion) -> Vec<Name> {
    match a {
        Assertion::Pred(n, _, _) => vec![n.clone()],
        Assertion::Star(x, y) | Assertion::Or(x, y) | Assertion::Wand(x, y, _) => {
            let mut v = called_preds(x);
            v.extend(called_preds(y));
            v
        }
        Assertion::Imp(_, x) => called_preds(x),
        _ => Vec::new(),
    }
}

fn acc_fields(a: &Assertion) -> Vec<Name> {
    match a {
        Assertion::Acc(_, f, _) => vec![f.clone()],
        Assertion::Star(x, y) | Assertion::Or(x, y) | Assertion::Wand(x, y, _) => {
            let mut v = acc_fields(x);
            v.extend(acc_fields(y));
            v
        }
        Assertion::Imp(_, x) => acc_fields(x),
        _ => Vec::new(),
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{UNIVERSE_HEADER}")?;
        writeln!(f, "granularity {}", self.granularity)?;
        let refs: Vec<String> = self.refs.iter().map(ToString::to_string).collect();
        writeln!(f, "refs {}", refs.join(" "))?;
        for (n, t) in &self.fields {
            writeln!(f, "field {n}: {}", t.name())?;
        }
        for (l, d) in &self.locations {
            let vals: Vec<String> = d.iter().map(ToString::to_string).collect();
            writeln!(f, "loc {l} in {{{}}}", vals.join(", "))?;
        }
        for (n, d) in &self.predicates {
            let ps: Vec<String> = d.params.iter().map(ToString::to_string).collect();
            writeln!(f, "predicate {n}({}) = {}", ps.join(", "), d.body)?;
        }
        Ok(())
    }
}
