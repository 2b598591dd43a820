//! States `(π, h)`: a permission mask over resource identifiers and a partial heap
//! over field locations.
//!
//! Text form: `{x.f@1=y, y.g@1/2=0, x.g@0=1, P(x)@1, wand[acc(x.f) --* acc(x.f)]@1}`.
//! An entry `loc@p=v` carries both a mask and a heap entry; `loc@0=v` is a heap value
//! held without permission. Masks never store zero entries, so structural equality is
//! semantic equality.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use super::value::{fmt_perm, is_ident, parse_perm, Name, Perm, Value};

/// A heap location `obj.field`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc {
    pub obj: Name,
    pub field: Name,
}

impl Loc {
    #[must_use]
    pub fn new(obj: &str, field: &str) -> Self {
        Loc { obj: Name::new(obj), field: Name::new(field) }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.obj, self.field)
    }
}

impl fmt::Debug for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Anything a mask can hold permission to.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ResourceId {
    Field(Loc),
    Pred {
        name: Name,
        args: Vec<Value>,
    },
    /// Closed, canonically printed wand text.
    Wand(Name),
}

impl ResourceId {
    #[must_use]
    pub fn as_field(&self) -> Option<&Loc> {
        match self {
            ResourceId::Field(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceId::Field(l) => write!(f, "{l}"),
            ResourceId::Pred { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ResourceId::Wand(k) => write!(f, "wand[{k}]"),
        }
    }
}

impl fmt::Debug for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub type Mask = BTreeMap<ResourceId, Perm>;
pub type Heap = BTreeMap<Loc, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("subtraction {minuend} ⊖ {subtrahend} is undefined: the minuend is not ⪰ the subtrahend")]
    NotGeq { minuend: String, subtrahend: String },
    #[error("malformed state text: {0}")]
    Parse(String),
}

/// An element of the separation algebra.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State {
    mask: Mask,
    heap: Heap,
}

impl State {
    /// The neutral element `e = (0, ∅)`.
    #[must_use]
    pub fn unit() -> Self {
        State::default()
    }

    /// Builds a state, dropping zero mask entries.
    #[must_use]
    pub fn from_parts(mask: Mask, heap: Heap) -> Self {
        let mask = mask.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        State { mask, heap }
    }

    #[must_use]
    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    #[must_use]
    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    #[must_use]
    pub fn is_unit(&self) -> bool {
        self.mask.is_empty() && self.heap.is_empty()
    }

    #[must_use]
    pub fn perm(&self, r: &ResourceId) -> Perm {
        self.mask.get(r).copied().unwrap_or_else(Perm::zero)
    }

    #[must_use]
    pub fn field_perm(&self, l: &Loc) -> Perm {
        self.perm(&ResourceId::Field(l.clone()))
    }

    #[must_use]
    pub fn value(&self, l: &Loc) -> Option<&Value> {
        self.heap.get(l)
    }

    /// Single field entry `{l@p=v}`.
    #[must_use]
    pub fn field(l: Loc, p: Perm, v: Option<Value>) -> Self {
        let mut s = State::unit();
        if let Some(v) = v {
            s.heap.insert(l.clone(), v);
        }
        s.set_perm(ResourceId::Field(l), p);
        s
    }

    /// Single resource entry without heap content.
    #[must_use]
    pub fn resource(r: ResourceId, p: Perm) -> Self {
        let mut s = State::unit();
        s.set_perm(r, p);
        s
    }

    pub fn set_perm(&mut self, r: ResourceId, p: Perm) {
        if p.is_zero() {
            self.mask.remove(&r);
        } else {
            self.mask.insert(r, p);
        }
    }

    pub fn set_value(&mut self, l: Loc, v: Value) {
        self.heap.insert(l, v);
    }

    pub fn remove_value(&mut self, l: &Loc) {
        self.heap.remove(l);
    }

    #[must_use]
    pub fn with_value(mut self, l: Loc, v: Value) -> Self {
        self.set_value(l, v);
        self
    }

    /// `a ⊕ b`: defined iff the heaps agree on their common domain and every mask sum is at most 1.
    #[must_use]
    pub fn add(&self, other: &State) -> Option<State> {
        let (big, small) = if self.mask.len() + self.heap.len() >= other.mask.len() + other.heap.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (l, v) in &small.heap {
            match out.heap.get(l) {
                Some(w) if w != v => return None,
                Some(_) => {}
                None => {
                    out.heap.insert(l.clone(), v.clone());
                }
            }
        }
        for (r, p) in &small.mask {
            let e = out.mask.entry(r.clone()).or_insert_with(Perm::zero);
            *e += p;
            if *e > Perm::one() {
                return None;
            }
        }
        Some(out)
    }

    #[must_use]
    pub fn compatible(&self, other: &State) -> bool {
        self.heaps_agree(other) && other.mask.iter().all(|(r, p)| self.perm(r) + p <= Perm::one())
    }

    #[must_use]
    pub fn heaps_agree(&self, other: &State) -> bool {
        let (a, b) = if self.heap.len() <= other.heap.len() { (self, other) } else { (other, self) };
        a.heap.iter().all(|(l, v)| b.heap.get(l).is_none_or(|w| w == v))
    }

    /// `|σ| = (0, h)`.
    #[must_use]
    pub fn core(&self) -> State {
        State { mask: Mask::new(), heap: self.heap.clone() }
    }

    /// Every field location with positive permission has a heap value.
    #[must_use]
    pub fn is_valued(&self) -> bool {
        self.held_fields().all(|l| self.heap.contains_key(l))
    }

    /// Field locations: positive permission iff a heap value is present.
    #[must_use]
    pub fn is_stable(&self) -> bool {
        self.is_valued() && self.heap.keys().all(|l| self.mask.contains_key(&ResourceId::Field(l.clone())))
    }

    /// `a ⪰ b` iff `∃r. a = b ⊕ r`; equivalently every amount of `b` is covered and `b`'s heap is part of `a`'s.
    #[must_use]
    pub fn geq(&self, other: &State) -> bool {
        other.mask.iter().all(|(r, p)| self.perm(r) >= *p)
            && other.heap.iter().all(|(l, v)| self.heap.get(l) == Some(v))
    }

    /// `a ⊖ b`: the ⪰-largest `r` with `a = b ⊕ r`; mask difference with the full heap of `a`.
    pub fn sub(&self, other: &State) -> Result<State, StateError> {
        if !self.geq(other) {
            return Err(StateError::NotGeq { minuend: self.to_string(), subtrahend: other.to_string() });
        }
        let mut out = self.clone();
        for (r, p) in &other.mask {
            let left = out.perm(r) - p;
            out.set_perm(r.clone(), left);
        }
        Ok(out)
    }

    /// The stable part: heap restricted to locations with positive permission.
    #[must_use]
    pub fn stable_part(&self) -> State {
        let heap = self
            .heap
            .iter()
            .filter(|(l, _)| self.mask.contains_key(&ResourceId::Field((*l).clone())))
            .map(|(l, v)| (l.clone(), v.clone()))
            .collect();
        State { mask: self.mask.clone(), heap }
    }

    /// Field locations with positive permission.
    pub fn held_fields(&self) -> impl Iterator<Item = &Loc> {
        self.mask.keys().filter_map(ResourceId::as_field)
    }

    /// Parses the text form.
    pub fn parse(text: &str) -> Result<State, StateError> {
        let t = text.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| StateError::Parse(format!("expected braces around `{t}`")))?;
        let mut st = State::unit();
        for entry in split_top_level(inner) {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            parse_entry(entry, &mut st)?;
        }
        Ok(st)
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_entry(entry: &str, st: &mut State) -> Result<(), StateError> {
    let bad = |m: &str| StateError::Parse(format!("{m} in entry `{entry}`"));
    if let Some(rest) = entry.strip_prefix("wand[") {
        let close = rest.rfind(']').ok_or_else(|| bad("unclosed wand key"))?;
        let key = rest[..close].trim();
        let tail = rest[close + 1..].trim();
        let amount = tail.strip_prefix('@').ok_or_else(|| bad("missing amount"))?;
        let p = parse_perm(amount).map_err(|e| bad(&e))?;
        add_entry(st, ResourceId::Wand(Name::new(key)), p, entry)?;
        return Ok(());
    }
    let (head, value) = match entry.find('=') {
        Some(i) => (entry[..i].trim(), Some(entry[i + 1..].trim())),
        None => (entry, None),
    };
    let (rid_text, amount) = match head.rfind('@') {
        Some(i) => (head[..i].trim(), Some(head[i + 1..].trim())),
        None => (head, None),
    };
    let p = match amount {
        Some(a) => parse_perm(a).map_err(|e| bad(&e))?,
        None => Perm::zero(),
    };
    if let Some(open) = rid_text.find('(') {
        let name = rid_text[..open].trim();
        let args_text = rid_text[open + 1..].strip_suffix(')').ok_or_else(|| bad("unclosed predicate arguments"))?;
        if !is_ident(name) {
            return Err(bad("bad predicate name"));
        }
        if value.is_some() {
            return Err(bad("predicate instances carry no heap value"));
        }
        let mut args = Vec::new();
        for a in args_text.split(',') {
            if a.trim().is_empty() {
                continue;
            }
            args.push(Value::parse_token(a).map_err(|e| bad(&e))?);
        }
        add_entry(st, ResourceId::Pred { name: Name::new(name), args }, p, entry)?;
        return Ok(());
    }
    let (obj, field) = rid_text.split_once('.').ok_or_else(|| bad("expected `obj.field`"))?;
    if !is_ident(obj.trim()) || !is_ident(field.trim()) {
        return Err(bad("bad location"));
    }
    let loc = Loc::new(obj.trim(), field.trim());
    if let Some(v) = value {
        let v = Value::parse_token(v).map_err(|e| bad(&e))?;
        if st.heap.insert(loc.clone(), v).is_some() {
            return Err(bad("duplicate location"));
        }
    } else if amount.is_none() {
        return Err(bad("expected `@amount` or `=value`"));
    }
    add_entry(st, ResourceId::Field(loc), p, entry)
}

fn add_entry(st: &mut State, r: ResourceId, p: Perm, entry: &str) -> Result<(), StateError> {
    if st.mask.contains_key(&r) {
        return Err(StateError::Parse(format!("duplicate resource in entry `{entry}`")));
    }
    st.set_perm(r, p);
    Ok(())
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(ResourceId, String)> = Vec::new();
        for (r, p) in &self.mask {
            let mut s = format!("{r}@{}", fmt_perm(p));
            if let ResourceId::Field(l) = r {
                if let Some(v) = self.heap.get(l) {
                    s.push_str(&format!("={v}"));
                }
            }
            parts.push((r.clone(), s));
        }
        for (l, v) in &self.heap {
            let r = ResourceId::Field(l.clone());
            if !self.mask.contains_key(&r) {
                parts.push((r, format!("{l}@0={v}")));
            }
        }
        parts.sort_by(|a, b| a.0.cmp(&b.0));
        f.write_str("{")?;
        for (i, (_, s)) in parts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(s)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> State {
        State::parse(s).unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in
            ["{}", "{x.f@1=y}", "{x.f@1/2=y, y.g@0=3}", "{P(x, null)@1/2}", "{x.f@1, wand[acc(x.f) --* acc(x.f)]@1}"]
        {
            assert_eq!(st(s).to_string(), s);
        }
        assert_eq!(st("{y.g=0}").to_string(), "{y.g@0=0}");
        assert!(State::parse("{x.f@1=y, x.f@1=z}").is_err());
        assert!(State::parse("x.f@1").is_err());
    }

    #[test]
    fn add_examples() {
        assert_eq!(State::unit().add(&st("{x.f@1=y}")), Some(st("{x.f@1=y}")));
        assert_eq!(st("{y.g@1/2=0}").add(&st("{y.g@1/2=0}")), Some(st("{y.g@1=0}")));
        assert_eq!(st("{x.f@1/2=y}").add(&st("{x.f@1/2=z}")), None);
        assert!(!st("{x.f@1=y}").compatible(&st("{x.f@1/2=y}")));
    }

    #[test]
    fn core_and_stability() {
        assert_eq!(st("{x.f@1=y}").core(), st("{x.f@0=y}"));
        assert!(State::unit().core().is_unit());
        assert!(st("{x.f@1/2=y}").is_stable());
        assert!(!st("{x.f@0=y}").is_stable());
        assert!(!st("{x.f@1}").is_stable());
        assert!(st("{P(x)@1}").is_stable());
        assert!(State::unit().is_stable());
    }

    #[test]
    fn sub_keeps_full_heap() {
        let a = st("{x.f@1=y, y.g@1=0}");
        let b = st("{y.g@1=0}");
        assert_eq!(a.sub(&b).unwrap(), st("{x.f@1=y, y.g@0=0}"));
        assert!(b.sub(&a).is_err());
        assert!(a.geq(&State::unit()));
    }
}
