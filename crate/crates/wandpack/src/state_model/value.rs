//! Names, values and exact permission amounts.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

/// Exact permission amount.
pub type Perm = Ratio<i64>;

/// Cheaply clonable identifier (reference, field, variable or predicate name).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    #[must_use]
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    #[must_use]
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Run-time values: heap contents, store contents and expression results.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Ref(Name),
    Perm(Perm),
}

impl Value {
    #[must_use]
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Numeric view used for comparisons between integers and permission amounts.
    #[must_use]
    pub fn as_rational(&self) -> Option<Perm> {
        match self {
            Value::Int(i) => Some(Perm::from_integer(*i)),
            Value::Perm(p) => Some(*p),
            _ => None,
        }
    }

    /// Parses a heap value token: `null`, `true`, `false`, an integer, or a reference name.
    pub fn parse_token(tok: &str) -> Result<Value, String> {
        let t = tok.trim();
        match t {
            "" => Err("empty value".into()),
            "null" => Ok(Value::Null),
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => {
                if let Ok(i) = t.parse::<i64>() {
                    return Ok(Value::Int(i));
                }
                if t.contains('/') {
                    return parse_perm(t).map(Value::Perm);
                }
                if is_ident(t) {
                    Ok(Value::Ref(Name::new(t)))
                } else {
                    Err(format!("malformed value `{t}`"))
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Ref(r) => write!(f, "{r}"),
            Value::Perm(p) => f.write_str(&fmt_perm(p)),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[must_use]
pub fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Prints `1`, `0` or `n/d`.
#[must_use]
pub fn fmt_perm(p: &Perm) -> String {
    if p.is_integer() {
        format!("{}", p.numer())
    } else {
        format!("{}/{}", p.numer(), p.denom())
    }
}

/// Parses `write`, `none`, an integer, or `n/d`.
pub fn parse_perm(s: &str) -> Result<Perm, String> {
    let t = s.trim();
    match t {
        "write" => return Ok(Perm::one()),
        "none" => return Ok(Perm::zero()),
        _ => {}
    }
    let parsed = if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| format!("malformed amount `{t}`"))?;
        let d: i64 = d.trim().parse().map_err(|_| format!("malformed amount `{t}`"))?;
        if d <= 0 {
            return Err(format!("amount `{t}` has a non-positive denominator"));
        }
        Perm::new(n, d)
    } else {
        Perm::from_integer(t.parse().map_err(|_| format!("malformed amount `{t}`"))?)
    };
    if parsed < Perm::zero() {
        return Err(format!("negative amount `{t}`"));
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_text_round_trip() {
        for s in ["0", "1", "1/2", "3/4", "2"] {
            assert_eq!(fmt_perm(&parse_perm(s).unwrap()), s);
        }
        assert_eq!(parse_perm("write").unwrap(), Perm::one());
        assert_eq!(parse_perm("2/4").unwrap(), Perm::new(1, 2));
        assert!(parse_perm("-1/2").is_err());
        assert!(parse_perm("1/0").is_err());
    }

    #[test]
    fn value_tokens() {
        assert_eq!(Value::parse_token("null").unwrap(), Value::Null);
        assert_eq!(Value::parse_token("-3").unwrap(), Value::Int(-3));
        assert_eq!(Value::parse_token("y").unwrap(), Value::Ref(Name::new("y")));
        assert!(Value::parse_token("a.b").is_err());
    }
}
