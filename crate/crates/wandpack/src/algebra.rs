//! The separation-algebra contract and an exhaustive law suite for its axioms.
//!
//! The suite works on any finite carrier given as a slice of states. Sums are tabulated
//! once (by index) so that the triple-quantified laws reduce to table lookups; a sum
//! falling outside the carrier is recomputed with the real operations.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct AlgebraError(pub String);

/// A partial commutative monoid with a core and a stability predicate.
pub trait SeparationAlgebra: Clone + Eq {
    fn unit() -> Self;
    /// `None` when the sum is undefined.
    fn add(&self, other: &Self) -> Option<Self>;
    fn core(&self) -> Self;
    fn is_stable(&self) -> bool;
    fn geq(&self, other: &Self) -> bool;
    /// The ⪰-largest `r` with `self = other ⊕ r`.
    fn sub(&self, other: &Self) -> Result<Self, AlgebraError>;

    fn compatible(&self, other: &Self) -> bool {
        self.add(other).is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AxiomId {
    #[serde(rename = "neutral")]
    Neutral,
    #[serde(rename = "commutativity")]
    Commutativity,
    #[serde(rename = "associativity")]
    Associativity,
    #[serde(rename = "core-a")]
    CoreA,
    #[serde(rename = "core-b")]
    CoreB,
    #[serde(rename = "core-c")]
    CoreC,
    #[serde(rename = "stability-d")]
    StabilityD,
    #[serde(rename = "positivity-e")]
    PositivityE,
    #[serde(rename = "cancellativity-f")]
    CancellativityF,
}

impl AxiomId {
    pub const ALL: [AxiomId; 9] = [
        AxiomId::Neutral,
        AxiomId::Commutativity,
        AxiomId::Associativity,
        AxiomId::CoreA,
        AxiomId::CoreB,
        AxiomId::CoreC,
        AxiomId::StabilityD,
        AxiomId::PositivityE,
        AxiomId::CancellativityF,
    ];

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            AxiomId::Neutral => "neutral",
            AxiomId::Commutativity => "commutativity",
            AxiomId::Associativity => "associativity",
            AxiomId::CoreA => "core-a",
            AxiomId::CoreB => "core-b",
            AxiomId::CoreC => "core-c",
            AxiomId::StabilityD => "stability-d",
            AxiomId::PositivityE => "positivity-e",
            AxiomId::CancellativityF => "cancellativity-f",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraLawReport<S> {
    pub axiom: AxiomId,
    pub passed: bool,
    /// Instances examined (tuples for which the premise was evaluated).
    pub checked: u64,
    pub counterexample: Option<Vec<S>>,
}

const UNDEF: u32 = u32::MAX;
const OUTSIDE: u32 = u32::MAX - 1;

struct Carrier<'a, S> {
    states: &'a [S],
    table: Vec<u32>,
    cores: Vec<u32>,
}

impl<'a, S> Carrier<'a, S>
where
    S: SeparationAlgebra + Hash + Sync + Send,
{
    fn new(states: &'a [S]) -> Self {
        let index: HashMap<&S, u32> = states.iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
        let n = states.len();
        let lookup = |s: Option<S>| match s {
            None => UNDEF,
            Some(s) => index.get(&s).copied().unwrap_or(OUTSIDE),
        };
        let table: Vec<u32> = (0..n * n).into_par_iter().map(|k| lookup(states[k / n].add(&states[k % n]))).collect();
        let cores = states.iter().map(|s| lookup(Some(s.core()))).collect();
        Carrier { states, table, cores }
    }

    fn n(&self) -> usize {
        self.states.len()
    }

    fn sum_idx(&self, a: usize, b: usize) -> u32 {
        self.table[a * self.n() + b]
    }

    /// Sum as a value; only used on slow paths.
    fn sum(&self, a: &S, b: &S) -> Option<S> {
        a.add(b)
    }

    /// `(x ⊕ y)` where `x` is given by index code (possibly outside the carrier).
    fn add_code(&self, x: u32, x_val: &Option<S>, c: usize) -> (u32, Option<S>) {
        match x {
            UNDEF => (UNDEF, None),
            OUTSIDE => {
                let v = x_val.as_ref().and_then(|v| v.add(&self.states[c]));
                (if v.is_some() { OUTSIDE } else { UNDEF }, v)
            }
            i => {
                let code = self.sum_idx(i as usize, c);
                let val = if code == OUTSIDE { self.sum(&self.states[i as usize], &self.states[c]) } else { None };
                (code, val)
            }
        }
    }

    fn value(&self, code: u32, val: &Option<S>) -> Option<S> {
        match code {
            UNDEF => None,
            OUTSIDE => val.clone(),
            i => Some(self.states[i as usize].clone()),
        }
    }
}

fn report<S>(axiom: AxiomId, checked: u64, cex: Option<Vec<S>>) -> AlgebraLawReport<S> {
    AlgebraLawReport { axiom, passed: cex.is_none(), checked, counterexample: cex }
}

/// Evaluates every axiom over all tuples drawn from `states`.
pub fn check_laws<S>(states: &[S]) -> Vec<AlgebraLawReport<S>>
where
    S: SeparationAlgebra + Hash + Sync + Send,
{
    let c = Carrier::new(states);
    let n = c.n();
    let st = states;
    let e = S::unit();
    let mut out = Vec::new();

    let cex = st.par_iter().find_first(|a| e.add(a).as_ref() != Some(*a) || a.add(&e).as_ref() != Some(*a));
    out.push(report(AxiomId::Neutral, n as u64, cex.map(|a| vec![a.clone()])));

    let cex = (0..n * n).into_par_iter().find_first(|&k| {
        let (a, b) = (k / n, k % n);
        let (x, y) = (c.sum_idx(a, b), c.sum_idx(b, a));
        if x == OUTSIDE || y == OUTSIDE {
            st[a].add(&st[b]) != st[b].add(&st[a])
        } else {
            x != y
        }
    });
    out.push(report(AxiomId::Commutativity, (n * n) as u64, cex.map(|k| vec![st[k / n].clone(), st[k % n].clone()])));

    let cex = (0..n * n).into_par_iter().find_map_first(|k| {
        let (a, b) = (k / n, k % n);
        let ab = c.sum_idx(a, b);
        let ab_val = if ab == OUTSIDE { st[a].add(&st[b]) } else { None };
        for z in 0..n {
            let bc = c.sum_idx(b, z);
            if ab == UNDEF && bc == UNDEF {
                continue;
            }
            let l = c.add_code(ab, &ab_val, z);
            let r = match bc {
                UNDEF => (UNDEF, None),
                OUTSIDE => {
                    let v = st[b].add(&st[z]).and_then(|bc| st[a].add(&bc));
                    (if v.is_some() { OUTSIDE } else { UNDEF }, v)
                }
                i => {
                    let code = c.sum_idx(a, i as usize);
                    let v = if code == OUTSIDE { st[a].add(&st[i as usize]) } else { None };
                    (code, v)
                }
            };
            let same =
                if l.0 == OUTSIDE || r.0 == OUTSIDE { c.value(l.0, &l.1) == c.value(r.0, &r.1) } else { l.0 == r.0 };
            if !same {
                return Some(vec![st[a].clone(), st[b].clone(), st[z].clone()]);
            }
        }
        None
    });
    out.push(report(AxiomId::Associativity, (n * n * n) as u64, cex));

    let cex = st.par_iter().find_first(|x| {
        let cx = x.core();
        x.add(&cx).as_ref() != Some(*x) || cx.add(&cx).as_ref() != Some(&cx)
    });
    out.push(report(AxiomId::CoreA, n as u64, cex.map(|x| vec![x.clone()])));

    let cex = (0..n * n).into_par_iter().find_map_first(|k| {
        let (x, z) = (k / n, k % n);
        if c.sum_idx(x, z) != x as u32 {
            return None;
        }
        let core_x = st[x].core();
        let found = (0..n).any(|r| match c.sum_idx(z, r) {
            UNDEF => false,
            OUTSIDE => st[z].add(&st[r]).as_ref() == Some(&core_x),
            i => c.cores[x] == i || st[i as usize] == core_x,
        });
        if found {
            None
        } else {
            Some(vec![st[x].clone(), st[z].clone()])
        }
    });
    out.push(report(AxiomId::CoreB, (n * n) as u64, cex));

    let cex = (0..n * n).into_par_iter().find_map_first(|k| {
        let (a, b) = (k / n, k % n);
        if c.sum_idx(a, b) == UNDEF {
            return None;
        }
        let sum = st[a].add(&st[b])?;
        if st[a].core().add(&st[b].core()) == Some(sum.core()) {
            None
        } else {
            Some(vec![st[a].clone(), st[b].clone()])
        }
    });
    out.push(report(AxiomId::CoreC, (n * n) as u64, cex));

    let unit_stable = e.is_stable();
    let stable: Vec<bool> = st.iter().map(S::is_stable).collect();
    let cex = if unit_stable {
        (0..n * n).into_par_iter().find_map_first(|k| {
            let (a, b) = (k / n, k % n);
            if !(stable[a] && stable[b]) {
                return None;
            }
            let ok = match c.sum_idx(a, b) {
                UNDEF => true,
                OUTSIDE => st[a].add(&st[b]).is_some_and(|s| s.is_stable()),
                i => stable[i as usize],
            };
            if ok {
                None
            } else {
                Some(vec![st[a].clone(), st[b].clone()])
            }
        })
    } else {
        Some(vec![e.clone()])
    };
    out.push(report(AxiomId::StabilityD, (n * n) as u64, cex));

    let cex = (0..n * n).into_par_iter().find_map_first(|k| {
        let (a, b) = (k / n, k % n);
        if c.sum_idx(a, b) == UNDEF {
            return None;
        }
        let sum = st[a].add(&st[b])?;
        if sum.add(&sum).as_ref() != Some(&sum) {
            return None;
        }
        if st[a].add(&st[a]).as_ref() == Some(&st[a]) {
            None
        } else {
            Some(vec![st[a].clone(), st[b].clone()])
        }
    });
    out.push(report(AxiomId::PositivityE, (n * n) as u64, cex));

    let mut by_core: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, code) in c.cores.iter().enumerate() {
        by_core.entry(*code).or_default().push(i);
    }
    let cex = (0..n * n).into_par_iter().find_map_first(|k| {
        let (b, x) = (k / n, k % n);
        let bx = c.sum_idx(b, x);
        if bx == UNDEF {
            return None;
        }
        let group: Vec<usize> = if c.cores[x] == OUTSIDE {
            (0..n).filter(|&y| st[y].core() == st[x].core()).collect()
        } else {
            by_core.get(&c.cores[x]).cloned().unwrap_or_default()
        };
        for y in group {
            if y == x {
                continue;
            }
            let by = c.sum_idx(b, y);
            let equal = if bx == OUTSIDE || by == OUTSIDE { st[b].add(&st[x]) == st[b].add(&st[y]) } else { bx == by };
            if equal {
                return Some(vec![st[b].clone(), st[x].clone(), st[y].clone()]);
            }
        }
        None
    });
    out.push(report(AxiomId::CancellativityF, (n * n) as u64, cex));

    out
}

/// Checks every axiom on all states of `u` (field permissions and optional values).
pub fn check_axioms(
    u: &crate::state_model::Universe,
    budget: u128,
) -> Result<Vec<AlgebraLawReport<crate::state_model::State>>, crate::oracle::OracleError> {
    let states = crate::oracle::EnumerationPlan::new(u).budget(budget).states()?;
    Ok(check_laws(&states))
}
