//! Shared helpers for the integration tests: small universes, random well-formed
//! assertions and wands, and corpus paths.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wandpack::assertions::{parse_assertion, wf, Assertion, Store, WandKind};
use wandpack::oracle::EnumerationPlan;
use wandpack::state_model::{Name, State, Universe, Value};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

pub fn load_universe(name: &str) -> Universe {
    Universe::parse(&std::fs::read_to_string(corpus(name)).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn store() -> Store {
    Store::parse("x=x, y=y").unwrap()
}

pub fn assertion(s: &str) -> Assertion {
    parse_assertion(s).unwrap_or_else(|e| panic!("cannot parse `{s}`: {e}"))
}

pub fn state(s: &str) -> State {
    State::parse(s).unwrap()
}

pub fn with_kind(w: &Assertion, k: WandKind) -> Assertion {
    let (l, r, _) = w.as_wand().expect("a wand");
    Assertion::wand(l.clone(), r.clone(), k)
}

/// A location of a generated universe: object, field and domain.
#[derive(Clone, Debug)]
pub struct GenLoc {
    pub obj: &'static str,
    pub field: &'static str,
    pub dom: Vec<Value>,
}

impl GenLoc {
    fn text(&self) -> String {
        format!("{}.{}", self.obj, self.field)
    }
}

/// A small universe together with its locations, for generating assertions.
#[derive(Clone, Debug)]
pub struct GenUniverse {
    pub universe: Universe,
    pub locs: Vec<GenLoc>,
}

fn int(i: i64) -> Value {
    Value::Int(i)
}

fn r(n: &str) -> Value {
    Value::Ref(Name::new(n))
}

/// One of four fixed small universes, all of granularity 2.
pub fn gen_universe(rng: &mut impl Rng) -> GenUniverse {
    let locs = match rng.gen_range(0..4) {
        0 => vec![
            GenLoc { obj: "x", field: "f", dom: vec![int(0), int(1)] },
            GenLoc { obj: "x", field: "g", dom: vec![int(0)] },
        ],
        1 => vec![
            GenLoc { obj: "x", field: "f", dom: vec![r("x"), r("y")] },
            GenLoc { obj: "x", field: "g", dom: vec![int(0)] },
            GenLoc { obj: "y", field: "g", dom: vec![int(0)] },
        ],
        2 => vec![
            GenLoc { obj: "x", field: "b", dom: vec![Value::Bool(false), Value::Bool(true)] },
            GenLoc { obj: "x", field: "f", dom: vec![int(0)] },
            GenLoc { obj: "x", field: "g", dom: vec![int(0)] },
        ],
        _ => {
            vec![GenLoc { obj: "x", field: "f", dom: vec![int(0)] }, GenLoc { obj: "y", field: "f", dom: vec![int(0)] }]
        }
    };
    let table: Vec<(&str, &str, &[Value])> = locs.iter().map(|l| (l.obj, l.field, l.dom.as_slice())).collect();
    let mut universe = Universe::build(2, &table);
    universe.refs.insert(Name::new("y"));
    GenUniverse { universe, locs }
}

fn perm(rng: &mut impl Rng) -> &'static str {
    if rng.gen_bool(0.5) {
        "1"
    } else {
        "1/2"
    }
}

/// A self-framing conjunct over the universe's locations.
fn segment(rng: &mut impl Rng, gu: &GenUniverse) -> String {
    let l = gu.locs.choose(rng).expect("locations");
    let m = gu.locs.choose(rng).expect("locations");
    let v = l.dom.choose(rng).expect("domain");
    let deref = gu.locs.iter().find(|l| matches!(l.dom[0], Value::Ref(_)));
    match rng.gen_range(0..7) {
        0 | 1 => format!("acc({}, {})", l.text(), perm(rng)),
        2 => format!("acc({}, {}) * {} == {}", l.text(), perm(rng), l.text(), v),
        3 => format!("acc({}, {}) * ({} == {} ==> acc({}, {}))", l.text(), perm(rng), l.text(), v, m.text(), perm(rng)),
        4 => format!("(acc({}, {}) || acc({}, {}))", l.text(), perm(rng), m.text(), perm(rng)),
        5 => match deref {
            Some(d) => format!("acc({}, {}) * acc({}.g, {})", d.text(), perm(rng), d.text(), perm(rng)),
            None => "true".to_string(),
        },
        _ => "true".to_string(),
    }
}

/// A random well-formed assertion of one or two conjuncts.
pub fn gen_assertion(rng: &mut impl Rng, gu: &GenUniverse) -> Assertion {
    loop {
        let n = rng.gen_range(1..=2);
        let parts: Vec<String> = (0..n).map(|_| segment(rng, gu)).collect();
        let a = assertion(&parts.join(" * "));
        if wf(&a) {
            return a;
        }
    }
}

/// A random well-formed wand of the given kind.
pub fn gen_wand(rng: &mut impl Rng, gu: &GenUniverse, kind: WandKind) -> Assertion {
    Assertion::wand(gen_assertion(rng, gu), gen_assertion(rng, gu), kind)
}

/// A random stable state of the universe.
pub fn gen_stable_state(rng: &mut impl Rng, u: &Universe) -> State {
    let states = EnumerationPlan::new(u).stable_only().states().unwrap();
    states.choose(rng).expect("states").clone()
}

/// The programs of the golden corpus.
pub const PROGRAMS: [&str; 7] = ["fia_unsound", "choice_wand", "guarded", "combinable", "fold", "branches", "basics"];

pub const ALGORITHMS: [&str; 3] = ["fia", "sound", "combinable"];

/// A random stable outer state that holds most locations, with amounts biased towards 1.
pub fn gen_outer(rng: &mut impl Rng, gu: &GenUniverse) -> State {
    let parts: Vec<String> = gu
        .locs
        .iter()
        .filter_map(|l| {
            let p = *["0", "1/2", "1", "1"].choose(rng).expect("amounts");
            let v = l.dom.choose(rng).expect("domain");
            (p != "0").then(|| format!("{}@{}={}", l.text(), p, v))
        })
        .collect();
    state(&format!("{{{}}}", parts.join(", ")))
}
