//! The package operation.

use super::{Algorithm, Engine, PackageError, PackageOutcome, ProofScript};
use crate::assertions::{check_wf, wand_resource, Assertion, Store, WandKind};
use crate::package_logic::{
    check_derivation, check_derivation_lifted, extract_footprint, init_witness_set, Configuration, Context, Derivation,
    Transformer, WitnessPair, WitnessSet,
};
use crate::state_model::{State, Universe};

/// Everything a package operation reads.
#[derive(Clone, Copy)]
pub struct PackageRequest<'a> {
    pub universe: &'a Universe,
    pub store: &'a Store,
    /// The current outer state `σ`.
    pub outer: &'a State,
    pub wand: &'a Assertion,
    pub script: &'a ProofScript,
}

/// Runs `algorithm`. A `--*c` wand is always packaged with the lifted rules, except by
/// the per-case baseline.
#[must_use]
pub fn package(req: PackageRequest<'_>, algorithm: Algorithm) -> PackageOutcome {
    match algorithm {
        Algorithm::Fia => package_fia(req),
        Algorithm::Combinable => package_combinable(req),
        Algorithm::Sound => match req.wand.as_wand() {
            Some((_, _, WandKind::Combinable)) => package_combinable(req),
            _ => package_sound(req),
        },
    }
}

/// The sound algorithm: one footprint that works for every LHS state.
#[must_use]
pub fn package_sound(req: PackageRequest<'_>) -> PackageOutcome {
    run_sound(req, WandKind::Standard)
}

/// The sound algorithm with the lifted Extract, treating the wand as combinable.
#[must_use]
pub fn package_combinable(req: PackageRequest<'_>) -> PackageOutcome {
    run_sound(req, WandKind::Combinable)
}

fn sides(wand: &Assertion) -> Result<(&Assertion, &Assertion), PackageError> {
    let (l, r, _) = wand.as_wand().ok_or_else(|| PackageError(format!("`{wand}` is not a wand")))?;
    check_wf(l).map_err(|e| PackageError(format!("left-hand side is not well-formed: {e}")))?;
    check_wf(r).map_err(|e| PackageError(format!("right-hand side is not well-formed: {e}")))?;
    Ok((l, r))
}

/// `σ ⊖ footprint ⊕ wand instance`.
fn post_state(req: &PackageRequest<'_>, footprint: &State) -> Result<State, PackageError> {
    let rest = req.outer.sub(footprint).map_err(|e| PackageError(e.to_string()))?;
    let inst = State::resource(wand_resource(req.wand, req.store), crate::assertions::full());
    rest.add(&inst).ok_or_else(|| PackageError(format!("an instance of `{}` is already held", req.wand)))
}

fn run_sound(req: PackageRequest<'_>, kind: WandKind) -> PackageOutcome {
    match try_sound(&req, kind) {
        Ok(o) => o,
        Err(e) => PackageOutcome::failure(e.0),
    }
}

fn try_sound(req: &PackageRequest<'_>, kind: WandKind) -> Result<PackageOutcome, PackageError> {
    let (lhs, rhs) = sides(req.wand)?;
    let engine = Engine::new(req.universe, req.store, kind);
    let s0 = init_witness_set(lhs, req.universe, req.store, true, kind)?;
    let ctx0 = Context::new(req.outer.clone(), s0);
    let run = engine.run_script(ctx0.clone(), &[], req.script)?;
    let after_script = run.ctx.clone();
    let (fin, tree) = engine.prove_rhs(run.ctx, &[], rhs)?;
    let footprint = extract_footprint(req.outer, &fin.outer)?;

    // Without rewriting statements the script is a chain of Extracts above the tree.
    // Rewrites have no rule of their own, so the derivation starts after the script.
    let (ctx, tree) = if req.script.rewrites() {
        (after_script, tree)
    } else {
        (ctx0, run.extracts.into_iter().rev().fold(tree, |t, w| Derivation::extract(w, t)))
    };
    let conf = Configuration { rhs: rhs.clone(), pc: Vec::new(), ctx, store: req.store.clone() };
    let checked = if kind == WandKind::Combinable {
        check_derivation_lifted(&conf, &tree)
    } else {
        check_derivation(&conf, &tree)
    };
    match checked {
        Ok(c) if c.outer == fin.outer => {}
        Ok(c) => return Err(PackageError(format!("derivation check ends in {} instead of {}", c.outer, fin.outer))),
        Err(e) => return Err(PackageError(format!("derivation check failed: {e}"))),
    }
    let post = post_state(req, &footprint)?;
    Ok(PackageOutcome {
        status: Ok(()),
        footprint: Some(footprint),
        case_footprints: Vec::new(),
        post_states: vec![post],
        derivation: Some((conf, tree)),
    })
}

/// The per-case baseline: each minimal LHS state gets its own footprint.
///
/// Each case leaves a different outer state behind, which is where soundness is lost.
#[must_use]
pub fn package_fia(req: PackageRequest<'_>) -> PackageOutcome {
    match try_fia(&req) {
        Ok(o) => o,
        Err(e) => PackageOutcome::failure(e.0),
    }
}

fn try_fia(req: &PackageRequest<'_>) -> Result<PackageOutcome, PackageError> {
    let (lhs, rhs) = sides(req.wand)?;
    let engine = Engine::new(req.universe, req.store, WandKind::Standard);
    let cases = init_witness_set(lhs, req.universe, req.store, true, WandKind::Standard)?;
    let mut case_footprints = Vec::new();
    let mut post = Vec::new();
    for case in cases {
        let mut s = WitnessSet::new();
        s.insert(WitnessPair::new(case.a.clone(), State::unit(), Transformer::Identity));
        let run = engine
            .run_script(Context::new(req.outer.clone(), s), &[], req.script)
            .map_err(|e| PackageError(format!("case {}: {e}", case.a)))?;
        let (fin, _) =
            engine.prove_rhs(run.ctx, &[], rhs).map_err(|e| PackageError(format!("case {}: {e}", case.a)))?;
        let fp = extract_footprint(req.outer, &fin.outer)?;
        post.push(post_state(req, &fp)?);
        case_footprints.push((case.a, fp));
    }
    if case_footprints.is_empty() {
        post.push(post_state(req, &State::unit())?);
    }
    post.sort();
    post.dedup();
    Ok(PackageOutcome { status: Ok(()), footprint: None, case_footprints, post_states: post, derivation: None })
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

    fn u2() -> Universe {
        Universe::build(
            2,
            &[
                ("x", "b", &[Value::Bool(false), Value::Bool(true)]),
                ("x", "f", &[Value::Int(0)]),
                ("x", "g", &[Value::Int(0)]),
            ],
        )
    }

    fn st(s: &str) -> State {
        State::parse(s).unwrap()
    }

    const CHOICE_WAND: &str = "acc(x.f) && (x.f == y || x.f == z) --* acc(x.f) && acc(x.f.g)";

    #[test]
    fn choice_wand_footprints() {
        let u = u1();
        let store = Store::new();
        let outer = st("{y.g@1=0, z.g@1=0}");
        let wand = parse_assertion(CHOICE_WAND).unwrap();
        let script = ProofScript::default();
        let req = PackageRequest { universe: &u, store: &store, outer: &outer, wand: &wand, script: &script };
        let sound = package_sound(req);
        assert!(sound.is_success(), "{:?}", sound.status);
        assert_eq!(sound.footprint.unwrap(), outer);
        let fia = package_fia(req);
        assert!(fia.is_success());
        let fps: Vec<String> = fia.case_footprints.iter().map(|(_, f)| f.to_string()).collect();
        assert_eq!(fps, vec!["{y.g@1=0}", "{z.g@1=0}"]);
        assert_eq!(fia.post_states.len(), 2);
    }

    #[test]
    fn guarded_wand_on_booleans() {
        let u = u2();
        let store = Store::new();
        let outer = st("{x.b@1=false, x.f@1=0}");
        let wand = parse_assertion("acc(x.b, 1/2) --* acc(x.b, 1/2) && (x.b ==> acc(x.f))").unwrap();
        let script = ProofScript::default();
        let req = PackageRequest { universe: &u, store: &store, outer: &outer, wand: &wand, script: &script };
        let out = package_sound(req);
        assert!(out.is_success(), "{:?}", out.status);
        assert_eq!(out.footprint.unwrap(), st("{x.f@1=0}"));
    }

    #[test]
    fn scripted_assert_extracts_once() {
        let u = u1();
        let store = Store::new();
        let outer = st("{y.g@1=0, z.g@1=0}");
        let wand = parse_assertion(CHOICE_WAND).unwrap();
        let script = super::super::parse_script("assert x.f == y ? acc(y.g) : acc(z.g)").unwrap();
        let req = PackageRequest { universe: &u, store: &store, outer: &outer, wand: &wand, script: &script };
        let out = package_sound(req);
        assert!(out.is_success(), "{:?}", out.status);
        let (conf, tree) = out.derivation.unwrap();
        assert!(matches!(tree, Derivation::Extract { .. }));
        assert_eq!(conf.ctx.outer, outer);
    }

    #[test]
    fn missing_permission_fails() {
        let u = u2();
        let store = Store::new();
        let outer = st("{x.f@1/2=0}");
        let wand = parse_assertion("acc(x.f, 1/2) --* acc(x.g)").unwrap();
        let script = ProofScript::default();
        let req = PackageRequest { universe: &u, store: &store, outer: &outer, wand: &wand, script: &script };
        assert!(!package_sound(req).is_success());
        assert!(!package_combinable(req).is_success());
    }
}
