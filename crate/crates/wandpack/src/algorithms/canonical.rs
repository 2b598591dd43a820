//! The Extract-first derivation for a known footprint.
//!
//! Given `σ_w ⊨ A --* B`, the derivation extracts all of `σ_w` at the root and then
//! proves `B` without further extraction. Choices are searched per pair: a greedy pick
//! of the first covered demand can strand a later atom when disjunctive demands overlap.

use crate::assertions::{demands, sat, Assertion, EvalCtx, Expr, Store, WandKind};
use crate::package_logic::{
    extend_pairs, init_witness_set, pc_holds, Choice, Configuration, Context, Derivation, WitnessPair,
};
use crate::state_model::{State, Universe};

/// Atoms of `b` in left-to-right order, each with the guards above it.
fn flatten(b: &Assertion, pc: &mut Vec<Expr>, out: &mut Vec<(Vec<Expr>, Assertion)>) {
    match b {
        Assertion::Star(x, y) => {
            flatten(x, pc, out);
            flatten(y, pc, out);
        }
        Assertion::Imp(g, x) => {
            pc.push(g.clone());
            flatten(x, pc, out);
            pc.pop();
        }
        atom => out.push((pc.clone(), atom.clone())),
    }
}

/// Choices of one pair for every atom, or `None` if none works.
fn search(
    atoms: &[(Vec<Expr>, Assertion)],
    p: &WitnessPair,
    store: &Store,
    heap_of: &State,
) -> Option<Vec<Option<State>>> {
    let Some(((pc, atom), rest)) = atoms.split_first() else {
        return Some(Vec::new());
    };
    let guard = pc_holds(pc, p, store).ok()?;
    if !guard {
        let mut tail = search(rest, p, store, heap_of)?;
        tail.insert(0, None);
        return Some(tail);
    }
    let ctx = EvalCtx::new(heap_of.heap(), store);
    let candidates: Vec<State> = match atom {
        Assertion::Pure(_) => vec![State::unit()],
        _ => demands(atom, &ctx, false).unwrap_or_default(),
    };
    let core = heap_of.core();
    for c in candidates {
        if !p.a.geq(&c) {
            continue;
        }
        let Some(with_core) = c.add(&core) else { continue };
        if !sat(&with_core, atom, store) {
            continue;
        }
        let (Ok(a), Some(b)) = (p.a.sub(&c), p.b.add(&c)) else { continue };
        let next = WitnessPair::new(a, b, p.t.clone());
        if let Some(mut tail) = search(rest, &next, store, heap_of) {
            tail.insert(0, Some(c));
            return Some(tail);
        }
    }
    None
}

fn build(b: &Assertion, next: &mut usize, per_atom: &[Vec<Choice>]) -> Derivation {
    match b {
        Assertion::Star(x, y) => {
            let d1 = build(x, next, per_atom);
            let d2 = build(y, next, per_atom);
            Derivation::star(d1, d2)
        }
        Assertion::Imp(_, x) => Derivation::implication(build(x, next, per_atom)),
        _ => {
            let i = *next;
            *next += 1;
            Derivation::Atom(per_atom[i].clone())
        }
    }
}

/// The configuration `⟨B, ∅, (σ_w, S_0)⟩` over minimal LHS states and its Extract-first
/// derivation. Fails if some LHS state has no choice sequence, which means `σ_w` is not
/// a footprint.
pub fn canonical_derivation(
    wand: &Assertion,
    sigma_w: &State,
    universe: &Universe,
    store: &Store,
) -> Result<(Configuration, Derivation), String> {
    let (lhs, rhs, kind) = wand.as_wand().ok_or_else(|| format!("`{wand}` is not a wand"))?;
    let s0 = init_witness_set(lhs, universe, store, true, kind)?;
    let ctx0 = Context::new(sigma_w.clone(), s0.clone());
    let pairs = extend_pairs(&s0, &State::unit(), sigma_w, kind == WandKind::Combinable)?;
    let mut atoms = Vec::new();
    flatten(rhs, &mut Vec::new(), &mut atoms);
    let mut per_atom: Vec<Vec<Choice>> = vec![Vec::new(); atoms.len()];
    for p in &pairs {
        let joint = p.joint().ok_or("incompatible pair after extraction")?;
        let seq = search(&atoms, p, store, &joint)
            .ok_or_else(|| format!("no choice sequence for the left-hand side state {}", p.a))?;
        let mut cur = p.clone();
        for (i, c) in seq.into_iter().enumerate() {
            let Some(c) = c else { continue };
            if !c.is_unit() {
                per_atom[i].push(Choice { a: cur.a.clone(), b: cur.b.clone(), choice: c.clone() });
            }
            let a = cur.a.sub(&c).map_err(|e| e.to_string())?;
            let b = cur.b.add(&c).ok_or("choice overflows")?;
            cur = WitnessPair::new(a, b, cur.t.clone());
        }
    }
    let tree = Derivation::extract(sigma_w.clone(), build(rhs, &mut 0, &per_atom));
    let conf = Configuration { rhs: rhs.clone(), pc: Vec::new(), ctx: ctx0, store: store.clone() };
    Ok((conf, tree))
}
