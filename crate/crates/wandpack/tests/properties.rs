//! Property tests against independent reference implementations written here.

mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::sample::select;

use common::*;
use wandpack::algorithms::{
    canonical_derivation, package_combinable, package_fia, package_sound, PackageRequest, ProofScript,
};
use wandpack::assertions::{parse_assertion, print_assertion, sat, Assertion, EvalCtx, Store, WandKind};
use wandpack::oracle::{EnumerationPlan, Oracle};
use wandpack::package_logic::{
    check_derivation, check_derivation_lifted, extend_pairs, init_witness_set, parse_tree, print_derivation,
    WitnessPair, WitnessSet,
};
use wandpack::state_model::{exists_compatible_scaled, mult, restrict, Perm, ResourceId, State, Universe};

fn u1() -> Universe {
    load_universe("u1.universe")
}

fn all_states(u: &Universe) -> Vec<State> {
    EnumerationPlan::new(u).states().unwrap()
}

fn valued_states(u: &Universe) -> Vec<State> {
    all_states(u).into_iter().filter(State::is_valued).collect()
}

fn lattice() -> Vec<Perm> {
    (0..=2).map(|k| Perm::new(k, 2)).collect()
}

/// Every split of the mask over the half lattice, sharing the heap.
fn splits(s: &State) -> Vec<(State, State)> {
    let mut out = vec![(s.core(), s.core())];
    for (r, p) in s.mask() {
        let mut next = Vec::new();
        for (a, b) in &out {
            for q in lattice().into_iter().filter(|q| q <= p) {
                let (mut a, mut b) = (a.clone(), b.clone());
                a.set_perm(r.clone(), q);
                b.set_perm(r.clone(), *p - q);
                next.push((a, b));
            }
        }
        out = next;
    }
    out
}

/// Reference satisfaction for wand-free, predicate-free assertions, by mask splitting.
fn reference_sat(s: &State, a: &Assertion, store: &Store) -> bool {
    let ctx = EvalCtx::new(s.heap(), store);
    match a {
        Assertion::Pure(e) => ctx.eval_bool(e) == Ok(true),
        Assertion::Acc(e, f, p) => match ctx.loc(e, f) {
            Ok(l) => s.field_perm(&l) >= *p && (p.is_zero() || s.value(&l).is_some()),
            Err(_) => false,
        },
        Assertion::Star(x, y) => {
            splits(s).iter().any(|(l, r)| reference_sat(l, x, store) && reference_sat(r, y, store))
        }
        Assertion::Imp(b, x) => match ctx.eval_bool(b) {
            Ok(false) => true,
            Ok(true) => reference_sat(s, x, store),
            Err(_) => false,
        },
        Assertion::Or(x, y) => reference_sat(s, x, store) || reference_sat(s, y, store),
        Assertion::Pred(..) | Assertion::Wand(..) => unreachable!("not generated"),
    }
}

/// Direct search for a compatible scaled copy over α = k/8.
fn scaled_search(a: &State, w: &State) -> bool {
    (1..=8).filter_map(|k| mult(Perm::new(k, 8), w)).any(|c| a.compatible(&c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn addition_commutes(a in select(all_states(&u1())), b in select(all_states(&u1()))) {
        prop_assert_eq!(a.add(&b), b.add(&a));
    }

    #[test]
    fn core_is_neutral_and_idempotent(a in select(all_states(&u1()))) {
        prop_assert_eq!(a.add(&a.core()), Some(a.clone()));
        prop_assert_eq!(a.core().add(&a.core()), Some(a.core()));
    }

    #[test]
    fn sub_is_largest(b in select(all_states(&u1())), r in select(all_states(&u1()))) {
        if let Some(a) = b.add(&r) {
            let d = a.sub(&b).unwrap();
            prop_assert_eq!(b.add(&d), Some(a.clone()));
            prop_assert!(d.geq(&r));
        }
    }

    #[test]
    fn stability_is_closed_under_addition(a in select(all_states(&u1())), b in select(all_states(&u1()))) {
        if a.is_stable() && b.is_stable() {
            if let Some(c) = a.add(&b) {
                prop_assert!(c.is_stable());
            }
        }
    }

    #[test]
    fn restrict_follows_both_cases(a in select(all_states(&u1())), w in select(all_states(&u1()))) {
        let r = restrict(&a, &w);
        prop_assert_eq!(r.heap(), w.heap());
        prop_assert!(w.geq(&r));
        if r != w {
            for k in 1..=8 {
                if let Some(c) = mult(Perm::new(k, 8), &r) {
                    prop_assert!(a.compatible(&c), "scaled copy {} of {} clashes with {}", c, r, a);
                }
            }
        }
    }

    #[test]
    fn closed_form_matches_scaled_search(a in select(all_states(&u1())), w in select(all_states(&u1()))) {
        prop_assert_eq!(exists_compatible_scaled(&a, &w), scaled_search(&a, &w));
    }

    #[test]
    fn scaling_distributes(a in select(all_states(&u1())), b in select(all_states(&u1())), k in 1i64..=4) {
        let alpha = Perm::new(k, 4);
        if let Some(c) = a.add(&b) {
            let lhs = mult(alpha, &c);
            let rhs = mult(alpha, &a).zip(mult(alpha, &b)).and_then(|(x, y)| x.add(&y));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn state_text_round_trips(a in select(all_states(&u1()))) {
        prop_assert_eq!(State::parse(&a.to_string()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn sat_matches_reference(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let a = gen_assertion(&mut g, &gu);
        let s = store();
        for st in valued_states(&gu.universe) {
            prop_assert_eq!(sat(&st, &a, &s), reference_sat(&st, &a, &s), "{} on {}", a, st);
        }
    }

    #[test]
    fn sat_is_intuitionistic(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let a = gen_assertion(&mut g, &gu);
        let s = store();
        let states = valued_states(&gu.universe);
        for small in states.iter().filter(|st| sat(st, &a, &s)) {
            for big in states.iter().filter(|b| b.geq(small)) {
                prop_assert!(sat(big, &a, &s), "{} holds in {} but not {}", a, small, big);
            }
        }
    }

    #[test]
    fn star_commutes(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let (a, b) = (gen_assertion(&mut g, &gu), gen_assertion(&mut g, &gu));
        let s = store();
        let (ab, ba) = (Assertion::star(a.clone(), b.clone()), Assertion::star(b, a));
        for st in valued_states(&gu.universe) {
            prop_assert_eq!(sat(&st, &ab, &s), sat(&st, &ba, &s));
        }
    }

    #[test]
    fn oracle_agrees_with_demands(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let a = gen_assertion(&mut g, &gu);
        let s = store();
        let o = Oracle::new(&gu.universe, s.clone());
        let expected: Vec<State> = valued_states(&gu.universe).into_iter().filter(|st| sat(st, &a, &s)).collect();
        prop_assert_eq!(o.sat_states(&a, false).unwrap(), expected);
    }

    #[test]
    fn assertion_text_round_trips(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let w = gen_wand(&mut g, &gu, WandKind::Combinable);
        prop_assert_eq!(parse_assertion(&print_assertion(&w)).unwrap(), w);
    }

    #[test]
    fn packages_yield_oracle_footprints(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let s = store();
        let wand = gen_wand(&mut g, &gu, WandKind::Standard);
        let outer = gen_outer(&mut g, &gu);
        let script = ProofScript::default();
        let req = PackageRequest { universe: u, store: &s, outer: &outer, wand: &wand, script: &script };
        let o = Oracle::new(u, s.clone());
        for (out, kind) in [(package_sound(req), WandKind::Standard), (package_combinable(req), WandKind::Combinable)] {
            if let (true, Some(fp)) = (out.is_success(), out.footprint.as_ref()) {
                prop_assert!(outer.geq(fp));
                prop_assert!(fp.is_stable());
                prop_assert!(o.is_footprint(fp, &with_kind(&wand, kind)).unwrap(), "{} for {}", fp, wand);
                let (conf, tree) = out.derivation.clone().expect("derivation");
                let checked = match kind {
                    WandKind::Standard => check_derivation(&conf, &tree),
                    WandKind::Combinable => check_derivation_lifted(&conf, &tree),
                };
                prop_assert_eq!(&checked.unwrap().extracted, fp);
            }
        }
    }

    #[test]
    fn binary_lhs_algorithms_agree(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let s = store();
        let wand = gen_wand(&mut g, &gu, WandKind::Standard);
        let (lhs, _, _) = wand.as_wand().unwrap();
        let o = Oracle::new(u, s.clone());
        prop_assume!(o.is_binary(lhs).unwrap());
        let outer = gen_outer(&mut g, &gu);
        let script = ProofScript::default();
        let req = PackageRequest { universe: u, store: &s, outer: &outer, wand: &wand, script: &script };
        let (a, b) = (package_sound(req), package_combinable(req));
        prop_assert_eq!(a.is_success(), b.is_success(), "{} on {}", wand, outer);
        if a.is_success() {
            prop_assert_eq!(a.footprint, b.footprint);
        }
    }

    #[test]
    fn canonical_derivations_round_trip(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let s = store();
        let wand = gen_wand(&mut g, &gu, WandKind::Standard);
        let o = Oracle::new(u, s.clone());
        for fp in o.minimal_footprints(&wand, &Default::default()).unwrap() {
            let (conf, tree) = canonical_derivation(&wand, &fp, u, &s).unwrap();
            let text = print_derivation(&tree);
            let back = parse_tree(&text).unwrap();
            prop_assert_eq!(&back, &tree);
            prop_assert_eq!(check_derivation(&conf, &back).unwrap().extracted, fp);
        }
    }

    #[test]
    fn extract_drops_exactly_incompatible_pairs(seed in any::<u64>()) {
        let mut g = rng(seed);
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let s = store();
        let lhs = gen_assertion(&mut g, &gu);
        let w = gen_stable_state(&mut g, u);
        let pairs = init_witness_set(&lhs, u, &s, true, WandKind::Standard).unwrap();
        let kept = extend_pairs(&pairs, &State::unit(), &w, false).unwrap();
        let expected: WitnessSet = pairs
            .iter()
            .filter(|p| p.joint().is_some_and(|j| j.compatible(&w)))
            .map(|p| WitnessPair::new(p.a.add(&w).unwrap(), p.b.clone(), p.t.clone()))
            .collect();
        prop_assert_eq!(kept, expected);
    }
}

#[test]
fn universe_text_round_trips() {
    for name in ["u1.universe", "u2.universe", "u3.universe"] {
        let u = load_universe(name);
        assert_eq!(Universe::parse(&u.to_string()).unwrap(), u);
    }
}

#[test]
fn fia_case_footprints_are_not_footprints() {
    let u = u1();
    let s = Store::parse("x=x, y=y, z=z").unwrap();
    let wand = assertion("acc(x.f) * (x.f == y || x.f == z) --* acc(x.f) * acc(x.f.g)");
    let outer = state("{x.f@1=y, y.g@1=0, z.g@1=0}");
    let script = ProofScript::default();
    let out = package_fia(PackageRequest { universe: &u, store: &s, outer: &outer, wand: &wand, script: &script });
    assert!(out.is_success());
    assert_eq!(out.case_footprints.len(), 2);
    let o = Oracle::new(&u, s);
    for (_, fp) in &out.case_footprints {
        assert!(!o.is_footprint(fp, &wand).unwrap(), "{fp}");
    }
}

#[test]
fn amounts_stay_within_bounds() {
    let u = u1();
    for a in all_states(&u) {
        for (r, p) in a.mask() {
            assert!(*p > Perm::zero() && *p <= Perm::one(), "{r:?}");
            assert!(matches!(r, ResourceId::Field(_)));
        }
    }
}
