//! Initial witness sets.

use super::{Transformer, WitnessPair, WitnessSet};
use crate::assertions::{minimal_models, sat, Assertion, Store, WandKind};
use crate::oracle::EnumerationPlan;
use crate::state_model::{State, Universe};

/// `{(σ_A, e) | σ_A ⊨ A}` over stable states of `u`, or only the ⪰-minimal ones.
///
/// Combinable wands attach `R(σ_A, ·)` to each pair.
pub fn init_witness_set(
    lhs: &Assertion,
    u: &Universe,
    store: &Store,
    minimal: bool,
    kind: WandKind,
) -> Result<WitnessSet, String> {
    let states = if minimal {
        minimal_models(lhs, store, u).map_err(|e| e.to_string())?
    } else {
        EnumerationPlan::new(u)
            .stable_only()
            .with_assertions(&[lhs], store)
            .states()
            .map_err(|e| e.to_string())?
            .into_iter()
            .filter(|s| sat(s, lhs, store))
            .collect()
    };
    Ok(states.into_iter().map(|a| pair_for(a, kind)).collect())
}

pub(crate) fn pair_for(a: State, kind: WandKind) -> WitnessPair {
    let t = match kind {
        WandKind::Standard => Transformer::Identity,
        WandKind::Combinable => Transformer::CombinableR(a.clone()),
    };
    WitnessPair::new(a, State::unit(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertions::parse_assertion;
    use crate::state_model::Value;

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

    #[test]
    fn half_access_yields_one_pair_per_value() {
        let a = parse_assertion("acc(x.b, 1/2)").unwrap();
        let s = init_witness_set(&a, &u2(), &Store::new(), true, WandKind::Standard).unwrap();
        let firsts: Vec<String> = s.iter().map(|p| p.a.to_string()).collect();
        assert_eq!(firsts, vec!["{x.b@1/2=false}", "{x.b@1/2=true}"]);
    }

    #[test]
    fn full_set_contains_the_minimal_one() {
        let a = parse_assertion("acc(x.b, 1/2)").unwrap();
        let all = init_witness_set(&a, &u2(), &Store::new(), false, WandKind::Standard).unwrap();
        let min = init_witness_set(&a, &u2(), &Store::new(), true, WandKind::Standard).unwrap();
        assert!(min.is_subset(&all));
        assert!(all.len() > min.len());
        assert!(all.iter().all(|p| min.iter().any(|m| p.a.geq(&m.a))));
    }

    #[test]
    fn contradiction_gives_empty_set() {
        let a = parse_assertion("false").unwrap();
        assert!(init_witness_set(&a, &u2(), &Store::new(), true, WandKind::Standard).unwrap().is_empty());
    }
}
