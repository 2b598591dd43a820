//! Scaling `α ⊙ σ`, scaled-set membership, the combinable-wand transform `R`, and binary masks.

use num_traits::{One, Zero};

use super::state::{Mask, State};
use super::value::Perm;

/// `α ⊙ (π, h) = (α·π, h)`, defined iff every scaled amount is at most 1.
#[must_use]
pub fn mult(alpha: Perm, sigma: &State) -> Option<State> {
    if alpha <= Perm::zero() {
        return None;
    }
    let mut mask = Mask::new();
    for (r, p) in sigma.mask() {
        let q = *p * alpha;
        if q > Perm::one() {
            return None;
        }
        mask.insert(r.clone(), q);
    }
    Some(State::from_parts(mask, sigma.heap().clone()))
}

/// Whether `candidate = α ⊙ sigma` for some `α ∈ (0, 1]`.
#[must_use]
pub fn in_scaled(candidate: &State, sigma: &State) -> bool {
    if candidate.heap() != sigma.heap() {
        return false;
    }
    if candidate.mask().len() != sigma.mask().len() {
        return false;
    }
    let mut alpha: Option<Perm> = None;
    for (r, p) in sigma.mask() {
        let Some(q) = candidate.mask().get(r) else { return false };
        let ratio = *q / *p;
        match alpha {
            None => alpha = Some(ratio),
            Some(a) if a != ratio => return false,
            _ => {}
        }
    }
    alpha.is_none_or(|a| a > Perm::zero() && a <= Perm::one())
}

/// Whether some scaled copy of `sigma_w` is compatible with `sigma_a`.
///
/// Heaps are invariant under scaling, so they must agree outright. Amounts shrink towards
/// zero as `α` does, so a resource only blocks every `α` when `sigma_a` already holds all of it
/// while `sigma_w` holds a positive amount.
#[must_use]
pub fn exists_compatible_scaled(sigma_a: &State, sigma_w: &State) -> bool {
    sigma_a.heaps_agree(sigma_w) && sigma_w.mask().keys().all(|r| sigma_a.perm(r) < Perm::one())
}

/// The transform `R(σ_A, σ_w)`: unchanged when no scaled copy fits, otherwise each amount capped by `1 − π_A`.
#[must_use]
pub fn restrict(sigma_a: &State, sigma_w: &State) -> State {
    if !exists_compatible_scaled(sigma_a, sigma_w) {
        return sigma_w.clone();
    }
    let mask = sigma_w
        .mask()
        .iter()
        .map(|(r, p)| {
            let room = Perm::one() - sigma_a.perm(r);
            (r.clone(), if *p < room { *p } else { room })
        })
        .collect();
    State::from_parts(mask, sigma_w.heap().clone())
}

/// Binary restriction: keeps full amounts and drops the rest.
#[must_use]
pub fn bin(mask: &Mask) -> Mask {
    mask.iter().filter(|(_, p)| p.is_one()).map(|(r, p)| (r.clone(), *p)).collect()
}

#[must_use]
pub fn bin_state(sigma: &State) -> State {
    State::from_parts(bin(sigma.mask()), sigma.heap().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(s: &str) -> State {
        State::parse(s).unwrap()
    }

    fn half() -> Perm {
        Perm::new(1, 2)
    }

    #[test]
    fn mult_examples() {
        let s = st("{x.f@1=y}");
        assert_eq!(mult(Perm::one(), &s), Some(s.clone()));
        assert_eq!(mult(half(), &s), Some(st("{x.f@1/2=y}")));
        assert_eq!(mult(Perm::from_integer(2), &s), None);
        assert_eq!(mult(half(), &st("{P(x)@1}")), Some(st("{P(x)@1/2}")));
    }

    #[test]
    fn in_scaled_examples() {
        assert!(in_scaled(&st("{x.f@1/2=y}"), &st("{x.f@1=y}")));
        let s = st("{x.f@1/2=y, x.g@1=0}");
        assert!(in_scaled(&s, &s));
        assert!(!in_scaled(&st("{x.f@1/2=y, x.g@1=0}"), &st("{x.f@1=y, x.g@1=0}")));
        assert!(!in_scaled(&st("{x.f@1=y}"), &st("{x.f@1/2=y}")));
    }

    #[test]
    fn compatible_scaled_examples() {
        assert!(exists_compatible_scaled(&st("{x.f@1/2}"), &st("{x.f@1}")));
        assert!(!exists_compatible_scaled(&st("{x.f@1=y}"), &st("{x.f@1/2=z}")));
        assert!(exists_compatible_scaled(&State::unit(), &st("{x.f@1=y, P(x)@1}")));
    }

    #[test]
    fn restrict_examples() {
        assert_eq!(restrict(&st("{x.f@1/2}"), &st("{x.f@1}")), st("{x.f@1/2}"));
        assert_eq!(restrict(&st("{x.f@1=y}"), &st("{x.f@1/2=z}")), st("{x.f@1/2=z}"));
        assert_eq!(restrict(&st("{x.g@1}"), &st("{x.f@1}")), st("{x.f@1}"));
    }

    #[test]
    fn bin_example() {
        assert_eq!(bin_state(&st("{x.f@1/2, x.g@1}")), st("{x.g@1}"));
    }
}
