//! The package logic: witness sets, contexts, derivation trees and their checker.
//!
//! A configuration `⟨B, pc, (σ, S[, σ_f])⟩` reduces to a context by a derivation built
//! from the rules Atom, Extract, Star, Implication and Disjunction. The lifted variant
//! carries a monotonic transformer per pair and tracks the footprint extracted so far.

mod check;
mod text;
mod witness;

use std::collections::BTreeSet;

use crate::assertions::{Expr, Store};
use crate::state_model::{restrict, State};

pub use check::{check_derivation, check_derivation_lifted, extend_pairs, extract_footprint, pc_holds, CheckError};
pub use text::{
    parse_derivation_file, parse_tree, print_derivation, print_derivation_file, DerivationEntry, DerivationFile,
    UniverseRef, WitnessSpec, DERIVATION_HEADER,
};
pub use witness::init_witness_set;

/// Transformer attached to a witness pair in the lifted logic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Transformer {
    Identity,
    /// `λσ. R(anchor, σ)` for the combinable wand, anchored at the initial LHS state.
    CombinableR(State),
}

impl Transformer {
    #[must_use]
    pub fn apply(&self, s: &State) -> State {
        match self {
            Transformer::Identity => s.clone(),
            Transformer::CombinableR(anchor) => restrict(anchor, s),
        }
    }
}

/// An extended state `(σ_A, σ_B, t)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WitnessPair {
    pub a: State,
    pub b: State,
    pub t: Transformer,
}

impl WitnessPair {
    #[must_use]
    pub fn new(a: State, b: State, t: Transformer) -> Self {
        WitnessPair { a, b, t }
    }

    /// `σ_A ⊕ σ_B`; defined for every pair of a well-formed witness set.
    #[must_use]
    pub fn joint(&self) -> Option<State> {
        self.a.add(&self.b)
    }
}

pub type WitnessSet = BTreeSet<WitnessPair>;

/// `(σ, S, σ_f)`: the outer state, the witness set and the footprint extracted so far.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Context {
    pub outer: State,
    pub pairs: WitnessSet,
    pub extracted: State,
}

impl Context {
    #[must_use]
    pub fn new(outer: State, pairs: WitnessSet) -> Self {
        Context { outer, pairs, extracted: State::unit() }
    }
}

/// `⟨B, pc, Δ⟩` together with the store that closes `B`'s free variables.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub rhs: crate::assertions::Assertion,
    pub pc: Vec<Expr>,
    pub ctx: Context,
    pub store: Store,
}

/// The choice made by an Atom step for one pair.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Choice {
    pub a: State,
    pub b: State,
    pub choice: State,
}

/// A derivation tree; each node names the rule applied to the current configuration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Derivation {
    /// Moves `w` from the outer state into every compatible pair, then continues.
    Extract {
        w: State,
        child: Box<Derivation>,
    },
    Star(Box<Derivation>, Box<Derivation>),
    Implication(Box<Derivation>),
    /// Pairs satisfying the path condition and absent from the list choose `e`.
    Atom(Vec<Choice>),
    /// `left` lists the pairs that prove the left disjunct.
    Disjunction {
        left: Vec<(State, State)>,
        a: Box<Derivation>,
        b: Box<Derivation>,
    },
}

impl Derivation {
    #[must_use]
    pub fn extract(w: State, child: Derivation) -> Derivation {
        Derivation::Extract { w, child: Box::new(child) }
    }

    #[must_use]
    pub fn star(a: Derivation, b: Derivation) -> Derivation {
        Derivation::Star(Box::new(a), Box::new(b))
    }

    #[must_use]
    pub fn implication(a: Derivation) -> Derivation {
        Derivation::Implication(Box::new(a))
    }

    /// Number of rule applications.
    #[must_use]
    pub fn size(&self) -> usize {
        match self {
            Derivation::Atom(_) => 1,
            Derivation::Extract { child, .. } | Derivation::Implication(child) => 1 + child.size(),
            Derivation::Star(a, b) | Derivation::Disjunction { a, b, .. } => 1 + a.size() + b.size(),
        }
    }
}

impl std::fmt::Display for Derivation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_derivation(self))
    }
}
