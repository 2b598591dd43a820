//! Packaging magic wands over finite fractional-permission universes.
//!
//! The crate contains the separation-algebra contract and its law suite, a concrete
//! state model, assertions with demand-based satisfaction, a checker for package-logic
//! derivations, three package algorithms, a brute-force semantic oracle and a small
//! verifier front end.

pub mod algebra;
pub mod algorithms;
pub mod assertions;
pub mod oracle;
pub mod package_logic;
pub mod state_model;
pub mod syntax;
pub mod verifier;
