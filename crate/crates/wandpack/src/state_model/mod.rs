//! The fractional-permission state model: masks over field locations, predicate instances
//! and wand instances, plus a partial heap over field locations.

mod scaling;
mod state;
mod universe;
mod value;

pub use scaling::{bin, bin_state, exists_compatible_scaled, in_scaled, mult, restrict};
pub use state::{Heap, Loc, Mask, ResourceId, State, StateError};
pub use universe::{FieldType, PredicateDef, Universe, UniverseError, UNIVERSE_HEADER};
pub use value::{fmt_perm, is_ident, parse_perm, Name, Perm, Value};

impl crate::algebra::SeparationAlgebra for State {
    fn unit() -> Self {
        State::unit()
    }

    fn add(&self, other: &Self) -> Option<Self> {
        State::add(self, other)
    }

    fn core(&self) -> Self {
        State::core(self)
    }

    fn is_stable(&self) -> bool {
        State::is_stable(self)
    }

    fn geq(&self, other: &Self) -> bool {
        State::geq(self, other)
    }

    fn sub(&self, other: &Self) -> Result<Self, crate::algebra::AlgebraError> {
        State::sub(self, other).map_err(|e| crate::algebra::AlgebraError(e.to_string()))
    }
}
