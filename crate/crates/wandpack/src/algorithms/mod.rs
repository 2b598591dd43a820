//! Package algorithms: the sound algorithm for standard wands, its lifted variant for
//! combinable wands, and the per-case footprint inference kept as a baseline.

mod canonical;
mod cons_lhs;
mod package;
mod prove;
mod script;

use std::fmt;

use serde::Serialize;

use crate::package_logic::{Configuration, Derivation};
use crate::state_model::State;

pub use canonical::canonical_derivation;
pub use cons_lhs::{cons_lhs, total_heaps};
pub use package::{package, package_combinable, package_fia, package_sound, PackageRequest};
pub use prove::Engine;
pub use script::{parse_script, script_at, ProofScript, ScriptStmt};

/// Which package algorithm to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fia,
    Sound,
    Combinable,
}

impl Algorithm {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fia => "fia",
            Algorithm::Sound => "sound",
            Algorithm::Combinable => "combinable",
        }
    }

    pub fn parse(s: &str) -> Result<Algorithm, String> {
        match s {
            "fia" => Ok(Algorithm::Fia),
            "sound" => Ok(Algorithm::Sound),
            "combinable" => Ok(Algorithm::Combinable),
            other => Err(format!("unknown algorithm `{other}` (expected fia, sound or combinable)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a package attempt failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackageError(pub String);

impl fmt::Display for PackageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PackageError {}

impl From<String> for PackageError {
    fn from(s: String) -> Self {
        PackageError(s)
    }
}

/// Result of one package operation.
#[derive(Clone, Debug)]
pub struct PackageOutcome {
    pub status: Result<(), PackageError>,
    /// The single footprint chosen by the sound algorithms.
    pub footprint: Option<State>,
    /// `(LHS case, footprint)` per case, for the per-case baseline.
    pub case_footprints: Vec<(State, State)>,
    /// Outer states after packaging, sorted; the wand instance is included.
    pub post_states: Vec<State>,
    /// The derivation and the configuration it is checked against.
    pub derivation: Option<(Configuration, Derivation)>,
}

impl PackageOutcome {
    #[must_use]
    pub fn failure(msg: impl Into<String>) -> Self {
        PackageOutcome {
            status: Err(PackageError(msg.into())),
            footprint: None,
            case_footprints: Vec::new(),
            post_states: Vec::new(),
            derivation: None,
        }
    }

    #[must_use]
    pub fn is_success(&self) -> bool {
        self.status.is_ok()
    }
}
