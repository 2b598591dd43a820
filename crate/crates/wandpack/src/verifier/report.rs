//! Verification reports. States and assertions are rendered in their text forms, so the
//! JSON is deterministic and carries no timing.

use serde::Serialize;

use crate::algorithms::Algorithm;

pub const REPORT_FORMAT: &str = "wandpack-report 1";

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Report {
    pub format: &'static str,
    pub program: String,
    pub universe: String,
    pub algorithm: Algorithm,
    pub verified: bool,
    pub methods: Vec<MethodReport>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MethodReport {
    pub name: String,
    pub verified: bool,
    pub statements: Vec<StmtReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct StmtReport {
    pub line: usize,
    pub column: usize,
    pub kind: &'static str,
    pub text: String,
    pub worlds_before: usize,
    pub worlds_after: usize,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub packages: Vec<PackageRecord>,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Ok,
    Error,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ErrorReport {
    pub line: usize,
    pub column: usize,
    pub statement: String,
    pub message: String,
    /// The witness world.
    pub store: String,
    pub state: String,
}

/// One package operation in one world.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PackageRecord {
    pub store: String,
    pub outer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub footprint: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<CaseRecord>,
    pub post_states: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditRecord>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CaseRecord {
    pub lhs: String,
    pub footprint: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq, Default)]
pub struct AuditRecord {
    pub checked: usize,
    pub violations: Vec<AuditViolation>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AuditViolation {
    pub footprint: String,
    /// A left-hand-side state the footprint fails for, or the oracle's error.
    pub witness: String,
}

impl Report {
    #[must_use]
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Audit violations over all packages.
    #[must_use]
    pub fn audit_violations(&self) -> usize {
        self.methods
            .iter()
            .flat_map(|m| &m.statements)
            .flat_map(|s| &s.packages)
            .filter_map(|p| p.audit.as_ref())
            .map(|a| a.violations.len())
            .sum()
    }

    /// Human-readable summary, one line per method.
    #[must_use]
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for m in &self.methods {
            match &m.error {
                None => out.push_str(&format!("method {}: verified\n", m.name)),
                Some(e) => out.push_str(&format!(
                    "method {}: error at {}:{}: {}\n  statement: {}\n  world: store [{}] state {}\n",
                    m.name, e.line, e.column, e.message, e.statement, e.store, e.state
                )),
            }
        }
        out.push_str(if self.verified { "VERIFIED\n" } else { "REJECTED\n" });
        out
    }
}
