//! Program front end: parsing, execution over sets of worlds, reports and the CLI.

mod ast;
pub mod cli;
mod parse;
mod report;
mod run;

pub use ast::{print_program, Method, Program, Stmt, StmtKind};
pub use parse::{load_program, parse_program, ProgramError};
pub use report::{
    AuditRecord, AuditViolation, CaseRecord, ErrorReport, MethodReport, PackageRecord, Report, StmtReport, Verdict,
    REPORT_FORMAT,
};
pub use run::{effective_kind, run_program, RunOptions, RunOutput, World};

pub const PROGRAM_HEADER: &str = "wandpack-program 1";
