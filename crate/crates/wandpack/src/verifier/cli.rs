//! Command-line front end. Exit codes: 0 verified or true, 1 rejected or false, 2 usage
//! or internal error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};

use super::{load_program, run_program, RunOptions};
use crate::algebra::check_axioms;
use crate::algorithms::Algorithm;
use crate::assertions::{parse_assertion, Assertion, Store};
use crate::oracle::{FootprintSearch, Oracle, DEFAULT_BUDGET};
use crate::package_logic::{parse_derivation_file, print_derivation_file};
use crate::state_model::{State, Universe};

#[derive(Parser, Debug)]
#[command(name = "wandpack", about = "Magic-wand package verifier over finite universes", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Verify a program.
    Verify {
        file: PathBuf,
        #[arg(long, value_parser = Algorithm::parse, default_value = "sound")]
        algorithm: Algorithm,
        /// Write the derivations of all packages to this file.
        #[arg(long)]
        emit_derivation: Option<PathBuf>,
        /// Write the JSON report to this file (`-` for standard output).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Re-check every package footprint with the oracle.
        #[arg(long)]
        audit: bool,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Check every derivation in a derivation file.
    CheckDerivation { file: PathBuf },
    /// Semantic queries by enumeration.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Check the separation-algebra axioms on all states of a universe.
    Laws {
        universe: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    universe: PathBuf,
    /// Variable bindings, e.g. `x=x, y=y`.
    #[arg(long, default_value = "")]
    store: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Is the state a footprint of the wand?
    Footprint {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        wand: String,
        #[arg(long)]
        state: String,
    },
    /// Is the assertion combinable?
    Combinable {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        assertion: String,
    },
    /// Does the left assertion entail the right one?
    Entail {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    /// Minimal stable footprints of the wand.
    Minimal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        wand: String,
        /// Only footprints below this state.
        #[arg(long)]
        within: Option<String>,
        /// Skip footprints incompatible with every left-hand side state.
        #[arg(long)]
        nonvacuous: bool,
    },
}

/// Runs the CLI and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn read_universe(p: &Path) -> Result<Universe> {
    let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
    Universe::parse(&text).map_err(|e| anyhow!("{}: {e}", p.display()))
}

fn assertion(s: &str) -> Result<Assertion> {
    parse_assertion(s).map_err(|e| anyhow!("cannot parse `{s}`: {e}"))
}

fn state(s: &str) -> Result<State> {
    State::parse(s).map_err(|e| anyhow!("cannot parse state `{s}`: {e}"))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Verify { file, algorithm, emit_derivation, json, audit, threads, budget } => {
            let program = load_program(&file).map_err(|e| anyhow!("{}: {e}", file.display()))?;
            let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let opts = RunOptions { algorithm, audit, budget, program_name: name };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().context("thread pool")?;
            let out = pool.install(|| run_program(&program, &opts));
            if let Some(p) = json {
                write_out(&p, &out.report.to_json())?;
            }
            if let Some(p) = emit_derivation {
                write_out(&p, &print_derivation_file(&out.derivations))?;
            }
            print!("{}", out.report.summary());
            if audit {
                println!("audit: {} violation(s)", out.report.audit_violations());
            }
            Ok(out.report.verified)
        }
        Cmd::CheckDerivation { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("cannot read {}", file.display()))?;
            let parsed = parse_derivation_file(&text, file.parent()).map_err(|e| anyhow!("{}: {e}", file.display()))?;
            if parsed.entries.is_empty() {
                bail!("{} contains no derivations", file.display());
            }
            let mut all = true;
            for e in &parsed.entries {
                match e.check() {
                    Ok(ctx) => println!("{}: accepted, footprint {}", e.name, ctx.extracted),
                    Err(m) => {
                        all = false;
                        println!("{}: rejected: {m}", e.name);
                    }
                }
            }
            Ok(all)
        }
        Cmd::Laws { universe, budget } => {
            let u = read_universe(&universe)?;
            let reports = check_axioms(&u, budget)?;
            let mut all = true;
            for r in &reports {
                match &r.counterexample {
                    None => println!("{}: pass ({} instances)", r.axiom, r.checked),
                    Some(cex) => {
                        all = false;
                        let xs: Vec<String> = cex.iter().map(ToString::to_string).collect();
                        println!("{}: FAIL counterexample {}", r.axiom, xs.join(" "));
                    }
                }
            }
            Ok(all)
        }
        Cmd::Oracle(o) => oracle(o),
    }
}

fn oracle(cmd: OracleCmd) -> Result<bool> {
    let (OracleCmd::Footprint { common, .. }
    | OracleCmd::Combinable { common, .. }
    | OracleCmd::Entail { common, .. }
    | OracleCmd::Minimal { common, .. }) = &cmd;
    let u = read_universe(&common.universe)?;
    let store = Store::parse(&common.store).map_err(|e| anyhow!("bad store: {e}"))?;
    let mut o = Oracle::new(&u, store);
    o.budget = common.budget;
    match &cmd {
        OracleCmd::Footprint { wand, state: s, .. } => {
            let w = assertion(wand)?;
            let sigma = state(s)?;
            match o.footprint_counterexample(&sigma, &w)? {
                None => {
                    println!("true");
                    Ok(true)
                }
                Some(a) => {
                    println!("false: fails for left-hand side state {a}");
                    Ok(false)
                }
            }
        }
        OracleCmd::Combinable { assertion: a, .. } => match o.check_combinable(&assertion(a)?)? {
            None => {
                println!("true");
                Ok(true)
            }
            Some(c) => {
                println!(
                    "false: p={} q={} state {}",
                    crate::state_model::fmt_perm(&c.p),
                    crate::state_model::fmt_perm(&c.q),
                    c.sigma
                );
                Ok(false)
            }
        },
        OracleCmd::Entail { lhs, rhs, .. } => match o.check_entailment(&assertion(lhs)?, &assertion(rhs)?)? {
            None => {
                println!("true");
                Ok(true)
            }
            Some(s) => {
                println!("false: counterexample {s}");
                Ok(false)
            }
        },
        OracleCmd::Minimal { wand, within, nonvacuous, .. } => {
            let search = FootprintSearch { within: within.as_deref().map(state).transpose()?, nonvacuous: *nonvacuous };
            for f in o.minimal_footprints(&assertion(wand)?, &search)? {
                println!("{f}");
            }
            Ok(true)
        }
    }
}
