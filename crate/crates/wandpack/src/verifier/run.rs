//! Execution over sets of worlds.
//!
//! A world is a store and a state. Every statement maps each world to its successors;
//! worlds are kept as a sorted set, so results do not depend on how the per-world work
//! is scheduled.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::ast::{Method, Program, Stmt, StmtKind};
use super::report::{
    AuditRecord, AuditViolation, CaseRecord, ErrorReport, MethodReport, PackageRecord, Report, StmtReport, Verdict,
    REPORT_FORMAT,
};
use crate::algorithms::{package, Algorithm, PackageRequest, ProofScript};
use crate::assertions::{demands, minimal_models_from, Assertion, EvalCtx, EvalError, Store, WandKind};
use crate::oracle::{Oracle, DEFAULT_BUDGET};
use crate::package_logic::{DerivationEntry, DerivationFile, UniverseRef};
use crate::state_model::{FieldType, State, Value};

pub type World = (Store, State);

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    /// Re-check every package footprint with the oracle.
    pub audit: bool,
    pub budget: u128,
    /// Name recorded in the report.
    pub program_name: String,
}

impl RunOptions {
    #[must_use]
    pub fn new(algorithm: Algorithm) -> Self {
        RunOptions { algorithm, audit: false, budget: DEFAULT_BUDGET, program_name: String::new() }
    }
}

pub struct RunOutput {
    pub report: Report,
    pub derivations: DerivationFile,
}

/// The wand kind whose semantics a package run must establish.
#[must_use]
pub fn effective_kind(algorithm: Algorithm, wand: &Assertion) -> WandKind {
    match (algorithm, wand.as_wand()) {
        (Algorithm::Fia, _) => WandKind::Standard,
        (Algorithm::Combinable, _) | (_, Some((_, _, WandKind::Combinable))) => WandKind::Combinable,
        _ => WandKind::Standard,
    }
}

fn with_kind(wand: &Assertion, kind: WandKind) -> Assertion {
    match wand {
        Assertion::Wand(l, r, _) => Assertion::Wand(l.clone(), r.clone(), kind),
        other => other.clone(),
    }
}

/// Runs every method of the program.
#[must_use]
pub fn run_program(p: &Program, opts: &RunOptions) -> RunOutput {
    let mut derivations = DerivationFile::default();
    let methods: Vec<MethodReport> = p
        .methods
        .iter()
        .map(|m| {
            let mut ex = Exec { p, opts, method: m.name.to_string(), records: Vec::new(), derivations: Vec::new() };
            let error = ex.method(m).err();
            derivations.entries.extend(ex.derivations);
            MethodReport { name: m.name.to_string(), verified: error.is_none(), statements: ex.records, error }
        })
        .collect();
    let report = Report {
        format: REPORT_FORMAT,
        program: opts.program_name.clone(),
        universe: p.universe_path.clone(),
        algorithm: opts.algorithm,
        verified: methods.iter().all(|m| m.verified),
        methods,
    };
    RunOutput { report, derivations }
}

struct Exec<'a> {
    p: &'a Program,
    opts: &'a RunOptions,
    method: String,
    records: Vec<StmtReport>,
    derivations: Vec<DerivationEntry>,
}

/// What one world turns into.
#[derive(Default)]
struct Step {
    worlds: Vec<World>,
    package: Option<PackageRecord>,
    derivation: Option<DerivationEntry>,
}

fn eval_ctx<'a>(view: &'a State, sigma: &'a State, store: &'a Store) -> EvalCtx<'a> {
    EvalCtx::new(view.heap(), store).with_mask(sigma.mask())
}

fn err_text(e: &EvalError) -> String {
    match e {
        EvalError::Unframed(l) => format!("insufficient permission to read {l}"),
        other => other.to_string(),
    }
}

impl Exec<'_> {
    fn method(&mut self, m: &Method) -> Result<(), ErrorReport> {
        let mut store = Store::new();
        for (n, _) in &m.params {
            store.set(n.clone(), Value::Ref(n.clone()));
        }
        let mut worlds = vec![(store, State::unit())];
        for r in &m.requires {
            let s = Stmt { pos: m.pos, kind: StmtKind::Inhale(r.clone()) };
            worlds = self.stmt(worlds, &s, "requires")?;
        }
        self.block(worlds, &m.body).map(|_| ())
    }

    fn block(&mut self, mut worlds: Vec<World>, stmts: &[Stmt]) -> Result<Vec<World>, ErrorReport> {
        for s in stmts {
            worlds = self.stmt(worlds, s, s.kind.name())?;
        }
        Ok(worlds)
    }

    fn error(&self, s: &Stmt, w: &World, message: String) -> ErrorReport {
        ErrorReport {
            line: s.pos.line,
            column: s.pos.col,
            statement: s.kind.head(),
            message,
            store: w.0.to_string(),
            state: w.1.to_string(),
        }
    }

    fn record(
        &mut self,
        s: &Stmt,
        kind: &'static str,
        before: usize,
        after: usize,
        verdict: Verdict,
        packages: Vec<PackageRecord>,
    ) {
        self.records.push(StmtReport {
            line: s.pos.line,
            column: s.pos.col,
            kind,
            text: s.kind.head(),
            worlds_before: before,
            worlds_after: after,
            verdict,
            packages,
        });
    }

    fn stmt(&mut self, worlds: Vec<World>, s: &Stmt, kind: &'static str) -> Result<Vec<World>, ErrorReport> {
        let before = worlds.len();
        if let StmtKind::If(b, t, e) = &s.kind {
            let conds: Vec<Result<bool, String>> = worlds
                .par_iter()
                .map(|(store, sigma)| {
                    let view = sigma.stable_part();
                    eval_ctx(&view, sigma, store).eval_bool(b).map_err(|e| err_text(&e))
                })
                .collect();
            let (mut yes, mut no) = (Vec::new(), Vec::new());
            for (w, c) in worlds.into_iter().zip(conds) {
                match c {
                    Ok(true) => yes.push(w),
                    Ok(false) => no.push(w),
                    Err(m) => {
                        let err = self.error(s, &w, m);
                        self.record(s, kind, before, 0, Verdict::Error, Vec::new());
                        return Err(err);
                    }
                }
            }
            self.record(s, kind, before, before, Verdict::Ok, Vec::new());
            let mut out: BTreeSet<World> = self.block(yes, t)?.into_iter().collect();
            out.extend(self.block(no, e)?);
            return Ok(out.into_iter().collect());
        }
        let ctx = StepCtx { p: self.p, opts: self.opts, method: &self.method, line: s.pos.line };
        let steps: Vec<Result<Step, String>> =
            worlds.par_iter().enumerate().map(|(i, w)| ctx.step(i, w, &s.kind)).collect();
        let mut out = BTreeSet::new();
        let mut packages = Vec::new();
        for (w, st) in worlds.iter().zip(steps) {
            match st {
                Ok(st) => {
                    out.extend(st.worlds);
                    packages.extend(st.package);
                    self.derivations.extend(st.derivation);
                }
                Err(m) => {
                    let err = self.error(s, w, m);
                    self.record(s, kind, before, 0, Verdict::Error, packages);
                    return Err(err);
                }
            }
        }
        self.record(s, kind, before, out.len(), Verdict::Ok, packages);
        Ok(out.into_iter().collect())
    }
}

struct StepCtx<'a> {
    p: &'a Program,
    opts: &'a RunOptions,
    method: &'a str,
    line: usize,
}

impl StepCtx<'_> {
    fn step(&self, index: usize, (store, sigma): &World, kind: &StmtKind) -> Result<Step, String> {
        let u = &self.p.universe;
        let view = sigma.stable_part();
        let ctx = eval_ctx(&view, sigma, store);
        let one = |s: State| Ok(Step { worlds: vec![(store.clone(), s)], ..Step::default() });
        match kind {
            StmtKind::Inhale(a) => {
                let models = minimal_models_from(a, store, u, sigma.heap()).map_err(|e| err_text(&e))?;
                let worlds = models.iter().filter_map(|m| sigma.add(m)).map(|s| (store.clone(), s)).collect();
                Ok(Step { worlds, ..Step::default() })
            }
            StmtKind::Exhale(a) | StmtKind::Assert(a) => {
                let ds = demands(a, &ctx, true).map_err(|e| err_text(&e))?;
                let d = ds.into_iter().find(|d| sigma.geq(d)).ok_or_else(|| format!("`{a}` does not hold"))?;
                if matches!(kind, StmtKind::Assert(_)) {
                    return one(sigma.clone());
                }
                one(sigma.sub(&d).map_err(|e| e.to_string())?)
            }
            StmtKind::Var(n, t, init) => {
                let v = match init {
                    Some(e) => ctx.eval(e).map_err(|e| err_text(&e))?,
                    None => match t {
                        FieldType::Ref => Value::Null,
                        FieldType::Int => Value::Int(0),
                        FieldType::Bool => Value::Bool(false),
                    },
                };
                let mut st = store.clone();
                st.set(n.clone(), v);
                Ok(Step { worlds: vec![(st, sigma.clone())], ..Step::default() })
            }
            StmtKind::Assign(n, e) => {
                let v = ctx.eval(e).map_err(|e| err_text(&e))?;
                let mut st = store.clone();
                st.set(n.clone(), v);
                Ok(Step { worlds: vec![(st, sigma.clone())], ..Step::default() })
            }
            StmtKind::Write(r, f, e) => {
                let l = ctx.loc(r, f).map_err(|e| err_text(&e))?;
                let v = ctx.eval(e).map_err(|e| err_text(&e))?;
                if sigma.field_perm(&l) != crate::assertions::full() {
                    return Err(format!("writing {l} needs full permission"));
                }
                if !u.domain(&l).is_some_and(|d| d.contains(&v)) {
                    return Err(format!("value {v} is outside the domain of {l}"));
                }
                let mut s = sigma.clone();
                s.set_value(l, v);
                one(s)
            }
            StmtKind::Apply(w) => {
                let Assertion::Wand(lhs, rhs, _) = w else { return Err(format!("`{w}` is not a wand")) };
                let need = Assertion::star(w.clone(), (**lhs).clone());
                let ds = demands(&need, &ctx, true).map_err(|e| err_text(&e))?;
                let d = ds
                    .into_iter()
                    .find(|d| sigma.geq(d))
                    .ok_or_else(|| format!("no instance of `{w}` together with its left-hand side"))?;
                let rest = sigma.sub(&d).map_err(|e| e.to_string())?;
                let models = minimal_models_from(rhs, store, u, rest.heap()).map_err(|e| err_text(&e))?;
                // A sum that is undefined is an inconsistent world and is dropped.
                let worlds = models.iter().filter_map(|m| rest.add(m)).map(|s| (store.clone(), s)).collect();
                Ok(Step { worlds, ..Step::default() })
            }
            StmtKind::Package(w, script) => self.package(index, store, sigma, w, script),
            StmtKind::If(..) => unreachable!("handled by the caller"),
        }
    }

    fn package(
        &self,
        index: usize,
        store: &Store,
        sigma: &State,
        w: &Assertion,
        script: &ProofScript,
    ) -> Result<Step, String> {
        let u = &self.p.universe;
        let req = PackageRequest { universe: u, store, outer: sigma, wand: w, script };
        let out = package(req, self.opts.algorithm);
        if let Err(e) = &out.status {
            return Err(format!("package failed: {e}"));
        }
        let kind = effective_kind(self.opts.algorithm, w);
        let mut record = PackageRecord {
            store: store.to_string(),
            outer: sigma.to_string(),
            footprint: out.footprint.as_ref().map(ToString::to_string),
            cases: out
                .case_footprints
                .iter()
                .map(|(a, f)| CaseRecord { lhs: a.to_string(), footprint: f.to_string() })
                .collect(),
            post_states: out.post_states.iter().map(ToString::to_string).collect(),
            derivation: None,
            audit: None,
        };
        if self.opts.audit {
            let mut oracle = Oracle::new(u, store.clone());
            oracle.budget = self.opts.budget;
            // Predicates are checked through their bodies.
            let wand = u.unfold_preds(&with_kind(w, kind));
            let fps: Vec<&State> = match &out.footprint {
                Some(f) => vec![f],
                None => out.case_footprints.iter().map(|(_, f)| f).collect(),
            };
            let mut audit = AuditRecord::default();
            for f in fps {
                audit.checked += 1;
                let witness = match oracle.footprint_counterexample(f, &wand) {
                    Ok(None) => continue,
                    Ok(Some(a)) => a.to_string(),
                    Err(e) => format!("oracle error: {e}"),
                };
                audit.violations.push(AuditViolation { footprint: f.to_string(), witness });
            }
            record.audit = Some(audit);
        }
        let derivation = out.derivation.map(|(conf, tree)| {
            let name = format!("{}_l{}_w{}", self.method, self.line, index);
            record.derivation = Some(name.clone());
            DerivationEntry::explicit(name, UniverseRef::Inline, u.clone(), kind, w.clone(), &conf, tree)
        });
        let worlds = out.post_states.into_iter().map(|s| (store.clone(), s)).collect();
        Ok(Step { worlds, package: Some(record), derivation })
    }
}
