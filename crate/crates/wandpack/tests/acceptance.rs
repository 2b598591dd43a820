//! Acceptance run: one pass/fail line per criterion, non-zero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use common::*;
use wandpack::algebra::check_axioms;
use wandpack::algorithms::{canonical_derivation, package_combinable, package_sound, PackageRequest, ProofScript};
use wandpack::assertions::{Assertion, WandKind};
use wandpack::oracle::{FootprintSearch, Oracle, DEFAULT_BUDGET};
use wandpack::package_logic::{check_derivation, parse_derivation_file};
use wandpack::state_model::{mult, Perm, State};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wandpack"))
}

fn verify(program: &str, args: &[&str]) -> (i32, String) {
    let out = bin().arg("verify").arg(corpus(program)).args(args).output().expect("run wandpack");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn oracle_err(e: impl std::fmt::Display) -> String {
    format!("oracle: {e}")
}

fn laws() -> Outcome {
    let u = load_universe("u1.universe");
    let reports = check_axioms(&u, DEFAULT_BUDGET).map_err(oracle_err)?;
    for r in &reports {
        ensure(r.counterexample.is_none(), format!("{} fails", r.axiom))?;
    }
    let out = bin().arg("laws").arg(corpus("u1.universe")).output().map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), "`laws` did not exit 0")?;
    Ok(format!("{} axioms over {} states", reports.len(), reports[0].checked))
}

fn unsoundness() -> Outcome {
    let (fia, _) = verify("fia_unsound.wnd", &["--algorithm", "fia"]);
    let (sound, _) = verify("fia_unsound.wnd", &["--algorithm", "sound"]);
    ensure(fia == 0 && sound == 1, format!("exit codes fia {fia}, sound {sound}"))?;
    Ok("fia exits 0, sound exits 1".into())
}

fn sound_footprint() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let json = dir.path().join("report.json");
    let drv = dir.path().join("out.drv");
    let (code, _) =
        verify("fia_unsound.wnd", &["--json", json.to_str().unwrap(), "--emit-derivation", drv.to_str().unwrap()]);
    ensure(code == 1, format!("exit code {code}"))?;
    let text = std::fs::read_to_string(&json).map_err(|e| e.to_string())?;
    let expected = "\"footprint\": \"{y.g@1=0, z.g@1=0}\"";
    ensure(text.matches(expected).count() == 2, "footprint missing from the JSON report")?;
    let file = parse_derivation_file(&std::fs::read_to_string(&drv).unwrap(), None)?;
    ensure(file.entries.len() == 2, "expected one derivation per world")?;
    for e in &file.entries {
        let ctx = e.check()?;
        ensure(ctx.extracted == state("{y.g@1=0, z.g@1=0}"), format!("{} extracts {}", e.name, ctx.extracted))?;
    }
    let u = load_universe("u1.universe");
    let o = Oracle::new(&u, store());
    let w = assertion("acc(x.f) * (x.f == y || x.f == z) --* acc(x.f) * acc(x.f.g)");
    ensure(o.is_footprint(&state("{y.g@1=0, z.g@1=0}"), &w).map_err(oracle_err)?, "oracle rejects the footprint")?;
    Ok("{y.g@1=0, z.g@1=0} in JSON, derivations accepted, oracle agrees".into())
}

fn soundness_audit() -> Outcome {
    let script = ProofScript::default();
    let (mut cases, mut successes) = (0usize, 0usize);
    let mut seed = 0u64;
    while cases < 600 {
        let mut g = rng(seed);
        seed += 1;
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let s = store();
        let wand = gen_wand(&mut g, &gu, WandKind::Standard);
        let outer = gen_outer(&mut g, &gu);
        let o = Oracle::new(u, s.clone());
        let req = PackageRequest { universe: u, store: &s, outer: &outer, wand: &wand, script: &script };
        for (out, kind) in [(package_sound(req), WandKind::Standard), (package_combinable(req), WandKind::Combinable)] {
            let Some(fp) = out.footprint.as_ref().filter(|_| out.is_success()) else { continue };
            successes += 1;
            let w = with_kind(&wand, kind);
            if let Some(a) = o.footprint_counterexample(fp, &w).map_err(oracle_err)? {
                return Err(format!("seed {}: {fp} is not a footprint of {w}; fails for {a}", seed - 1));
            }
        }
        cases += 1;
    }
    ensure(successes >= 300, format!("only {successes} successful packages"))?;
    Ok(format!("{cases} cases, {successes} successful packages, no violations"))
}

fn completeness_probe() -> Outcome {
    let (mut wands, mut footprints) = (0usize, 0usize);
    let mut seed = 10_000u64;
    while wands < 120 {
        let mut g = rng(seed);
        seed += 1;
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let s = store();
        let wand = gen_wand(&mut g, &gu, WandKind::Standard);
        let o = Oracle::new(u, s.clone());
        let fps = o.minimal_footprints(&wand, &FootprintSearch::default()).map_err(oracle_err)?;
        for fp in &fps {
            let (conf, tree) = canonical_derivation(&wand, fp, u, &s)
                .map_err(|e| format!("seed {}: no derivation for {fp} of {wand}: {e}", seed - 1))?;
            let ctx = check_derivation(&conf, &tree).map_err(|e| format!("seed {}: {fp} of {wand}: {e}", seed - 1))?;
            ensure(&ctx.extracted == fp, format!("seed {}: extracted {} instead of {fp}", seed - 1, ctx.extracted))?;
        }
        footprints += fps.len();
        wands += 1;
    }
    Ok(format!("{wands} wands, {footprints} minimal footprints, all derived"))
}

fn non_combinability() -> Outcome {
    let u = load_universe("u2.universe");
    let o = Oracle::new(&u, store());
    let w = assertion("acc(x.f, 1/2) --* acc(x.g)");
    let wc = assertion("acc(x.f, 1/2) --*c acc(x.g)");
    let half = Perm::new(1, 2);
    let sf = state("{x.f@1=0}");
    let sg = state("{x.g@1=0}");
    let mixed = mult(half, &sf).unwrap().add(&mult(half, &sg).unwrap()).unwrap();
    let fp = |s: &State, w: &Assertion| o.is_footprint(s, w).map_err(oracle_err);
    ensure(fp(&sf, &w)?, "σ_f is not a footprint")?;
    ensure(fp(&sg, &w)?, "σ_g is not a footprint")?;
    ensure(!fp(&mixed, &w)?, "the half-half mix is a footprint")?;
    ensure(!fp(&sf, &wc)?, "σ_f is a footprint of the combinable wand")?;
    ensure(o.check_combinable(&wc).map_err(oracle_err)?.is_none(), "the combinable wand is not combinable")?;
    ensure(o.check_combinable(&w).map_err(oracle_err)?.is_some(), "the standard wand is combinable")?;
    Ok(format!("mix {mixed} rejected, combinable wand combinable"))
}

fn w_prime() -> Outcome {
    let u = load_universe("u1.universe");
    let o = Oracle::new(&u, store());
    let w = assertion("acc(x.f) * (x.f == y || x.f == z) * acc(x.f.g, 1/2) --* acc(y.g)");
    let a = state("{y.g@1=0}");
    let b = state("{y.g@1/2=0, z.g@1=0}");
    let half = Perm::new(1, 2);
    let mixed = mult(half, &a).unwrap().add(&mult(half, &b).unwrap()).unwrap();
    ensure(mixed == state("{y.g@3/4=0, z.g@1/2=0}"), format!("mix is {mixed}"))?;
    ensure(o.is_footprint(&a, &w).map_err(oracle_err)?, "acc(y.g) is not a footprint")?;
    ensure(o.is_footprint(&b, &w).map_err(oracle_err)?, "acc(y.g, 1/2) * acc(z.g) is not a footprint")?;
    ensure(!o.is_footprint(&mixed, &w).map_err(oracle_err)?, "the mix is a footprint")?;
    let cex = o.check_combinable(&w).map_err(oracle_err)?.ok_or("w' is combinable")?;
    ensure(cex.p == half && cex.q == half, "counterexample not at one half")?;
    Ok("both footprints hold, the mix fails, not combinable".into())
}

fn combinable_properties() -> Outcome {
    let (mut pairs, mut combinable_b, mut binary_a) = (0usize, 0usize, 0usize);
    let mut seed = 20_000u64;
    while pairs < 220 {
        let mut g = rng(seed);
        seed += 1;
        let gu = gen_universe(&mut g);
        let u = &gu.universe;
        let o = Oracle::new(u, store());
        let a = gen_assertion(&mut g, &gu);
        let b = gen_assertion(&mut g, &gu);
        let ws = Assertion::wand(a.clone(), b.clone(), WandKind::Standard);
        let wc = Assertion::wand(a.clone(), b.clone(), WandKind::Combinable);
        let tag = format!("seed {} ({ws})", seed - 1);
        if o.check_combinable(&b).map_err(oracle_err)?.is_none() {
            combinable_b += 1;
            ensure(
                o.check_combinable(&wc).map_err(oracle_err)?.is_none(),
                format!("{tag}: combinable wand not combinable"),
            )?;
        }
        if let Some(s) = o.check_entailment(&wc, &ws).map_err(oracle_err)? {
            return Err(format!("{tag}: {s} satisfies the combinable wand only"));
        }
        if o.is_binary(&a).map_err(oracle_err)? {
            binary_a += 1;
            for s in o.sat_states(&Assertion::tt(), true).map_err(oracle_err)? {
                let std = o.is_footprint(&s, &ws).map_err(oracle_err)?;
                let comb = o.is_footprint(&s, &wc).map_err(oracle_err)?;
                ensure(std == comb, format!("{tag}: footprints differ at {s}"))?;
            }
        }
        pairs += 1;
    }
    ensure(combinable_b > 0 && binary_a > 0, "a property was never exercised")?;
    Ok(format!("{pairs} pairs ({combinable_b} with combinable B, {binary_a} with binary A)"))
}

fn plurality() -> Outcome {
    let u = load_universe("u2.universe");
    let s = store();
    let o = Oracle::new(&u, s.clone());
    let w = assertion("acc(x.b, 1/2) --* acc(x.b, 1/2) * (x.b ==> acc(x.f))");
    let outer = state("{x.b@1=false, x.f@1=0}");
    let search = FootprintSearch { within: Some(outer.clone()), nonvacuous: false };
    let found: BTreeSet<State> = o.minimal_footprints(&w, &search).map_err(oracle_err)?.into_iter().collect();
    let f1 = state("{x.f@1=0}");
    let f2 = state("{x.b@1/2=false}");
    ensure(found.contains(&f1) && found.contains(&f2), format!("minimal footprints {found:?}"))?;
    let script = ProofScript::default();
    let out = package_sound(PackageRequest { universe: &u, store: &s, outer: &outer, wand: &w, script: &script });
    let chosen = out.footprint.clone().ok_or("package failed")?;
    ensure(found.contains(&chosen), format!("package chose {chosen}"))?;
    let drv = corpus("plural_footprint.drv");
    let file = parse_derivation_file(&std::fs::read_to_string(&drv).unwrap(), drv.parent())?;
    let other = if chosen == f1 { &f2 } else { &f1 };
    let ctx = file.entries[0].check()?;
    ensure(&ctx.extracted == other, format!("handwritten derivation extracts {}", ctx.extracted))?;
    Ok(format!("package chose {chosen}, handwritten derivation extracts {other}"))
}

fn determinism() -> Outcome {
    let mut runs = 0;
    for p in PROGRAMS {
        for a in ALGORITHMS {
            let golden = std::fs::read_to_string(corpus(&format!("golden/{p}.{a}.json"))).map_err(|e| e.to_string())?;
            for threads in ["1", "1", "4"] {
                let out = bin()
                    .arg("verify")
                    .arg(corpus(&format!("{p}.wnd")))
                    .args(["--algorithm", a, "--audit", "--json", "-", "--threads", threads])
                    .output()
                    .map_err(|e| e.to_string())?;
                let stdout = String::from_utf8_lossy(&out.stdout);
                ensure(
                    stdout.starts_with(&golden),
                    format!("{p} under {a} with {threads} thread(s) differs from golden"),
                )?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs byte-identical to the golden reports"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("algebra laws on U1", laws),
        ("FIA unsoundness reproduced", unsoundness),
        ("sound footprint of the choice wand", sound_footprint),
        ("soundness audit", soundness_audit),
        ("completeness probe", completeness_probe),
        ("non-combinability facts", non_combinability),
        ("the w' wand", w_prime),
        ("combinable wand properties", combinable_properties),
        ("footprint plurality", plurality),
        ("determinism", determinism),
    ];
    // ACCEPTANCE_ONLY=3,8 runs a subset.
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
