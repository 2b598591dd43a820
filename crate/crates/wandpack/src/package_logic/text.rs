//! Text format for derivations.
//!
//! ```text
//! wandpack-derivation 1
//! derivation <name>
//!   universe-file "<path>"          (or: begin universe ... end universe)
//!   store x=x
//!   kind standard                   (or: combinable, which selects the lifted logic)
//!   wand <assertion>
//!   outer {<state>}
//!   pc <expression>                 (zero or more)
//!   extracted {<state>}             (optional, footprint taken before the tree)
//!   witnesses minimal               (or: explicit, followed by pair lines)
//!   pair {<σ_A>} {<σ_B>} [anchor {<state>}]
//!   tree
//!   <tree>
//! end
//! ```
//!
//! Trees are s-expressions: `(extract {w} T)`, `(star T T)`, `(implication T)`,
//! `(atom (choose {σ_A} {σ_B} {choice})*)` and
//! `(disjunction (left (pair {σ_A} {σ_B})*) T T)`.

use std::fmt::Write as _;
use std::path::Path;

use super::{
    check_derivation, check_derivation_lifted, witness::pair_for, CheckError, Choice, Configuration, Context,
    Derivation, Transformer, WitnessPair, WitnessSet,
};
use crate::assertions::{parse_assertion, parse_expr, Assertion, Expr, Store, WandKind};
use crate::state_model::{State, Universe};

pub const DERIVATION_HEADER: &str = "wandpack-derivation 1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessSpec {
    Minimal,
    /// `(σ_A, σ_B, anchor)` triples.
    Explicit(Vec<(State, State, Option<State>)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UniverseRef {
    File(String),
    Inline,
}

#[derive(Clone, Debug)]
pub struct DerivationEntry {
    pub name: String,
    pub universe_ref: UniverseRef,
    pub universe: Universe,
    pub store: Store,
    pub kind: WandKind,
    pub wand: Assertion,
    pub outer: State,
    pub pc: Vec<Expr>,
    pub witnesses: WitnessSpec,
    pub extracted: State,
    pub tree: Derivation,
}

#[derive(Clone, Debug, Default)]
pub struct DerivationFile {
    pub entries: Vec<DerivationEntry>,
}

impl DerivationEntry {
    /// The configuration the tree is checked against.
    pub fn configuration(&self) -> Result<Configuration, String> {
        let (lhs, rhs, _) = self.wand.as_wand().ok_or_else(|| format!("`{}` is not a wand", self.wand))?;
        let pairs: WitnessSet = match &self.witnesses {
            WitnessSpec::Minimal => super::init_witness_set(lhs, &self.universe, &self.store, true, self.kind)?,
            WitnessSpec::Explicit(ps) => ps
                .iter()
                .map(|(a, b, anchor)| match (self.kind, anchor) {
                    (WandKind::Standard, _) => WitnessPair::new(a.clone(), b.clone(), Transformer::Identity),
                    (WandKind::Combinable, Some(c)) => {
                        WitnessPair::new(a.clone(), b.clone(), Transformer::CombinableR(c.clone()))
                    }
                    (WandKind::Combinable, None) => WitnessPair { b: b.clone(), ..pair_for(a.clone(), self.kind) },
                })
                .collect(),
        };
        let ctx = Context { outer: self.outer.clone(), pairs, extracted: self.extracted.clone() };
        Ok(Configuration { rhs: rhs.clone(), pc: self.pc.clone(), ctx, store: self.store.clone() })
    }

    /// An entry that lists the configuration's witness pairs explicitly.
    #[must_use]
    pub fn explicit(
        name: String,
        universe_ref: UniverseRef,
        universe: Universe,
        kind: WandKind,
        wand: Assertion,
        conf: &Configuration,
        tree: Derivation,
    ) -> Self {
        let pairs = conf
            .ctx
            .pairs
            .iter()
            .map(|p| match &p.t {
                Transformer::Identity => (p.a.clone(), p.b.clone(), None),
                Transformer::CombinableR(c) => (p.a.clone(), p.b.clone(), Some(c.clone())),
            })
            .collect();
        DerivationEntry {
            name,
            universe_ref,
            universe,
            store: conf.store.clone(),
            kind,
            wand,
            outer: conf.ctx.outer.clone(),
            pc: conf.pc.clone(),
            witnesses: WitnessSpec::Explicit(pairs),
            extracted: conf.ctx.extracted.clone(),
            tree,
        }
    }

    /// Checks the tree with the logic matching the wand kind.
    pub fn check(&self) -> Result<Context, String> {
        let conf = self.configuration()?;
        let r: Result<Context, CheckError> = match self.kind {
            WandKind::Standard => check_derivation(&conf, &self.tree),
            WandKind::Combinable => check_derivation_lifted(&conf, &self.tree),
        };
        r.map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SExp {
    Word(String),
    Blob(String),
    List(Vec<SExp>),
}

fn tokenize(src: &str) -> Result<Vec<String>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '(' || c == ')' {
            out.push(c.to_string());
            i += 1;
        } else if c == '{' {
            let start = i;
            let mut depth = 0;
            loop {
                match chars.get(i) {
                    None => return Err("unbalanced `{` in derivation tree".into()),
                    Some('{') => depth += 1,
                    Some('}') => {
                        depth -= 1;
                        if depth == 0 {
                            i += 1;
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && !"(){}".contains(chars[i]) {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        }
    }
    Ok(out)
}

fn sexps(src: &str) -> Result<Vec<SExp>, String> {
    fn one(toks: &[String], i: &mut usize) -> Result<SExp, String> {
        let t = toks.get(*i).ok_or("unexpected end of tree")?;
        *i += 1;
        if t == "(" {
            let mut items = Vec::new();
            loop {
                match toks.get(*i).map(String::as_str) {
                    None => return Err("missing `)` in tree".into()),
                    Some(")") => {
                        *i += 1;
                        return Ok(SExp::List(items));
                    }
                    _ => items.push(one(toks, i)?),
                }
            }
        } else if t == ")" {
            Err("unexpected `)` in tree".into())
        } else if t.starts_with('{') {
            Ok(SExp::Blob(t.clone()))
        } else {
            Ok(SExp::Word(t.clone()))
        }
    }
    let toks = tokenize(src)?;
    let mut i = 0;
    let mut out = Vec::new();
    while i < toks.len() {
        out.push(one(&toks, &mut i)?);
    }
    Ok(out)
}

fn state_of(s: &SExp) -> Result<State, String> {
    match s {
        SExp::Blob(b) => State::parse(b).map_err(|e| e.to_string()),
        other => Err(format!("expected a state in braces, found {other:?}")),
    }
}

fn tree_of(s: &SExp) -> Result<Derivation, String> {
    let SExp::List(items) = s else { return Err(format!("expected a rule application, found {s:?}")) };
    let Some(SExp::Word(tag)) = items.first() else { return Err("rule application without a rule name".into()) };
    let args = &items[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("rule `{tag}` takes {n} arguments, found {}", args.len()))
        }
    };
    match tag.as_str() {
        "extract" => {
            arity(2)?;
            Ok(Derivation::extract(state_of(&args[0])?, tree_of(&args[1])?))
        }
        "star" => {
            arity(2)?;
            Ok(Derivation::star(tree_of(&args[0])?, tree_of(&args[1])?))
        }
        "implication" => {
            arity(1)?;
            Ok(Derivation::implication(tree_of(&args[0])?))
        }
        "atom" => {
            let mut choices = Vec::new();
            for c in args {
                match c {
                    SExp::List(v) if v.len() == 4 && v[0] == SExp::Word("choose".into()) => {
                        choices.push(Choice { a: state_of(&v[1])?, b: state_of(&v[2])?, choice: state_of(&v[3])? })
                    }
                    other => return Err(format!("expected (choose {{A}} {{B}} {{choice}}), found {other:?}")),
                }
            }
            Ok(Derivation::Atom(choices))
        }
        "disjunction" => {
            arity(3)?;
            let SExp::List(l) = &args[0] else { return Err("expected (left ...)".into()) };
            if l.first() != Some(&SExp::Word("left".into())) {
                return Err("expected (left ...)".into());
            }
            let mut left = Vec::new();
            for p in &l[1..] {
                match p {
                    SExp::List(v) if v.len() == 3 && v[0] == SExp::Word("pair".into()) => {
                        left.push((state_of(&v[1])?, state_of(&v[2])?));
                    }
                    other => return Err(format!("expected (pair {{A}} {{B}}), found {other:?}")),
                }
            }
            Ok(Derivation::Disjunction { left, a: Box::new(tree_of(&args[1])?), b: Box::new(tree_of(&args[2])?) })
        }
        other => Err(format!("unknown rule `{other}`")),
    }
}

/// Parses a tree written in the s-expression syntax.
pub fn parse_tree(src: &str) -> Result<Derivation, String> {
    let v = sexps(src)?;
    match v.as_slice() {
        [one] => tree_of(one),
        _ => Err(format!("expected exactly one tree, found {}", v.len())),
    }
}

fn indent(out: &mut String, n: usize) {
    out.extend(std::iter::repeat_n(' ', n));
}

fn pr(d: &Derivation, ind: usize, out: &mut String) {
    match d {
        Derivation::Extract { w, child } => {
            let _ = writeln!(out, "(extract {w}");
            indent(out, ind + 2);
            pr(child, ind + 2, out);
            out.push(')');
        }
        Derivation::Star(a, b) => {
            out.push_str("(star\n");
            indent(out, ind + 2);
            pr(a, ind + 2, out);
            out.push('\n');
            indent(out, ind + 2);
            pr(b, ind + 2, out);
            out.push(')');
        }
        Derivation::Implication(a) => {
            out.push_str("(implication\n");
            indent(out, ind + 2);
            pr(a, ind + 2, out);
            out.push(')');
        }
        Derivation::Atom(cs) => {
            out.push_str("(atom");
            for c in cs {
                out.push('\n');
                indent(out, ind + 2);
                let _ = write!(out, "(choose {} {} {})", c.a, c.b, c.choice);
            }
            out.push(')');
        }
        Derivation::Disjunction { left, a, b } => {
            out.push_str("(disjunction\n");
            indent(out, ind + 2);
            out.push_str("(left");
            for (x, y) in left {
                let _ = write!(out, " (pair {x} {y})");
            }
            out.push_str(")\n");
            indent(out, ind + 2);
            pr(a, ind + 2, out);
            out.push('\n');
            indent(out, ind + 2);
            pr(b, ind + 2, out);
            out.push(')');
        }
    }
}

#[must_use]
pub fn print_derivation(d: &Derivation) -> String {
    let mut out = String::new();
    pr(d, 0, &mut out);
    out
}

#[must_use]
pub fn print_derivation_file(f: &DerivationFile) -> String {
    let mut out = format!("{DERIVATION_HEADER}\n");
    for e in &f.entries {
        let _ = writeln!(out, "\nderivation {}", e.name);
        match &e.universe_ref {
            UniverseRef::File(p) => {
                let _ = writeln!(out, "  universe-file \"{p}\"");
            }
            UniverseRef::Inline => {
                out.push_str("  begin universe\n");
                for line in e.universe.to_string().lines() {
                    let _ = writeln!(out, "    {line}");
                }
                out.push_str("  end universe\n");
            }
        }
        let _ = writeln!(out, "  store {}", e.store);
        let _ = writeln!(out, "  kind {}", e.kind.name());
        let _ = writeln!(out, "  wand {}", e.wand);
        let _ = writeln!(out, "  outer {}", e.outer);
        for b in &e.pc {
            let _ = writeln!(out, "  pc {b}");
        }
        if !e.extracted.is_unit() {
            let _ = writeln!(out, "  extracted {}", e.extracted);
        }
        match &e.witnesses {
            WitnessSpec::Minimal => out.push_str("  witnesses minimal\n"),
            WitnessSpec::Explicit(ps) => {
                out.push_str("  witnesses explicit\n");
                for (a, b, anchor) in ps {
                    let _ = write!(out, "  pair {a} {b}");
                    if let Some(c) = anchor {
                        let _ = write!(out, " anchor {c}");
                    }
                    out.push('\n');
                }
            }
        }
        out.push_str("  tree\n");
        for line in print_derivation(&e.tree).lines() {
            let _ = writeln!(out, "  {line}");
        }
        out.push_str("end\n");
    }
    out
}

/// Parses a derivation file; universe files are resolved relative to `base`.
pub fn parse_derivation_file(src: &str, base: Option<&Path>) -> Result<DerivationFile, String> {
    let mut lines =
        src.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h == DERIVATION_HEADER => {}
        _ => return Err(format!("missing header `{DERIVATION_HEADER}`")),
    }
    let mut file = DerivationFile::default();
    while let Some((n, line)) = lines.next() {
        let name = line
            .strip_prefix("derivation ")
            .ok_or_else(|| format!("line {n}: expected `derivation <name>`"))?
            .trim()
            .to_string();
        let mut universe: Option<(UniverseRef, Universe)> = None;
        let mut store = Store::new();
        let mut kind = WandKind::Standard;
        let mut wand = None;
        let mut outer = None;
        let mut pc = Vec::new();
        let mut witnesses = WitnessSpec::Minimal;
        let mut extracted = State::unit();
        let mut tree = None;
        loop {
            let (n, line) = lines.next().ok_or_else(|| format!("derivation `{name}` is not terminated by `end`"))?;
            let at = |m: String| format!("line {n}: {m}");
            let (key, rest) = line.split_once(char::is_whitespace).map_or((line, ""), |(k, r)| (k, r.trim()));
            match key {
                "end" => break,
                "universe-file" => {
                    let p = rest.trim_matches('"').to_string();
                    let full = base.map_or_else(|| Path::new(&p).to_path_buf(), |b| b.join(&p));
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| at(format!("cannot read {}: {e}", full.display())))?;
                    let u = Universe::parse(&text).map_err(|e| at(format!("{}: {e}", full.display())))?;
                    universe = Some((UniverseRef::File(p), u));
                }
                "begin" if rest == "universe" => {
                    let mut text = String::new();
                    loop {
                        let (_, l) = lines.next().ok_or_else(|| at("unterminated universe block".into()))?;
                        if l == "end universe" {
                            break;
                        }
                        text.push_str(l);
                        text.push('\n');
                    }
                    universe = Some((UniverseRef::Inline, Universe::parse(&text).map_err(|e| at(e.to_string()))?));
                }
                "store" => store = Store::parse(rest).map_err(at)?,
                "kind" => kind = WandKind::parse(rest).map_err(at)?,
                "wand" => wand = Some(parse_assertion(rest).map_err(|e| at(e.to_string()))?),
                "outer" => outer = Some(State::parse(rest).map_err(|e| at(e.to_string()))?),
                "extracted" => extracted = State::parse(rest).map_err(|e| at(e.to_string()))?,
                "pc" => pc.push(parse_expr(rest).map_err(|e| at(e.to_string()))?),
                "witnesses" => {
                    witnesses = match rest {
                        "minimal" => WitnessSpec::Minimal,
                        "explicit" => WitnessSpec::Explicit(Vec::new()),
                        other => return Err(at(format!("unknown witness mode `{other}`"))),
                    }
                }
                "pair" => {
                    let WitnessSpec::Explicit(ps) = &mut witnesses else {
                        return Err(at("`pair` requires `witnesses explicit`".into()));
                    };
                    let items = sexps(rest).map_err(at)?;
                    match items.as_slice() {
                        [a, b] => ps.push((state_of(a).map_err(at)?, state_of(b).map_err(at)?, None)),
                        [a, b, SExp::Word(k), c] if k == "anchor" => {
                            ps.push((
                                state_of(a).map_err(at)?,
                                state_of(b).map_err(at)?,
                                Some(state_of(c).map_err(at)?),
                            ));
                        }
                        _ => return Err(at("expected `pair {A} {B} [anchor {C}]`".into())),
                    }
                }
                "tree" => {
                    let mut text = String::new();
                    let mut depth: i64 = 0;
                    loop {
                        let (_, l) = lines.next().ok_or_else(|| at("unterminated tree".into()))?;
                        text.push_str(l);
                        text.push('\n');
                        depth += tree_depth(l);
                        if depth <= 0 {
                            break;
                        }
                    }
                    tree = Some(parse_tree(&text).map_err(at)?);
                }
                other => return Err(at(format!("unknown key `{other}`"))),
            }
        }
        let (universe_ref, universe) = universe.ok_or_else(|| format!("derivation `{name}` names no universe"))?;
        file.entries.push(DerivationEntry {
            name: name.clone(),
            universe_ref,
            universe,
            store,
            kind,
            wand: wand.ok_or_else(|| format!("derivation `{name}` has no wand"))?,
            outer: outer.ok_or_else(|| format!("derivation `{name}` has no outer state"))?,
            pc,
            witnesses,
            extracted,
            tree: tree.ok_or_else(|| format!("derivation `{name}` has no tree"))?,
        });
    }
    Ok(file)
}

/// Net parenthesis depth of a line, ignoring braces.
fn tree_depth(line: &str) -> i64 {
    let mut d = 0;
    let mut braces = 0;
    for c in line.chars() {
        match c {
            '{' => braces += 1,
            '}' => braces -= 1,
            '(' if braces == 0 => d += 1,
            ')' if braces == 0 => d -= 1,
            _ => {}
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_round_trip() {
        let src =
            "(extract {x.b@1/2=false} (star (atom (choose {x.b@1=false} {} {x.b@1/2=false})) (implication (atom))))";
        let t = parse_tree(src).unwrap();
        assert_eq!(parse_tree(&print_derivation(&t)).unwrap(), t);
        let d = "(disjunction (left (pair {y.g@1=0} {})) (atom) (atom (choose {z.g@1=0} {} {z.g@1=0})))";
        let t = parse_tree(d).unwrap();
        assert_eq!(parse_tree(&print_derivation(&t)).unwrap(), t);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        assert!(parse_tree("(star (atom))").is_err());
        assert!(parse_tree("(frobnicate)").is_err());
        assert!(parse_tree("(extract {x.f@1} (atom)").is_err());
    }

    #[test]
    fn file_round_trip_with_inline_universe() {
        let src = "wandpack-derivation 1\n\
            derivation demo\n\
              begin universe\n\
                wandpack-universe 1\n\
                granularity 2\n\
                refs x\n\
                field f: Int\n\
                loc x.f in {0}\n\
              end universe\n\
              store \n\
              kind standard\n\
              wand acc(x.f) --* acc(x.f)\n\
              outer {x.f@1=0}\n\
              witnesses minimal\n\
              tree\n\
              (atom\n\
                (choose {x.f@1=0} {} {x.f@1=0}))\n\
            end\n";
        let f = parse_derivation_file(src, None).unwrap();
        let again = parse_derivation_file(&print_derivation_file(&f), None).unwrap();
        assert_eq!(again.entries[0].tree, f.entries[0].tree);
        let ctx = f.entries[0].check().unwrap();
        assert_eq!(ctx.extracted, State::unit());
    }
}
