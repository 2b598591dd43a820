//! Concrete syntax for expressions and assertions.
//!
//! ```text
//! wand    := ite ( ("--*" | "--*c") wand )?
//! ite     := imp ( "?" ite ":" ite )?
//! imp     := or ( "==>" imp )?
//! or      := and ( "||" and )*
//! and     := cmp ( ("&&" | "*") cmp )*
//! cmp     := unary ( ("==" | "!=" | "<" | "<=" | ">" | ">=") unary )?
//! unary   := "!" unary | postfix
//! postfix := primary ( "." ident )*
//! primary := "(" wand ")" | "acc" "(" (postfix | pred) ("," amount)? ")"
//!          | "perm" "(" postfix ")" | ident "(" args ")" | ident | literal
//! ```
//!
//! Subtrees without resources become `Pure` expressions; `&&` and `||` between pure
//! operands are boolean connectives, `*` is always a separating conjunction, and an
//! assertion-level `b ? A : B` stands for `(b ==> A) * (!b ==> B)`.

use num_traits::{One, Zero};

use super::ast::{Assertion, CmpOp, Expr, WandKind};
use crate::state_model::{fmt_perm, Name, Perm, Value};
use crate::syntax::{Cursor, SyntaxError, Tok};

#[derive(Clone, Debug)]
enum Syn {
    Wand(Box<Syn>, Box<Syn>, WandKind),
    Ite(Box<Syn>, Box<Syn>, Box<Syn>),
    Imp(Box<Syn>, Box<Syn>),
    Or(Box<Syn>, Box<Syn>),
    And(Box<Syn>, Box<Syn>),
    Star(Box<Syn>, Box<Syn>),
    Cmp(CmpOp, Box<Syn>, Box<Syn>),
    Not(Box<Syn>),
    Field(Box<Syn>, Name),
    Var(Name),
    Lit(Value),
    PermOf(Box<Syn>, Name),
    Acc(Box<Syn>, Name, Perm),
    Pred(Name, Vec<Syn>, Perm),
}

impl Syn {
    fn is_pure(&self) -> bool {
        match self {
            Syn::Wand(..) | Syn::Star(..) | Syn::Acc(..) | Syn::Pred(..) => false,
            Syn::Ite(a, b, c) => a.is_pure() && b.is_pure() && c.is_pure(),
            Syn::Imp(a, b) | Syn::Or(a, b) | Syn::And(a, b) | Syn::Cmp(_, a, b) => a.is_pure() && b.is_pure(),
            Syn::Not(a) | Syn::Field(a, _) | Syn::PermOf(a, _) => a.is_pure(),
            Syn::Var(_) | Syn::Lit(_) => true,
        }
    }
}

fn parse_wand(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let lhs = parse_ite(c)?;
    if c.eat_sym("--*") {
        let kind = if c.is_kw("c") && c.adjacent() {
            c.bump();
            WandKind::Combinable
        } else {
            WandKind::Standard
        };
        let rhs = parse_wand(c)?;
        return Ok(Syn::Wand(Box::new(lhs), Box::new(rhs), kind));
    }
    Ok(lhs)
}

fn parse_ite(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let cond = parse_imp(c)?;
    if c.eat_sym("?") {
        let t = parse_ite(c)?;
        c.expect_sym(":")?;
        let e = parse_ite(c)?;
        return Ok(Syn::Ite(Box::new(cond), Box::new(t), Box::new(e)));
    }
    Ok(cond)
}

fn parse_imp(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let lhs = parse_or(c)?;
    if c.eat_sym("==>") {
        let rhs = parse_imp(c)?;
        return Ok(Syn::Imp(Box::new(lhs), Box::new(rhs)));
    }
    Ok(lhs)
}

fn parse_or(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let mut lhs = parse_and(c)?;
    while c.eat_sym("||") {
        let rhs = parse_and(c)?;
        lhs = Syn::Or(Box::new(lhs), Box::new(rhs));
    }
    Ok(lhs)
}

fn parse_and(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let mut lhs = parse_cmp(c)?;
    loop {
        if c.eat_sym("&&") {
            let rhs = parse_cmp(c)?;
            lhs = Syn::And(Box::new(lhs), Box::new(rhs));
        } else if c.eat_sym("*") {
            let rhs = parse_cmp(c)?;
            lhs = Syn::Star(Box::new(lhs), Box::new(rhs));
        } else {
            return Ok(lhs);
        }
    }
}

fn parse_cmp(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let lhs = parse_unary(c)?;
    let (op, swap) = match c.peek() {
        Tok::Sym("==") => (CmpOp::Eq, false),
        Tok::Sym("!=") => (CmpOp::Ne, false),
        Tok::Sym("<") => (CmpOp::Lt, false),
        Tok::Sym("<=") => (CmpOp::Le, false),
        Tok::Sym(">") => (CmpOp::Lt, true),
        Tok::Sym(">=") => (CmpOp::Le, true),
        _ => return Ok(lhs),
    };
    c.bump();
    let rhs = parse_unary(c)?;
    Ok(if swap { Syn::Cmp(op, Box::new(rhs), Box::new(lhs)) } else { Syn::Cmp(op, Box::new(lhs), Box::new(rhs)) })
}

fn parse_unary(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    if c.eat_sym("!") {
        return Ok(Syn::Not(Box::new(parse_unary(c)?)));
    }
    parse_postfix(c)
}

fn parse_postfix(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let mut e = parse_primary(c)?;
    while c.eat_sym(".") {
        let f = c.ident()?;
        e = Syn::Field(Box::new(e), Name::new(&f));
    }
    Ok(e)
}

fn parse_amount(c: &mut Cursor) -> Result<Perm, SyntaxError> {
    let p = match c.bump() {
        Tok::Int(i) if i >= 0 => Perm::from_integer(i),
        Tok::Frac(n, d) if n >= 0 => Perm::new(n, d),
        Tok::Ident(s) if s == "write" => Perm::one(),
        Tok::Ident(s) if s == "none" => Perm::zero(),
        t => return Err(c.error(&format!("expected a permission amount, found {t}"))),
    };
    Ok(p)
}

fn parse_primary(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    let pos_err = c.error("expected an expression");
    match c.peek().clone() {
        Tok::Sym("(") => {
            c.bump();
            let e = parse_wand(c)?;
            c.expect_sym(")")?;
            Ok(e)
        }
        Tok::Int(i) => {
            c.bump();
            Ok(Syn::Lit(Value::Int(i)))
        }
        Tok::Frac(n, d) => {
            c.bump();
            Ok(Syn::Lit(Value::Perm(Perm::new(n, d))))
        }
        Tok::Ident(id) => {
            c.bump();
            match id.as_str() {
                "true" => return Ok(Syn::Lit(Value::Bool(true))),
                "false" => return Ok(Syn::Lit(Value::Bool(false))),
                "null" => return Ok(Syn::Lit(Value::Null)),
                "write" => return Ok(Syn::Lit(Value::Perm(Perm::one()))),
                "none" => return Ok(Syn::Lit(Value::Perm(Perm::zero()))),
                "acc" => {
                    c.expect_sym("(")?;
                    let target = parse_postfix_or_pred(c)?;
                    let amount = if c.eat_sym(",") { parse_amount(c)? } else { Perm::one() };
                    c.expect_sym(")")?;
                    return match target {
                        Syn::Field(e, f) => Ok(Syn::Acc(e, f, amount)),
                        Syn::Pred(n, args, p) => Ok(Syn::Pred(n, args, p * amount)),
                        _ => Err(c.error("`acc` expects a field access or a predicate instance")),
                    };
                }
                "perm" => {
                    c.expect_sym("(")?;
                    let target = parse_postfix(c)?;
                    c.expect_sym(")")?;
                    return match target {
                        Syn::Field(e, f) => Ok(Syn::PermOf(e, f)),
                        _ => Err(c.error("`perm` expects a field access")),
                    };
                }
                _ => {}
            }
            if c.is_sym("(") {
                c.bump();
                let args = parse_args(c)?;
                return Ok(Syn::Pred(Name::new(&id), args, Perm::one()));
            }
            Ok(Syn::Var(Name::new(&id)))
        }
        _ => Err(pos_err),
    }
}

fn parse_postfix_or_pred(c: &mut Cursor) -> Result<Syn, SyntaxError> {
    parse_postfix(c)
}

fn parse_args(c: &mut Cursor) -> Result<Vec<Syn>, SyntaxError> {
    let mut args = Vec::new();
    if c.eat_sym(")") {
        return Ok(args);
    }
    loop {
        args.push(parse_ite(c)?);
        if c.eat_sym(")") {
            return Ok(args);
        }
        c.expect_sym(",")?;
    }
}

fn to_expr(s: &Syn, c: &Cursor) -> Result<Expr, SyntaxError> {
    let b = |x: &Syn| to_expr(x, c).map(Box::new);
    Ok(match s {
        Syn::Var(n) => Expr::Var(n.clone()),
        Syn::Lit(v) => Expr::Lit(v.clone()),
        Syn::Field(e, f) => Expr::Field(b(e)?, f.clone()),
        Syn::PermOf(e, f) => Expr::PermOf(b(e)?, f.clone()),
        Syn::Cmp(op, x, y) => Expr::Cmp(op.clone(), b(x)?, b(y)?),
        Syn::And(x, y) => Expr::And(b(x)?, b(y)?),
        Syn::Or(x, y) => Expr::Or(b(x)?, b(y)?),
        Syn::Not(x) => Expr::Not(b(x)?),
        Syn::Imp(x, y) => Expr::Implies(b(x)?, b(y)?),
        Syn::Ite(x, y, z) => Expr::Ite(b(x)?, b(y)?, b(z)?),
        Syn::Wand(..) | Syn::Star(..) | Syn::Acc(..) | Syn::Pred(..) => {
            return Err(c.error("resource assertion used where an expression is required"))
        }
    })
}

fn to_assertion(s: &Syn, c: &Cursor) -> Result<Assertion, SyntaxError> {
    if s.is_pure() {
        return Ok(Assertion::Pure(to_expr(s, c)?));
    }
    let a = |x: &Syn| to_assertion(x, c);
    Ok(match s {
        Syn::Wand(l, r, k) => Assertion::wand(a(l)?, a(r)?, *k),
        Syn::Ite(cond, t, e) => {
            if !cond.is_pure() {
                return Err(c.error("conditional guard must be pure"));
            }
            let g = to_expr(cond, c)?;
            Assertion::star(Assertion::imp(g.clone(), a(t)?), Assertion::imp(Expr::negate(g), a(e)?))
        }
        Syn::Imp(l, r) => {
            if !l.is_pure() {
                return Err(c.error("implication guard must be pure"));
            }
            Assertion::imp(to_expr(l, c)?, a(r)?)
        }
        Syn::Or(x, y) => Assertion::or(a(x)?, a(y)?),
        Syn::And(x, y) | Syn::Star(x, y) => Assertion::star(a(x)?, a(y)?),
        Syn::Acc(e, f, p) => Assertion::Acc(to_expr(e, c)?, f.clone(), *p),
        Syn::Pred(n, args, p) => {
            let args = args.iter().map(|x| to_expr(x, c)).collect::<Result<_, _>>()?;
            Assertion::Pred(n.clone(), args, *p)
        }
        Syn::Cmp(..) | Syn::Not(..) | Syn::Field(..) | Syn::PermOf(..) | Syn::Var(..) | Syn::Lit(..) => {
            return Err(c.error("resource assertion used inside an expression"))
        }
    })
}

/// Parses an assertion at the cursor (used by the program parser).
pub fn assertion_at(c: &mut Cursor) -> Result<Assertion, SyntaxError> {
    let s = parse_wand(c)?;
    to_assertion(&s, c)
}

/// Parses an expression at the cursor.
pub fn expr_at(c: &mut Cursor) -> Result<Expr, SyntaxError> {
    let s = parse_ite(c)?;
    to_expr(&s, c)
}

pub fn parse_assertion(src: &str) -> Result<Assertion, SyntaxError> {
    let mut c = Cursor::new(src)?;
    let a = assertion_at(&mut c)?;
    if !c.at_eof() {
        return Err(c.error(&format!("unexpected {} after assertion", c.peek())));
    }
    Ok(a)
}

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut c = Cursor::new(src)?;
    let e = expr_at(&mut c)?;
    if !c.at_eof() {
        return Err(c.error(&format!("unexpected {} after expression", c.peek())));
    }
    Ok(e)
}

const WAND: u8 = 0;
const ITE: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const CMP: u8 = 5;
const NOT: u8 = 6;
const ATOM: u8 = 7;

fn paren(own: u8, ctx: u8, s: String) -> String {
    if own < ctx {
        format!("({s})")
    } else {
        s
    }
}

fn lit(v: &Value) -> String {
    match v {
        Value::Perm(p) if p.is_one() => "write".into(),
        Value::Perm(p) if p.is_zero() => "none".into(),
        Value::Perm(p) if p.is_integer() => format!("{}/1", p.numer()),
        Value::Perm(p) => fmt_perm(p),
        other => other.to_string(),
    }
}

fn pe(e: &Expr, ctx: u8) -> String {
    match e {
        Expr::Var(n) => n.to_string(),
        Expr::Lit(v) => lit(v),
        Expr::Field(x, f) => format!("{}.{f}", pe(x, ATOM)),
        Expr::PermOf(x, f) => format!("perm({}.{f})", pe(x, ATOM)),
        Expr::Cmp(op, x, y) => paren(CMP, ctx, format!("{} {} {}", pe(x, NOT), op.symbol(), pe(y, NOT))),
        Expr::Not(x) => paren(NOT, ctx, format!("!{}", pe(x, NOT))),
        Expr::And(x, y) => paren(AND, ctx, format!("{} && {}", pe(x, AND), pe(y, CMP))),
        Expr::Or(x, y) => paren(OR, ctx, format!("{} || {}", pe(x, OR), pe(y, AND))),
        Expr::Implies(x, y) => paren(IMP, ctx, format!("{} ==> {}", pe(x, OR), pe(y, IMP))),
        Expr::Ite(c, t, f) => paren(ITE, ctx, format!("{} ? {} : {}", pe(c, IMP), pe(t, ITE), pe(f, ITE))),
    }
}

fn amount_suffix(p: &Perm) -> String {
    if p.is_one() {
        String::new()
    } else {
        format!(", {}", lit(&Value::Perm(*p)))
    }
}

fn pa(a: &Assertion, ctx: u8) -> String {
    match a {
        Assertion::Pure(e) => pe(e, ctx),
        Assertion::Acc(e, f, p) => format!("acc({}.{f}{})", pe(e, ATOM), amount_suffix(p)),
        Assertion::Pred(n, args, p) => {
            let args: Vec<String> = args.iter().map(|x| pe(x, ITE)).collect();
            let inst = format!("{n}({})", args.join(", "));
            if p.is_one() {
                inst
            } else {
                format!("acc({inst}{})", amount_suffix(p))
            }
        }
        Assertion::Star(x, y) => paren(AND, ctx, format!("{} * {}", pa(x, AND), pa(y, CMP))),
        Assertion::Or(x, y) => paren(OR, ctx, format!("{} || {}", pa(x, OR), pa(y, AND))),
        Assertion::Imp(b, x) => paren(IMP, ctx, format!("{} ==> {}", pe(b, OR), pa(x, IMP))),
        Assertion::Wand(x, y, k) => paren(WAND, ctx, format!("{} {} {}", pa(x, ITE), k.symbol(), pa(y, WAND))),
    }
}

#[must_use]
pub fn print_expr(e: &Expr) -> String {
    pe(e, WAND)
}

#[must_use]
pub fn print_assertion(a: &Assertion) -> String {
    pa(a, WAND)
}

impl std::fmt::Display for Assertion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_assertion(self))
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_expr(self))
    }
}
