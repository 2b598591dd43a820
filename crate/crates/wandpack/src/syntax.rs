//! Shared lexer for assertions, proof scripts and programs.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Frac(i64, i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Frac(n, d) => write!(f, "`{n}/{d}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{pos}: {msg}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub msg: String,
}

// Longest symbols first so that matching is greedy.
const SYMBOLS: &[&str] = &[
    "--*", "==>", "==", "!=", "<=", ">=", "&&", "||", ":=", "(", ")", "{", "}", "[", "]", ",", ".", "*", "!", "<", ">",
    "?", ":", ";", "=", "@",
];

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize, chars: &[char]| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1, &chars);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1, &chars);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), pos));
            continue;
        }
        let negative = c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit);
        if c.is_ascii_digit() || negative {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let num: String = chars[start..i].iter().collect();
            col += i - start;
            let n: i64 = num.parse().map_err(|_| SyntaxError { pos, msg: format!("integer `{num}` out of range") })?;
            if chars.get(i) == Some(&'/') && chars.get(i + 1).is_some_and(char::is_ascii_digit) {
                let dstart = i + 1;
                let mut j = dstart;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let den: String = chars[dstart..j].iter().collect();
                let d: i64 =
                    den.parse().map_err(|_| SyntaxError { pos, msg: format!("integer `{den}` out of range") })?;
                if d == 0 {
                    return Err(SyntaxError { pos, msg: "zero denominator".into() });
                }
                col += j - i;
                i = j;
                out.push((Tok::Frac(n, d), pos));
            } else {
                out.push((Tok::Int(n), pos));
            }
            continue;
        }
        if c == '"' {
            let mut j = i + 1;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(SyntaxError { pos, msg: "unterminated string".into() });
            }
            let s: String = chars[i + 1..j].iter().collect();
            let n = j + 1 - i;
            advance(&mut i, &mut line, &mut col, n, &chars);
            out.push((Tok::Str(s), pos));
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        let sym = SYMBOLS.iter().find(|s| rest.starts_with(**s));
        match sym {
            Some(s) => {
                advance(&mut i, &mut line, &mut col, s.len(), &chars);
                out.push((Tok::Sym(s), pos));
            }
            None => return Err(SyntaxError { pos, msg: format!("unexpected character `{c}`") }),
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// Token cursor shared by the recursive-descent parsers.
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Cursor, SyntaxError> {
        Ok(Cursor { toks: lex(src)?, at: 0 })
    }

    #[must_use]
    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    #[must_use]
    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    #[must_use]
    pub fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    #[must_use]
    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    #[must_use]
    pub fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`, found {}", self.peek())))
        }
    }

    pub fn expect_kw(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`, found {}", self.peek())))
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => Err(self.error(&format!("expected identifier, found {t}"))),
        }
    }

    #[must_use]
    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    #[must_use]
    pub fn error(&self, msg: &str) -> SyntaxError {
        SyntaxError { pos: self.pos(), msg: msg.to_string() }
    }

    /// True when the identifier directly follows the previous token (used for `--*c`).
    #[must_use]
    pub fn adjacent(&self) -> bool {
        if self.at == 0 {
            return false;
        }
        let (prev, p) = &self.toks[self.at - 1];
        let len = match prev {
            Tok::Sym(s) => s.len(),
            _ => return false,
        };
        let cur = self.toks[self.at].1;
        cur.line == p.line && cur.col == p.col + len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_wands_and_fractions() {
        let toks: Vec<Tok> = lex("acc(x.f, 1/2) --*c y == -3 // tail").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Ident("acc".into()),
                Tok::Sym("("),
                Tok::Ident("x".into()),
                Tok::Sym("."),
                Tok::Ident("f".into()),
                Tok::Sym(","),
                Tok::Frac(1, 2),
                Tok::Sym(")"),
                Tok::Sym("--*"),
                Tok::Ident("c".into()),
                Tok::Ident("y".into()),
                Tok::Sym("=="),
                Tok::Int(-3),
                Tok::Eof
            ]
        );
    }
}
