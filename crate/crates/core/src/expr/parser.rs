//! Recursive-descent parser for the expression language.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr     := sign? term (('+'|'-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' exponent)?
//! base     := rational | 't' | ident | ident "'"{1..6} | 'D(' ident ',' int ')'
//!           | 'sin(' lin ')' | 'cos(' lin ')' | 'exp(' lin ')' | '(' expr ')'
//! exponent := '-'? rational | '(' '-'? rational ')'
//! lin      := expr canonicalizing to c*t or c*x (x an order-0 coordinate)
//! rational := int ('/' posint)?
//! ```
//!
//! `x''` is shorthand for `D(x,2)`. Parameters substitute their rational
//! values at parse time. `t`, `D`, `sin`, `cos`, `exp` are reserved.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{linear_variable, Expr, TransKind};
use crate::error::{Error, Result};
use crate::rational::Rational;

const RESERVED: [&str; 5] = ["t", "D", "sin", "cos", "exp"];
const MAX_PRIMES: usize = 6;
const MAX_PARSED_ORDER: u32 = 32;

pub fn parse(
    text: &str,
    coords: &[impl AsRef<str>],
    params: &BTreeMap<String, Rational>,
) -> Result<Expr> {
    let mut index = BTreeMap::new();
    for (i, c) in coords.iter().enumerate() {
        let name = c.as_ref();
        validate_name(name)?;
        if index.insert(name.to_string(), i).is_some() {
            return Err(Error::Config(format!("duplicate coordinate `{name}`")));
        }
    }
    for name in params.keys() {
        validate_name(name)?;
        if index.contains_key(name) {
            return Err(Error::Config(format!(
                "`{name}` declared as both coordinate and parameter"
            )));
        }
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        coords: index,
        params,
    };
    let e = p.parse_expr()?;
    p.expect_eof()?;
    Ok(e)
}

fn validate_name(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok_first = chars
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false);
    let ok_rest = name
        .chars()
        .skip(1)
        .all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok_first || !ok_rest {
        return Err(Error::Config(format!("invalid identifier `{name}`")));
    }
    if RESERVED.contains(&name) {
        return Err(Error::Config(format!("`{name}` is reserved")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
    Comma,
    Apostrophe,
    Dot,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Apostrophe => "`'`".into(),
            Tok::Dot => "`.`".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = i;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '\'' => Tok::Apostrophe,
            '.' => Tok::Dot,
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push(Lexed {
                    tok: Tok::Int(n),
                    pos,
                });
                continue;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Lexed {
                    tok: Tok::Ident(text[start..i].to_string()),
                    pos,
                });
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    position: pos,
                    expected: "a token".into(),
                    found: format!("`{other}`"),
                })
            }
        };
        out.push(Lexed { tok, pos });
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Lexed>,
    i: usize,
    coords: BTreeMap<String, usize>,
    params: &'a BTreeMap<String, Rational>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|l| &l.tok)
    }

    fn pos(&self) -> usize {
        self.toks
            .get(self.i)
            .map(|l| l.pos)
            .unwrap_or_else(|| self.toks.last().map(|l| l.pos + 1).unwrap_or(0))
    }

    fn advance(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.i).map(|l| &l.tok);
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> Error {
        Error::Syntax {
            position: self.pos(),
            expected: expected.into(),
            found: self
                .peek()
                .map(|t| t.describe())
                .unwrap_or_else(|| "end of input".into()),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err_here(expected))
        }
    }

    fn expect_eof(&self) -> Result<()> {
        if self.i == self.toks.len() {
            Ok(())
        } else {
            Err(self.err_here("end of input"))
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                self.i += 1;
                negate = true;
            }
            Some(Tok::Plus) => {
                self.i += 1;
            }
            _ => {}
        }
        let first = self.parse_term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.i += 1;
                    let t = self.parse_term()?;
                    acc = acc.add(&t);
                }
                Some(Tok::Minus) => {
                    self.i += 1;
                    let t = self.parse_term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut acc = self.parse_factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.i += 1;
            let f = self.parse_factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Expr> {
        let base = self.parse_base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.i += 1;
            let e = self.parse_exponent()?;
            return base.pow(&e);
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<Rational> {
        let parenthesized = self.peek() == Some(&Tok::LParen);
        if parenthesized {
            self.i += 1;
        }
        let mut neg = false;
        if self.peek() == Some(&Tok::Minus) {
            self.i += 1;
            neg = true;
        }
        let r = match self.peek() {
            Some(Tok::Int(_)) => self.parse_rational()?,
            _ => {
                return Err(Error::NonRationalExponent(format!(
                    "at byte {}",
                    self.pos()
                )))
            }
        };
        if self.peek() == Some(&Tok::Dot) {
            return Err(Error::NonRationalExponent(format!(
                "decimal exponent at byte {}",
                self.pos()
            )));
        }
        if parenthesized {
            self.expect(Tok::RParen, "`)` closing exponent")?;
        }
        Ok(if neg { -r } else { r })
    }

    /// int ('/' posint)? with the cursor on the integer.
    fn parse_rational(&mut self) -> Result<Rational> {
        let n = match self.advance() {
            Some(Tok::Int(n)) => n.clone(),
            _ => return Err(self.err_here("an integer")),
        };
        if self.peek() == Some(&Tok::Slash) {
            self.i += 1;
            let d = match self.advance() {
                Some(Tok::Int(d)) => d.clone(),
                _ => return Err(self.err_here("a positive denominator")),
            };
            if d == BigInt::from(0) {
                return Err(Error::Domain("division by zero in rational literal".into()));
            }
            return Ok(Rational::new(n, d));
        }
        Ok(Rational::from_integer(n))
    }

    fn parse_base(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(_)) => {
                let r = self.parse_rational()?;
                Ok(Expr::rational(r))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                self.parse_ident(&name)
            }
            _ => Err(self.err_here("a number, identifier or `(`")),
        }
    }

    fn parse_ident(&mut self, name: &str) -> Result<Expr> {
        match name {
            "t" => {
                if self.peek() == Some(&Tok::Apostrophe) {
                    return Err(self.err_here("no prime on `t`"));
                }
                Ok(Expr::time())
            }
            "D" => {
                self.expect(Tok::LParen, "`(` after D")?;
                let coord = match self.advance() {
                    Some(Tok::Ident(c)) => c.clone(),
                    _ => return Err(self.err_here("a coordinate name")),
                };
                let idx = *self
                    .coords
                    .get(&coord)
                    .ok_or_else(|| Error::UnknownIdentifier(coord.clone()))?;
                self.expect(Tok::Comma, "`,`")?;
                let order = match self.advance() {
                    Some(Tok::Int(n)) => n
                        .to_u32()
                        .filter(|&k| k <= MAX_PARSED_ORDER)
                        .ok_or_else(|| Error::Domain("derivative order out of range".into()))?,
                    _ => return Err(self.err_here("a derivative order")),
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::jet(idx, order))
            }
            "sin" | "cos" | "exp" => {
                let kind = match name {
                    "sin" => TransKind::Sin,
                    "cos" => TransKind::Cos,
                    _ => TransKind::Exp,
                };
                self.expect(Tok::LParen, "`(`")?;
                let start = self.pos();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "`)` closing the argument")?;
                if inner.is_zero() {
                    return Ok(match kind {
                        TransKind::Sin => Expr::zero(),
                        TransKind::Cos | TransKind::Exp => Expr::one(),
                    });
                }
                let (arg, freq) = linear_variable(&inner).ok_or_else(|| {
                    Error::NonlinearTransArgument(format!(
                        "argument starting at byte {start} is not w*t or w*x"
                    ))
                })?;
                Ok(Expr::trans(kind, arg, freq))
            }
            _ => {
                if let Some(&idx) = self.coords.get(name) {
                    let mut primes = 0usize;
                    while self.peek() == Some(&Tok::Apostrophe) {
                        self.i += 1;
                        primes += 1;
                        if primes > MAX_PRIMES {
                            return Err(self.err_here("at most 6 primes"));
                        }
                    }
                    return Ok(Expr::jet(idx, primes as u32));
                }
                if let Some(value) = self.params.get(name) {
                    if self.peek() == Some(&Tok::Apostrophe) {
                        return Err(self.err_here("no prime on a parameter"));
                    }
                    return Ok(Expr::rational(value.clone()));
                }
                Err(Error::UnknownIdentifier(name.to_string()))
            }
        }
    }
}
