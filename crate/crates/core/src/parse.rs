//! Polynomial text front end.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' natural)?
//! base     := variable | rational | '(' expr ')'
//! rational := integer ('/' positive-integer)?
//! variable := [a-zA-Z][a-zA-Z0-9_]*
//! ```
//!
//! A leading unary minus is also accepted at the start of an expression.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::field::{FieldError, FieldSpec, Scalar};
use crate::series::{Ctx, Monomial, SeriesContext, TruncatedSeries};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("division is not allowed in polynomial text (offset {0})")]
    DivisionInText(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Int(text[start..i].parse().expect("digits"))));
                continue;
            }
            _ if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(ParseError::SyntaxError { pos: i, msg: format!("unexpected character {c:?}") });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

/// Variables in order of first appearance.
pub fn infer_variables(text: &str) -> Result<Vec<String>, ParseError> {
    let mut vars: Vec<String> = Vec::new();
    for (_, t) in tokenize(text)? {
        if let Tok::Ident(name) = t {
            if !vars.contains(&name) {
                vars.push(name);
            }
        }
    }
    Ok(vars)
}

type Poly = std::collections::HashMap<Monomial, Scalar>;

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    ctx: &'a Ctx,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.len)
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError { pos: self.offset(), msg: msg.to_string() })
    }

    fn field(&self) -> FieldSpec {
        self.ctx.field()
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let negate = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = self.scale(acc, &self.field().from_i64(-1));
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = self.add(acc, t);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    let t = self.scale(t, &self.field().from_i64(-1));
                    acc = self.add(acc, t);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let f = self.factor()?;
            acc = self.mul(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.toks.get(self.pos).cloned() {
                Some((_, Tok::Int(n))) => {
                    self.pos += 1;
                    let e: u32 = match n.try_into() {
                        Ok(e) => e,
                        Err(_) => return self.err("exponent too large"),
                    };
                    let mut acc = self.constant(Scalar::one());
                    for _ in 0..e {
                        acc = self.mul(&acc, &base);
                    }
                    Ok(acc)
                }
                _ => self.err("expected a natural-number exponent after '^'"),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Poly, ParseError> {
        match self.toks.get(self.pos).cloned() {
            Some((_, Tok::Ident(name))) => {
                self.pos += 1;
                let i = self.ctx.index_of(&name).ok_or(ParseError::UnknownVariable(name))?;
                let mut p = Poly::new();
                p.insert(Monomial::var(self.ctx.nvars(), i), Scalar::one());
                Ok(p)
            }
            Some((_, Tok::Int(n))) => {
                self.pos += 1;
                let mut value = Scalar::from_integer(n);
                if self.peek() == Some(&Tok::Slash) {
                    let slash_at = self.offset();
                    self.pos += 1;
                    match self.toks.get(self.pos).cloned() {
                        Some((_, Tok::Int(d))) if !d.is_zero() => {
                            self.pos += 1;
                            value = Scalar::new(value.numer().clone(), d);
                        }
                        Some((_, Tok::Int(_))) => return self.err("zero denominator"),
                        Some(_) => return Err(ParseError::DivisionInText(slash_at)),
                        None => return self.err("expected a denominator"),
                    }
                }
                let v = self.field().reduce(&value)?;
                Ok(self.constant(v))
            }
            Some((_, Tok::LParen)) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.err("expected a variable, number or '('"),
            None => self.err("unexpected end of input"),
        }
    }

    fn constant(&self, c: Scalar) -> Poly {
        let mut p = Poly::new();
        if !c.is_zero() {
            p.insert(Monomial::one(self.ctx.nvars()), c);
        }
        p
    }

    fn add(&self, mut a: Poly, b: Poly) -> Poly {
        let field = self.field();
        for (m, c) in b {
            let e = a.entry(m).or_insert_with(Scalar::zero);
            *e = field.add(e, &c);
        }
        a.retain(|_, c| !c.is_zero());
        a
    }

    fn scale(&self, a: Poly, c: &Scalar) -> Poly {
        let field = self.field();
        a.into_iter().map(|(m, v)| (m, field.mul(&v, c))).filter(|(_, v)| !v.is_zero()).collect()
    }

    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let field = self.field();
        let mut out = Poly::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let e = out.entry(ma.mul(mb)).or_insert_with(Scalar::zero);
                *e = field.add(e, &field.mul(ca, cb));
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

/// Parses polynomial text into an exact series over the given context.
pub fn parse_in(text: &str, ctx: &Ctx, precision: u32) -> Result<TruncatedSeries, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, ctx, len: text.len() };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let poly = p.expr()?;
    if p.pos != p.toks.len() {
        if p.peek() == Some(&Tok::Slash) {
            return p.err("division is only allowed inside a rational literal");
        }
        return p.err("unexpected trailing input");
    }
    Ok(TruncatedSeries::from_terms(ctx, precision, poly, true))
}

pub fn parse_series(
    text: &str,
    variables: &[&str],
    field: FieldSpec,
    precision: u32,
) -> Result<TruncatedSeries, ParseError> {
    let ctx = SeriesContext::new(variables.iter().copied(), field);
    parse_in(text, &ctx, precision)
}
