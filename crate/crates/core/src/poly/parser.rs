//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' integer)?
//! primary := number | variable | '(' expr ')'
//! ```
//!
//! Division is only allowed by a nonzero constant. Juxtaposition such as
//! `2x` is rejected rather than read as a product.

use num_traits::Zero;
use thiserror::Error;

use super::SparsePoly;
use crate::scalar::{parse_decimal, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnknownVariable(String),
    NegativeExponent,
    FractionalExponent,
    ExponentTooLarge,
    ImplicitMultiplication,
    NonConstantDivisor,
    DivisionByZero,
    BadNumber(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at position {pos}: {}", describe(.kind))]
pub struct ParseError {
    /// 0-based character offset into the input.
    pub pos: usize,
    pub kind: ParseErrorKind,
}

fn describe(k: &ParseErrorKind) -> String {
    use ParseErrorKind::*;
    match k {
        UnexpectedChar(c) => format!("unexpected character '{c}'"),
        UnexpectedToken(t) => format!("unexpected '{t}'"),
        UnexpectedEnd => "unexpected end of input".into(),
        UnknownVariable(v) => format!("unknown variable '{v}'"),
        NegativeExponent => "negative exponents are not allowed".into(),
        FractionalExponent => "exponents must be non-negative integers".into(),
        ExponentTooLarge => "exponent too large".into(),
        ImplicitMultiplication => "implicit multiplication is not allowed, use '*'".into(),
        NonConstantDivisor => "can only divide by a constant".into(),
        DivisionByZero => "division by zero".into(),
        BadNumber(s) => format!("malformed number '{s}'"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Num(s) | Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part, only if followed by a digit (optionally signed)
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                out.push((start, Tok::Num(chars[start..i].iter().collect())));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => return Err(ParseError { pos: i, kind: ParseErrorKind::UnexpectedChar(other) }),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    vars: &'a [&'a str],
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError { pos: self.offset(), kind })
    }

    fn unexpected<T>(&self) -> PResult<T> {
        match self.peek() {
            Some(t) => self.err(ParseErrorKind::UnexpectedToken(t.text())),
            None => self.err(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> PResult<SparsePoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> PResult<SparsePoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.offset();
                    let d = self.unary()?;
                    if d.degree().unwrap_or(0) > 0 {
                        return Err(ParseError { pos: at, kind: ParseErrorKind::NonConstantDivisor });
                    }
                    let c = d.constant_term();
                    if c.is_zero() {
                        return Err(ParseError { pos: at, kind: ParseErrorKind::DivisionByZero });
                    }
                    acc = acc.scale(&(Rational::from_integer(1.into()) / c));
                }
                Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    return self.err(ParseErrorKind::ImplicitMultiplication);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> PResult<SparsePoly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult<SparsePoly> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let n = match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                if s.contains(['.', 'e', 'E']) {
                    return self.err(ParseErrorKind::FractionalExponent);
                }
                let n = s.parse::<u64>().ok().and_then(|v| u32::try_from(v).ok()).filter(|&v| v <= 1000);
                match n {
                    Some(n) => n,
                    None => return self.err(ParseErrorKind::ExponentTooLarge),
                }
            }
            Some(Tok::Minus) => return self.err(ParseErrorKind::NegativeExponent),
            Some(Tok::LParen) | Some(Tok::Ident(_)) => return self.err(ParseErrorKind::FractionalExponent),
            _ => return self.unexpected(),
        };
        self.pos += 1;
        // x^1/2 reads as (x^1)/2; chained powers are rejected
        if self.peek() == Some(&Tok::Caret) {
            return self.unexpected();
        }
        Ok(base.pow(n))
    }

    fn primary(&mut self) -> PResult<SparsePoly> {
        let dim = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                let q = match parse_decimal(&s) {
                    Some(q) => q,
                    None => return self.err(ParseErrorKind::BadNumber(s)),
                };
                self.pos += 1;
                Ok(SparsePoly::constant(dim, q))
            }
            Some(Tok::Ident(name)) => match self.vars.iter().position(|v| *v == name) {
                Some(i) => {
                    self.pos += 1;
                    Ok(SparsePoly::var(dim, i))
                }
                None => self.err(ParseErrorKind::UnknownVariable(name)),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.unexpected();
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => self.unexpected(),
        }
    }
}

/// Parse `text` as a polynomial in the ordered variables `vars`.
///
/// ```
/// use gibbsx::poly::parse_poly;
/// let f = parse_poly("(x - y^2)^2 + x^6", &["x", "y"]).unwrap();
/// assert_eq!(f.to_string(), "x^2 - 2*x*y^2 + y^4 + x^6");
/// ```
pub fn parse_poly(text: &str, vars: &[&str]) -> Result<SparsePoly, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count(), vars };
    if p.peek().is_none() {
        return p.err(ParseErrorKind::UnexpectedEnd);
    }
    let f = p.expr()?;
    if p.peek().is_some() {
        return match p.peek() {
            Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => p.err(ParseErrorKind::ImplicitMultiplication),
            _ => p.unexpected(),
        };
    }
    Ok(f.with_dim(vars.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    const XY: &[&str] = &["x", "y"];

    #[test]
    fn three_term_fixture() {
        let f = parse_poly("x^2 + y^4 + x*y^2", XY).unwrap();
        assert_eq!(f.num_terms(), 3);
        assert!(f.terms().all(|(_, c)| *c == int(1)));
    }

    #[test]
    fn zero_has_no_terms() {
        let f = parse_poly("0", XY).unwrap();
        assert_eq!(f.num_terms(), 0);
        assert_eq!(f.dim(), 2);
    }

    #[test]
    fn rationals_and_decimals() {
        let f = parse_poly("x/2 + 0.25*y - 3e-1", XY).unwrap();
        assert_eq!(f.coeff(&[1, 0]), rat(1, 2));
        assert_eq!(f.coeff(&[0, 1]), rat(1, 4));
        assert_eq!(f.coeff(&[0, 0]), rat(-3, 10));
        assert_eq!(parse_poly("-x^2", XY).unwrap().coeff(&[2, 0]), int(-1));
        assert_eq!(parse_poly("2/3/4*x", XY).unwrap().coeff(&[1, 0]), rat(1, 6));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_poly("2x", XY).unwrap_err();
        assert_eq!(e, ParseError { pos: 1, kind: ParseErrorKind::ImplicitMultiplication });
        let e = parse_poly("x^-1", XY).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NegativeExponent);
        assert_eq!(e.pos, 2);
        assert_eq!(parse_poly("x^1.5", XY).unwrap_err().kind, ParseErrorKind::FractionalExponent);
        assert_eq!(parse_poly("x + z", XY).unwrap_err(), ParseError { pos: 4, kind: ParseErrorKind::UnknownVariable("z".into()) });
        assert_eq!(parse_poly("x/y", XY).unwrap_err().kind, ParseErrorKind::NonConstantDivisor);
        assert_eq!(parse_poly("x/(1-1)", XY).unwrap_err().kind, ParseErrorKind::DivisionByZero);
        assert_eq!(parse_poly("(x + y", XY).unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse_poly("x $ y", XY).unwrap_err().kind, ParseErrorKind::UnexpectedChar('$'));
        assert_eq!(parse_poly("", XY).unwrap_err().kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(parse_poly("x (y)", XY).unwrap_err().kind, ParseErrorKind::ImplicitMultiplication);
        assert_eq!(parse_poly("x^2^3", XY).unwrap_err().kind, ParseErrorKind::UnexpectedToken("^".into()));
    }

    #[test]
    fn round_trip_through_printer() {
        for s in ["x^2 - 2*x*y^2 + y^4 + x^6", "-1/3 + x*y", "x^4 + y^10 + x^2*y^4"] {
            let f = parse_poly(s, XY).unwrap();
            let g = parse_poly(&f.to_string_with(XY), XY).unwrap();
            assert_eq!(f, g);
        }
    }
}
