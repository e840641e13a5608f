//! Expression grammar for rational functions of `z` with Gaussian-rational
//! literals: `+ - * / ^`, parentheses, `i`, decimals and implicit products
//! such as `2z` or `3(z-1)`.

use rug::{Integer, Rational};

use super::{GaussianRational, Poly, RatFunc};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column in the expression.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Z,
    I,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let col = k + 1;
        let tok = match c {
            ' ' | '\t' | '\n' | '\r' => {
                k += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' | '−' => Tok::Minus,
            '*' | '·' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            'z' => Tok::Z,
            'i' => Tok::I,
            d if d.is_ascii_digit() || d == '.' => {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                    k += 1;
                }
                let text: String = chars[start..k].iter().collect();
                out.push((Tok::Num(parse_decimal(&text, col)?), col));
                continue;
            }
            other => {
                return Err(ExprError { column: col, message: format!("unexpected character '{other}'") })
            }
        };
        out.push((tok, col));
        k += 1;
    }
    Ok(out)
}

fn parse_decimal(text: &str, col: usize) -> Result<Rational, ExprError> {
    let bad = || ExprError { column: col, message: format!("malformed number '{text}'") };
    let mut parts = text.split('.');
    let int = parts.next().ok_or_else(bad)?;
    let frac = parts.next().unwrap_or("");
    if parts.next().is_some() || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n = Integer::from_str_radix(&digits, 10).map_err(|_| bad())?;
    let d = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
    Ok(Rational::from((n, d)))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col)
    }

    fn err<T>(&self, message: &str) -> Result<T, ExprError> {
        Err(ExprError { column: self.col(), message: message.into() })
    }

    fn expr(&mut self) -> Result<RatFunc, ExprError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let col = self.col();
                    let d = self.unary()?;
                    acc = acc
                        .checked_div(&d)
                        .map_err(|_| ExprError { column: col, message: "division by zero".into() })?;
                }
                Some(Tok::Z) | Some(Tok::I) | Some(Tok::LParen) | Some(Tok::Num(_)) => {
                    acc = &acc * &self.power()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc, ExprError> {
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

    fn power(&mut self) -> Result<RatFunc, ExprError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let col = self.col();
        let e = match self.peek() {
            Some(Tok::Num(r)) if *r.denom() == 1 => r.numer().to_i32(),
            _ => None,
        };
        let Some(e) = e else {
            return self.err("exponent must be an integer literal");
        };
        self.pos += 1;
        let e = if neg { -e } else { e };
        base.pow(e).map_err(|_| ExprError { column: col, message: "negative power of zero".into() })
    }

    fn primary(&mut self) -> Result<RatFunc, ExprError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(r) => Ok(RatFunc::constant(GaussianRational::from_rational(r))),
            Tok::Z => Ok(RatFunc::z()),
            Tok::I => Ok(RatFunc::constant(GaussianRational::i())),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => {
                self.pos -= 1;
                self.err("expected a number, 'z', 'i' or '('")
            }
        }
    }
}

/// Parses an expression in `z` into an exact rational function.
pub fn parse_ratfunc(src: &str) -> Result<RatFunc, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end_col: src.chars().count() + 1 };
    let r = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(r)
}

/// Parses a coefficient list (ascending powers of `z`) of literal expressions.
pub fn parse_coeff_list(items: &[String]) -> Result<Poly, ExprError> {
    let mut coeffs = Vec::with_capacity(items.len());
    for item in items {
        let r = parse_ratfunc(item)?;
        match r.as_constant() {
            Some(c) => coeffs.push(c),
            None => return Err(ExprError { column: 1, message: format!("'{item}' is not a constant") }),
        }
    }
    Ok(Poly::new(coeffs))
}
