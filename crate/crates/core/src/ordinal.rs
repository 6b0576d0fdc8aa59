//! Countable ordinals in Cantor normal form, with fundamental sequences.
//!
//! An ordinal is a list of terms `ω^e·c` with strictly decreasing exponents
//! and positive coefficients; the empty list is `0`. Exponents are ordinals
//! themselves, so the representation is not bounded by `ω^ω`, but the
//! default working ceiling is `ω^ω` (see [`Ordinal::omega_pow_omega`]).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub exponent: Ordinal,
    pub coeff: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            return Ordinal::zero();
        }
        Ordinal {
            terms: vec![Term {
                exponent: Ordinal::zero(),
                coeff: n,
            }],
        }
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::nat(1))
    }

    /// `ω^e`.
    pub fn omega_pow(exponent: Ordinal) -> Self {
        Ordinal {
            terms: vec![Term { exponent, coeff: 1 }],
        }
    }

    pub fn omega_pow_omega() -> Self {
        Ordinal::omega_pow(Ordinal::omega())
    }

    /// Builds from `(exponent, coefficient)` pairs, rejecting non-canonical input.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self> {
        let o = Ordinal {
            terms: terms
                .into_iter()
                .map(|(exponent, coeff)| Term { exponent, coeff })
                .collect(),
        };
        o.check_canonical()?;
        Ok(o)
    }

    /// Finite `(exponent, coefficient)` list, i.e. `ω^a·c + ω^b·d + …` with natural exponents.
    pub fn from_nat_terms(terms: &[(u64, u64)]) -> Result<Self> {
        Ordinal::from_terms(
            terms
                .iter()
                .map(|&(e, c)| (Ordinal::nat(e), c))
                .collect(),
        )
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => Some(t.coeff),
            _ => None,
        }
    }

    pub fn check_canonical(&self) -> Result<()> {
        for (k, t) in self.terms.iter().enumerate() {
            if t.coeff == 0 {
                return Err(Error::NonCanonical(format!("zero coefficient in {self}")));
            }
            t.exponent.check_canonical()?;
            if k > 0 && self.terms[k - 1].exponent.cmp(&t.exponent) != Ordering::Greater {
                return Err(Error::NonCanonical(format!(
                    "exponents must strictly decrease in {self}"
                )));
            }
        }
        Ok(())
    }

    /// True when every exponent is a natural number, i.e. `self < ω^ω`.
    pub fn below_omega_pow_omega(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.as_nat().is_some())
    }

    pub fn kind(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some(t) if t.exponent.is_zero() => {
                let mut pred = self.clone();
                let last = pred.terms.last_mut().unwrap();
                if last.coeff == 1 {
                    pred.terms.pop();
                } else {
                    last.coeff -= 1;
                }
                Kind::Successor(pred)
            }
            Some(_) => Kind::Limit,
        }
    }

    /// `self + 1`.
    pub fn successor(&self) -> Ordinal {
        let mut out = self.clone();
        match out.terms.last_mut() {
            Some(t) if t.exponent.is_zero() => t.coeff += 1,
            _ => out.terms.push(Term {
                exponent: Ordinal::zero(),
                coeff: 1,
            }),
        }
        out
    }

    /// `λ[n]` for a limit `λ`.
    ///
    /// Writing `λ = γ + ω^β` with the last unit term split off: if
    /// `β = δ + 1` then `λ[n] = γ + ω^δ·n`, and if `β` is a limit then
    /// `λ[n] = γ + ω^(β[n])`.
    pub fn fundamental(&self, n: u64) -> Result<Ordinal> {
        if n == 0 {
            return Err(Error::invalid("fundamental sequence index must be >= 1"));
        }
        if self.kind() != Kind::Limit {
            return Err(Error::NotLimit(self.to_string()));
        }
        let mut gamma = self.clone();
        let last = gamma.terms.last_mut().unwrap();
        let beta = last.exponent.clone();
        if last.coeff == 1 {
            gamma.terms.pop();
        } else {
            last.coeff -= 1;
        }
        match beta.kind() {
            Kind::Successor(delta) => {
                gamma.terms.push(Term {
                    exponent: delta,
                    coeff: n,
                });
            }
            Kind::Limit => {
                gamma.terms.push(Term {
                    exponent: beta.fundamental(n)?,
                    coeff: 1,
                });
            }
            Kind::Zero => unreachable!("limit ordinals have a nonzero last exponent"),
        }
        Ok(gamma)
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            match a.exponent.cmp(&b.exponent) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match a.coeff.cmp(&b.coeff) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares two ordinals after checking both are canonical.
pub fn compare(a: &Ordinal, b: &Ordinal) -> Result<Ordering> {
    a.check_canonical()?;
    b.check_canonical()?;
    Ok(a.cmp(b))
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            f.write_str("w")?;
            match t.exponent.as_nat() {
                Some(1) => {}
                Some(e) => write!(f, "^{e}")?,
                None => write!(f, "^({})", t.exponent)?,
            }
            if t.coeff != 1 {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser {
            chars: &compact,
            pos: 0,
        };
        let o = p.sum()?;
        if p.pos != compact.len() {
            return Err(Error::Parse(format!(
                "unexpected `{}` in ordinal `{s}`",
                compact[p.pos]
            )));
        }
        o.check_canonical()?;
        Ok(o)
    }
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse(format!("expected a number at offset {start}")));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse()
            .map_err(|_| Error::Parse(format!("number `{text}` out of range")))
    }

    fn sum(&mut self) -> Result<Ordinal> {
        let mut terms = vec![self.term()?];
        while self.eat('+') {
            terms.push(self.term()?);
        }
        if terms.len() == 1 && terms[0].coeff == 0 && terms[0].exponent.is_zero() {
            return Ok(Ordinal::zero());
        }
        Ok(Ordinal { terms })
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek() {
            Some('w') | Some('ω') => {
                self.pos += 1;
                let exponent = if self.eat('^') {
                    if self.eat('(') {
                        let e = self.sum()?;
                        if !self.eat(')') {
                            return Err(Error::Parse("missing `)`".into()));
                        }
                        e
                    } else if self.eat('w') || self.eat('ω') {
                        Ordinal::omega()
                    } else {
                        Ordinal::nat(self.number()?)
                    }
                } else {
                    Ordinal::nat(1)
                };
                if exponent.is_zero() {
                    return Err(Error::NonCanonical("`w^0` must be written as a number".into()));
                }
                let coeff = if self.eat('*') { self.number()? } else { 1 };
                Ok(Term { exponent, coeff })
            }
            Some(c) if c.is_ascii_digit() => Ok(Term {
                exponent: Ordinal::zero(),
                coeff: self.number()?,
            }),
            other => Err(Error::Parse(format!(
                "expected `w` or a number, found {other:?}"
            ))),
        }
    }
}
