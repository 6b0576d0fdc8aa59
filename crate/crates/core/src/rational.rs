//! Exact rationals, their text forms, and the ℓ_p exponent.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `a`, `-a/b`, `0.25` or `1e-12` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a rational: `{s}`"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => {
            let e: i32 = s[k + 1..].parse().map_err(|_| bad())?;
            (&s[..k], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}0").parse::<BigInt>().map_err(|_| bad())? / 10;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// `n` or `n/d`, always reduced.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigUint {
    let mut acc = BigInt::one();
    for v in values {
        acc = acc.lcm(v.denom());
    }
    acc.to_biguint().expect("denominators are positive")
}

/// Scales `|q|` by `denom` and returns the (integral) result.
pub fn scaled_abs(q: &Rational, denom: &BigUint) -> BigUint {
    let d = BigInt::from(denom.clone());
    let n = (q.abs() * Rational::from_integer(d)).to_integer();
    n.to_biguint().expect("absolute value")
}

/// Approximate decimal rendering for human-facing output only.
pub fn approx(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// The aggregation exponent `p` in `[1, ∞]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn new(p: Rational) -> Result<Self> {
        if p < Rational::one() {
            return Err(Error::invalid(format!(
                "exponent must be >= 1, got {}",
                format_rational(&p)
            )));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn integer(p: u32) -> Self {
        assert!(p >= 1);
        Exponent::Finite(Rational::from_integer(BigInt::from(p)))
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => Exponent::new(parse_rational(other)?),
        }
    }

    /// Integral exponents admit exact comparison through p-th powers.
    pub fn as_integer(&self) -> Option<u32> {
        match self {
            Exponent::Finite(p) if p.is_integer() => p.to_integer().to_u32(),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_integer() == Some(1)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => f.write_str(&format_rational(p)),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-2").unwrap(), int(-2));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(
            parse_rational("1e-12").unwrap(),
            Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), 12))
        );
        assert_eq!(parse_rational("2.5E1").unwrap(), int(25));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn exponent_rules() {
        assert_eq!(Exponent::parse("2").unwrap().as_integer(), Some(2));
        assert_eq!(Exponent::parse("3/2").unwrap().as_integer(), None);
        assert_eq!(Exponent::parse("inf").unwrap(), Exponent::Infinity);
        assert!(Exponent::parse("1/2").is_err());
        assert_eq!(Exponent::parse("3/2").unwrap().to_string(), "3/2");
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(format_rational(&ratio(4, 6)), "2/3");
        assert_eq!(format_rational(&int(7)), "7");
    }
}
