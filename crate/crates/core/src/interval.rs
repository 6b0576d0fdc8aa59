//! Closed rational intervals and certified enclosures of rational powers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::rational::{format_rational, pow, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(q: Rational) -> Self {
        Interval {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    /// Product of two intervals of nonnegative numbers.
    pub fn mul_nonneg(&self, other: &Interval) -> Interval {
        Interval::new(&self.lo * &other.lo, &self.hi * &other.hi)
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        if c.is_negative() {
            Interval::new(&self.hi * c, &self.lo * c)
        } else {
            Interval::new(&self.lo * c, &self.hi * c)
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
        )
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn to_json(&self) -> Value {
        json!({ "lo": format_rational(&self.lo), "hi": format_rational(&self.hi) })
    }
}

/// Encloses the positive real `root`-th root of `y >= 0` in an interval of
/// width at most `width` (dyadic bisection, exact comparisons).
pub fn root_enclosure(y: &Rational, root: u32, width: &Rational) -> Interval {
    assert!(root >= 1);
    assert!(!y.is_negative());
    if root == 1 || y.is_zero() || y.is_one() {
        return Interval::point(y.clone());
    }
    let mut lo = Rational::zero();
    let mut hi = y.clone().max(Rational::one());
    // Seed from a float estimate when the magnitude allows it.
    if let Some(f) = y.to_f64().filter(|f| f.is_finite() && *f > 0.0) {
        let est = f.powf(1.0 / root as f64);
        if let (Some(a), Some(b)) = (
            Rational::from_float(est * (1.0 - 1e-9)),
            Rational::from_float(est * (1.0 + 1e-9)),
        ) {
            if pow(&a, root) <= *y && pow(&b, root) >= *y {
                lo = a;
                hi = b;
            }
        }
    }
    let two = Rational::from_integer(BigInt::from(2));
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        let mid = simplify_between(&lo, &mid, &hi);
        if pow(&mid, root) <= *y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Interval::new(lo, hi)
}

/// Picks a rational with a small denominator near `mid`, strictly inside
/// `(lo, hi)`, so repeated bisection does not blow up denominators.
fn simplify_between(lo: &Rational, mid: &Rational, hi: &Rational) -> Rational {
    let quarter = (hi - lo) / Rational::from_integer(BigInt::from(4));
    let mut den = BigInt::one();
    loop {
        let scaled = (mid * Rational::from_integer(den.clone())).round();
        let cand = scaled / Rational::from_integer(den.clone());
        if (&cand - mid).abs() <= quarter {
            return cand;
        }
        den <<= 8;
    }
}

/// Encloses `x^(a/b)` for `x >= 0`.
pub fn rational_power_enclosure(x: &Rational, exponent: &Rational, width: &Rational) -> Interval {
    assert!(!exponent.is_negative());
    let a = exponent.numer().to_u32().expect("exponent numerator fits u32");
    let b = exponent.denom().to_u32().expect("exponent denominator fits u32");
    let g = a.gcd(&b);
    let (a, b) = (a / g, b / g);
    let y = pow(x, a);
    root_enclosure(&y, b, width)
}

/// Raises every endpoint of a nonnegative interval to `a/b`, widening the
/// enclosure outward.
pub fn interval_power(iv: &Interval, exponent: &Rational, width: &Rational) -> Interval {
    let lo = rational_power_enclosure(&iv.lo, exponent, width).lo;
    let hi = rational_power_enclosure(&iv.hi, exponent, width).hi;
    Interval::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, parse_rational, ratio};

    #[test]
    fn sqrt_two_enclosure() {
        let w = parse_rational("1e-12").unwrap();
        let iv = root_enclosure(&int(2), 2, &w);
        assert!(iv.width() <= w);
        assert!(pow(&iv.lo, 2) <= int(2));
        assert!(pow(&iv.hi, 2) >= int(2));
    }

    #[test]
    fn perfect_powers_are_enclosed() {
        let w = ratio(1, 1000);
        let iv = root_enclosure(&int(27), 3, &w);
        assert!(iv.contains(&int(3)));
        let iv = rational_power_enclosure(&int(4), &ratio(3, 2), &w);
        assert!(iv.contains(&int(8)));
    }

    #[test]
    fn small_and_large_inputs() {
        let w = parse_rational("1e-15").unwrap();
        let tiny = ratio(1, 1_000_000_007);
        let iv = root_enclosure(&tiny, 2, &w);
        assert!(pow(&iv.lo, 2) <= tiny && pow(&iv.hi, 2) >= tiny);
        let big = Rational::from_integer(num_traits::pow(BigInt::from(10), 400));
        let iv = root_enclosure(&big, 2, &int(1));
        assert!(iv.contains(&Rational::from_integer(num_traits::pow(BigInt::from(10), 200))));
    }
}
