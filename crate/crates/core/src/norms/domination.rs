//! Falsifier for domination estimates `‖Σ a_n z_n‖ ≤ C·‖Σ a_n e_{k_n}‖`.
//!
//! For normalized blocks `z_n/‖z_n‖` the coefficients are parametrized as
//! `a_n = b_n·‖z_n‖`. The upper vector
//! `Σ b_n z_n` stays rational; the lower coefficients may be irrational
//! and are enclosed. Both norms are lattice norms, so the lower
//! norm lies between the norms of the low and high endpoint vectors.
//! Only `a ≥ 0` is sampled: both sides only see `|a_n|`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{BlockSequence, NormContext, NormSpec, NormValue, RationalVector};
use crate::error::{Error, Result};
use crate::interval::{root_enclosure, Interval};
use crate::par;
use crate::rational::Rational;
use crate::report::{interval_json, rational_json, rationals_json, CheckReport};

/// Upper side `(z_n)` in `upper_norm`; lower side `e_{k_n}` in `lower_norm`.
/// `lower_scale[n]` multiplies the n-th lower coefficient: for normalized
/// blocks and `a_n = b_n·‖z_n‖` the upper vector is `Σ b_n z_n` and the
/// lower one is `Σ b_n·‖z_n‖·e_{k_n}`.
#[derive(Debug, Clone)]
pub struct DominationProblem {
    pub upper: BlockSequence,
    pub upper_norm: NormSpec,
    pub lower_positions: Vec<u64>,
    pub lower_norm: NormSpec,
    pub lower_scale: Vec<Interval>,
}

impl DominationProblem {
    /// Unnormalized: `a_n = b_n`.
    pub fn new(upper: BlockSequence, upper_norm: NormSpec, lower_positions: Vec<u64>, lower_norm: NormSpec) -> Result<Self> {
        let n = upper.len();
        DominationProblem::with_scale(
            upper,
            upper_norm,
            lower_positions,
            lower_norm,
            vec![Interval::point(Rational::one()); n],
        )
    }

    pub fn with_scale(
        upper: BlockSequence,
        upper_norm: NormSpec,
        lower_positions: Vec<u64>,
        lower_norm: NormSpec,
        lower_scale: Vec<Interval>,
    ) -> Result<Self> {
        if upper.len() != lower_positions.len() || upper.len() != lower_scale.len() {
            return Err(Error::invalid("upper and lower sequences differ in length"));
        }
        if lower_positions.windows(2).any(|w| w[0] >= w[1]) || lower_positions.first() == Some(&0) {
            return Err(Error::invalid("lower positions must be positive and increasing"));
        }
        Ok(DominationProblem { upper, upper_norm, lower_positions, lower_norm, lower_scale })
    }

    /// Normalizes the upper blocks in `upper_norm`: the lower scale of block
    /// `n` becomes an enclosure of `‖z_n‖`.
    pub fn normalized(
        upper: BlockSequence,
        upper_norm: NormSpec,
        lower_positions: Vec<u64>,
        lower_norm: NormSpec,
        ctx: &NormContext,
    ) -> Result<Self> {
        let mut scale = Vec::with_capacity(upper.len());
        for z in upper.blocks() {
            let nz = upper_norm.evaluate(z, ctx)?.value;
            scale.push(nz.enclosure(&ctx.tolerance));
        }
        DominationProblem::with_scale(upper, upper_norm, lower_positions, lower_norm, scale)
    }

    pub fn len(&self) -> usize {
        self.lower_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower_positions.is_empty()
    }
}

/// Which coefficient families to try.
#[derive(Debug, Clone)]
pub struct SampleFamilies {
    pub seed: u64,
    /// Number of pseudorandom rational vectors.
    pub random: usize,
    /// All `{0,1}` patterns are tried when the length is at most this.
    pub pattern_len: usize,
}

impl Default for SampleFamilies {
    fn default() -> Self {
        SampleFamilies { seed: 42, random: 64, pattern_len: 12 }
    }
}

/// Spikes, the flat vector, `{0,1}` patterns, then seeded random rationals
/// with numerators in `0..=12` and denominators in `1..=6`. No sample is zero.
pub fn coefficient_samples(len: usize, families: &SampleFamilies) -> Vec<Vec<Rational>> {
    let one = Rational::one();
    let zero = Rational::zero();
    let mut out = Vec::new();
    for k in 0..len {
        out.push((0..len).map(|j| if j == k { one.clone() } else { zero.clone() }).collect());
    }
    out.push(vec![one.clone(); len]);
    if len <= families.pattern_len && len < 64 {
        for mask in 1u64..(1u64 << len) {
            if mask.count_ones() <= 1 || mask.count_ones() as usize == len {
                continue;
            }
            out.push((0..len).map(|j| if mask >> j & 1 == 1 { one.clone() } else { zero.clone() }).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(families.seed);
    let mut made = 0;
    while made < families.random && len > 0 {
        let v: Vec<Rational> = (0..len)
            .map(|_| {
                let num: i64 = rng.gen_range(0..=12);
                let den: i64 = rng.gen_range(1..=6);
                Rational::new(BigInt::from(num), BigInt::from(den))
            })
            .collect();
        if v.iter().any(|q| !q.is_zero()) {
            out.push(v);
            made += 1;
        }
    }
    out
}

/// Upper/lower values for one coefficient vector.
#[derive(Debug, Clone)]
struct Sample {
    upper: NormValue,
    lower: Interval,
    /// `lower` exactly, when the scales are exact.
    lower_exact: Option<NormValue>,
}

#[derive(Debug, Clone)]
pub struct DominationOutcome {
    pub report: CheckReport,
    pub samples: usize,
    pub inconclusive: usize,
    pub falsified: bool,
    /// Enclosure of the largest observed `upper/lower`.
    pub max_ratio: Interval,
    pub max_ratio_coeffs: Vec<Rational>,
}

fn evaluate(problem: &DominationProblem, b: &[Rational], ctx: &NormContext) -> Result<Sample> {
    let upper = problem.upper_norm.evaluate(&problem.upper.combine(b), ctx)?.value;
    let side = |pick: fn(&Interval) -> &Rational| {
        RationalVector::from_pairs(
            problem
                .lower_positions
                .iter()
                .zip(b)
                .zip(&problem.lower_scale)
                .map(|((&k, bn), s)| (k, bn * pick(s))),
        )
    };
    let lo_vec = side(|s| &s.lo)?;
    let lo_val = problem.lower_norm.evaluate(&lo_vec, ctx)?.value;
    if problem.lower_scale.iter().all(Interval::is_point) {
        let lower = lo_val.enclosure(&ctx.tolerance);
        return Ok(Sample { upper, lower, lower_exact: Some(lo_val) });
    }
    let hi_vec = side(|s| &s.hi)?;
    let hi_val = problem.lower_norm.evaluate(&hi_vec, ctx)?.value;
    let lower = Interval::new(
        lo_val.enclosure(&ctx.tolerance).lo,
        hi_val.enclosure(&ctx.tolerance).hi,
    );
    Ok(Sample { upper, lower, lower_exact: None })
}

/// Enclosure of `upper/lower`; exact when both sides have rational p-th powers.
fn ratio(s: &Sample, tol: &Rational) -> Interval {
    if let Some(l) = &s.lower_exact {
        let p = match (&s.upper, l) {
            (NormValue::PthPower { p, .. }, _) | (_, NormValue::PthPower { p, .. }) => *p,
            _ => 1,
        };
        if let (Some(a), Some(b)) = (s.upper.pth_power(p), l.pth_power(p)) {
            if !b.is_zero() {
                return root_enclosure(&(a / b), p, tol);
            }
        }
    }
    let u = s.upper.enclosure(tol);
    if s.lower.lo.is_zero() {
        return Interval::new(Rational::zero(), Rational::from_integer(BigInt::from(i64::MAX)));
    }
    Interval::new(&u.lo / &s.lower.hi, &u.hi / &s.lower.lo)
}

/// Compares `upper` against `c·lower`.
fn verdict(s: &Sample, c: &Rational, tol: &Rational) -> Option<Ordering> {
    if let Some(l) = &s.lower_exact {
        return super::compare_scaled(&s.upper, c, l, tol);
    }
    let u = s.upper.enclosure(tol);
    let l = s.lower.scale(c);
    if u.hi <= l.lo {
        Some(if u.hi < l.lo || !(u.is_point() && l.is_point()) { Ordering::Less } else { Ordering::Equal })
    } else if u.lo > l.hi {
        Some(Ordering::Greater)
    } else {
        None
    }
}

/// Searches the sample families for `a ≥ 0` with `‖Σ a_n z_n‖ > C·‖Σ a_n e_{k_n}‖`.
/// A clean run is evidence, not a proof of domination.
pub fn check_domination(
    problem: &DominationProblem,
    c: &Rational,
    families: &SampleFamilies,
    ctx: &NormContext,
) -> Result<DominationOutcome> {
    let mut report = CheckReport::new("dominate");
    report
        .param("constant", rational_json(c))
        .param("length", problem.len())
        .param("upper_norm", problem.upper_norm.describe())
        .param("lower_norm", problem.lower_norm.describe())
        .param("seed", families.seed)
        .param("random_samples", families.random)
        .param("lower_positions", json!(problem.lower_positions));
    let samples = coefficient_samples(problem.len(), families);
    let evaluated = par::map(&samples, |b| evaluate(problem, b, ctx));
    let mut inconclusive = 0;
    let mut falsified = false;
    let mut witnesses = 0;
    let mut best: Option<(Interval, usize)> = None;
    for (k, e) in evaluated.into_iter().enumerate() {
        let s = e?;
        let r = ratio(&s, &ctx.tolerance);
        if best.as_ref().is_none_or(|(b, _)| r.lo > b.lo) {
            best = Some((r, k));
        }
        match verdict(&s, c, &ctx.tolerance) {
            Some(Ordering::Greater) => {
                falsified = true;
                if witnesses < 16 {
                    witnesses += 1;
                    report.fail("violation", sample_json(&samples[k], problem, &s));
                }
            }
            Some(_) => {}
            None => inconclusive += 1,
        }
    }
    let (max_ratio, at) = best.unwrap_or((Interval::zero(), 0));
    let max_ratio_coeffs = samples.get(at).cloned().unwrap_or_default();
    report
        .observe("samples", samples.len())
        .observe("inconclusive", inconclusive)
        .observe("max_ratio", interval_json(&max_ratio))
        .observe("max_ratio_coefficients", rationals_json(&max_ratio_coeffs))
        .observe("verdict", if falsified { "falsified" } else { "not falsified" })
        .note("falsifier over fixed seeded sample families; not falsified is not a proof of domination");
    if inconclusive > 0 {
        report.note("some samples could not be separated at the certified tolerance and are counted as inconclusive");
    }
    Ok(DominationOutcome {
        report: report.finish(),
        samples: samples.len(),
        inconclusive,
        falsified,
        max_ratio,
        max_ratio_coeffs,
    })
}

fn sample_json(b: &[Rational], problem: &DominationProblem, s: &Sample) -> Value {
    let a: Vec<Value> = b
        .iter()
        .zip(&problem.lower_scale)
        .map(|(bn, sc)| {
            if sc.is_point() {
                rational_json(&(bn * &sc.lo))
            } else {
                interval_json(&sc.scale(bn))
            }
        })
        .collect();
    json!({
        "coefficients": a,
        "upper": s.upper.to_json(),
        "lower": interval_json(&s.lower),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::Ordinal;
    use crate::rational::{int, Exponent};

    fn x12() -> NormSpec {
        NormSpec::Baernstein(Ordinal::nat(1), Exponent::integer(2))
    }

    fn units(pos: &[u64]) -> BlockSequence {
        BlockSequence::new(pos.iter().map(|&i| RationalVector::unit(i)).collect()).unwrap()
    }

    #[test]
    fn sequence_against_itself() {
        let ctx = NormContext::default();
        let pos = vec![2, 3, 5, 8];
        let p = DominationProblem::new(units(&pos), x12(), pos, x12()).unwrap();
        let out = check_domination(&p, &int(1), &SampleFamilies::default(), &ctx).unwrap();
        assert!(!out.falsified);
        assert_eq!(out.inconclusive, 0);
        assert_eq!(out.max_ratio, Interval::point(int(1)));
        assert!(out.report.passed());
    }

    #[test]
    fn spreading_to_the_right_never_decreases() {
        let ctx = NormContext::default();
        let p = DominationProblem::new(units(&[1, 2, 3, 4]), x12(), vec![2, 4, 7, 9], x12()).unwrap();
        let out = check_domination(&p, &int(1), &SampleFamilies::default(), &ctx).unwrap();
        assert!(!out.falsified);
        // The reverse direction fails: e_1+e_2+e_3 is much smaller on the left.
        let q = DominationProblem::new(units(&[2, 4, 7, 9]), x12(), vec![1, 2, 3, 4], x12()).unwrap();
        let out = check_domination(&q, &int(1), &SampleFamilies::default(), &ctx).unwrap();
        assert!(out.falsified);
        assert!(!out.report.passed());
    }

    #[test]
    fn normalized_blocks_upper_estimate() {
        let ctx = NormContext::default();
        let blocks = BlockSequence::new(vec![
            RationalVector::indicator(&[2, 3]).unwrap(),
            RationalVector::indicator(&[4, 5, 6]).unwrap(),
            RationalVector::indicator(&[8]).unwrap(),
        ])
        .unwrap();
        let m = blocks.minima();
        let p = DominationProblem::normalized(blocks, x12(), m, x12(), &ctx).unwrap();
        assert!(!p.lower_scale[1].is_point() || p.lower_scale[1].lo != int(0));
        let out = check_domination(&p, &int(4), &SampleFamilies::default(), &ctx).unwrap();
        assert!(!out.falsified);
        assert!(out.max_ratio.hi <= int(4));
    }

    #[test]
    fn samples_are_seeded_and_nonzero() {
        let f = SampleFamilies { seed: 7, random: 20, pattern_len: 12 };
        let a = coefficient_samples(5, &f);
        assert_eq!(a, coefficient_samples(5, &f));
        assert_eq!(a.len(), 5 + 1 + (32 - 1 - 5 - 1) + 20);
        assert!(a.iter().all(|v| v.iter().any(|q| !q.is_zero())));
    }
}
