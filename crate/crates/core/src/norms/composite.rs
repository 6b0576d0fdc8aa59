//! The interval-blocking norm
//! `‖x‖ = sup_{k_0<k_1<…} ‖Σ_n ‖x|_{[k_{n-1},k_n)}‖_inner v_{k_{n-1}}‖_outer`.
//!
//! Empty pieces contribute nothing, so only partitions of the support into
//! consecutive runs matter. The outer norm is right dominant, so the best
//! representative of a run is its least support position.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{
    check_support, schreier_norm, NormContext, NormResult, NormSpec, NormValue,
    RationalVector,
};
use crate::error::{Error, Result};
use crate::interval::{interval_power, rational_power_enclosure, Interval};
use crate::ordinal::Ordinal;
use crate::par;
use crate::rational::{Exponent, Rational};

/// The outer norm applied to the sequence of piece values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outer {
    Lp(Exponent),
    Schreier(Ordinal),
}

/// `table[i][k]`: inner norm of the run of support points `i..=i+k`.
fn piece_table(inner: &NormSpec, x: &RationalVector, ctx: &NormContext) -> Result<Vec<Vec<NormValue>>> {
    let pos = x.support();
    let n = pos.len();
    let runs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values = par::map(&runs, |&(i, j)| {
        inner
            .evaluate(&x.restrict_range(pos[i], pos[j]), ctx)
            .map(|r| r.value)
    });
    let mut table: Vec<Vec<NormValue>> = (0..n).map(|i| Vec::with_capacity(n - i)).collect();
    for ((i, _), v) in runs.into_iter().zip(values) {
        table[i].push(v?);
    }
    Ok(table)
}

fn runs_to_positions(pos: &[u64], runs: &[(usize, usize)]) -> Vec<Vec<u64>> {
    runs.iter().map(|&(i, j)| pos[i..=j].to_vec()).collect()
}

pub fn composite_norm(
    inner: &NormSpec,
    outer: &Outer,
    x: &RationalVector,
    ctx: &NormContext,
) -> Result<NormResult> {
    check_support(x, ctx.composite_ceiling)?;
    if x.is_empty() {
        return Ok(NormResult { value: NormValue::zero(), witness: Vec::new() });
    }
    let pos = x.support();
    let table = piece_table(inner, x, ctx)?;
    match outer {
        Outer::Lp(Exponent::Infinity) => Ok(sup_piece(&pos, &table, ctx)),
        Outer::Lp(p) => {
            if let Some(pi) = p.as_integer() {
                if let Some(r) = exact_lp_partition(&pos, &table, pi) {
                    return Ok(r);
                }
            }
            Ok(interval_lp_partition(&pos, &table, p, ctx))
        }
        Outer::Schreier(alpha) => schreier_outer(alpha, &pos, &table, ctx),
    }
}

fn sup_piece(pos: &[u64], table: &[Vec<NormValue>], ctx: &NormContext) -> NormResult {
    let mut best: Option<(NormValue, (usize, usize))> = None;
    for (i, row) in table.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let take = match &best {
                None => true,
                Some((b, _)) => super::compare(v, b, &ctx.tolerance) == Some(std::cmp::Ordering::Greater),
            };
            if take {
                best = Some((v.clone(), (i, i + k)));
            }
        }
    }
    let (value, run) = best.expect("nonempty support");
    NormResult { value, witness: runs_to_positions(pos, &[run]) }
}

/// Interval DP with exact p-th powers of the piece values.
fn exact_lp_partition(pos: &[u64], table: &[Vec<NormValue>], p: u32) -> Option<NormResult> {
    let powers: Vec<Vec<Rational>> = table
        .iter()
        .map(|row| row.iter().map(|v| v.pth_power(p)).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    let n = pos.len();
    let mut dp: Vec<(Rational, Vec<(usize, usize)>)> = vec![(Rational::zero(), Vec::new()); n + 1];
    for i in (0..n).rev() {
        let mut cand: Option<(Rational, Vec<(usize, usize)>)> = None;
        for (k, w) in powers[i].iter().enumerate() {
            let j = i + k;
            let v = w + &dp[j + 1].0;
            let better = match &cand {
                None => true,
                Some((c, _)) => v > *c,
            };
            if better {
                let mut runs = vec![(i, j)];
                runs.extend(dp[j + 1].1.iter().copied());
                cand = Some((v, runs));
            }
        }
        dp[i] = cand.expect("row is nonempty");
    }
    let (power, runs) = dp.swap_remove(0);
    let value = if p == 1 { NormValue::Exact(power) } else { NormValue::PthPower { power, p } };
    Some(NormResult { value, witness: runs_to_positions(pos, &runs) })
}

fn interval_lp_partition(
    pos: &[u64],
    table: &[Vec<NormValue>],
    p: &Exponent,
    ctx: &NormContext,
) -> NormResult {
    let Exponent::Finite(pq) = p else { unreachable!() };
    let n = pos.len();
    let mut width = ctx.tolerance.clone();
    loop {
        let piece = &width / Rational::from_integer(BigInt::from(8 * (n as i64 + 1)));
        let mut dp: Vec<(Interval, Vec<(usize, usize)>)> = vec![(Interval::zero(), Vec::new()); n + 1];
        for i in (0..n).rev() {
            let mut cand: Option<(Interval, Vec<(usize, usize)>)> = None;
            for (k, v) in table[i].iter().enumerate() {
                let j = i + k;
                let iv = powered(v, pq, &piece).add(&dp[j + 1].0);
                cand = Some(match cand {
                    None => {
                        let mut runs = vec![(i, j)];
                        runs.extend(dp[j + 1].1.iter().copied());
                        (iv, runs)
                    }
                    Some((c, _)) if iv.lo > c.lo => {
                        let mut runs = vec![(i, j)];
                        runs.extend(dp[j + 1].1.iter().copied());
                        (c.max(&iv), runs)
                    }
                    Some((c, runs)) => (c.max(&iv), runs),
                });
            }
            dp[i] = cand.expect("row is nonempty");
        }
        let (sum, runs) = dp.swap_remove(0);
        let iv = interval_power(&sum, &pq.recip(), &piece);
        if iv.width() <= ctx.tolerance {
            return NormResult { value: NormValue::Interval(iv), witness: runs_to_positions(pos, &runs) };
        }
        width /= Rational::from_integer(BigInt::from(16));
    }
}

/// Encloses `v^p` for a norm value `v`.
fn powered(v: &NormValue, p: &Rational, width: &Rational) -> Interval {
    match v {
        NormValue::Exact(q) => rational_power_enclosure(q, p, width),
        NormValue::PthPower { power, p: k } => {
            let e = p / Rational::from_integer(BigInt::from(*k));
            rational_power_enclosure(power, &e, width)
        }
        NormValue::Interval(iv) => interval_power(iv, p, width),
    }
}

/// Exhaustive over all `2^{n-1}` run partitions; needs rational piece values.
fn schreier_outer(
    alpha: &Ordinal,
    pos: &[u64],
    table: &[Vec<NormValue>],
    ctx: &NormContext,
) -> Result<NormResult> {
    let exact: Vec<Vec<Rational>> = table
        .iter()
        .map(|row| row.iter().map(NormValue::exact).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::invalid("a Schreier outer norm needs rational inner values"))?;
    let n = pos.len();
    let masks = 1u64 << (n - 1);
    let cut_runs = |mask: u64| -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = 0;
        for k in 0..n - 1 {
            if mask >> k & 1 == 1 {
                runs.push((start, k));
                start = k + 1;
            }
        }
        runs.push((start, n - 1));
        runs
    };
    let evaluated = par::map_range(0..masks, |mask| -> Result<(Rational, u64)> {
        let runs = cut_runs(mask);
        let v = RationalVector::from_pairs(runs.iter().map(|&(i, j)| (pos[i], exact[i][j - i].clone())))?;
        let r = schreier_norm(alpha, &v, ctx)?;
        Ok((r.value.exact().expect("Schreier norms are exact"), mask))
    });
    let mut best: Option<(Rational, Vec<(usize, usize)>)> = None;
    for e in evaluated {
        let (v, mask) = e?;
        let runs = cut_runs(mask);
        let better = match &best {
            None => true,
            Some((b, r)) => v > *b || (v == *b && runs < *r),
        };
        if better {
            best = Some((v, runs));
        }
    }
    let (value, runs) = best.expect("at least one partition");
    Ok(NormResult { value: NormValue::Exact(value), witness: runs_to_positions(pos, &runs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::baernstein_norm;
    use crate::rational::{int, ratio};

    fn ones(pos: &[u64]) -> RationalVector {
        RationalVector::indicator(pos).unwrap()
    }

    #[test]
    fn schreier_inner_l2_outer_matches_baernstein() {
        let ctx = NormContext::default();
        let a: Ordinal = "1".parse().unwrap();
        let x = ones(&[1, 2, 3]);
        let r = composite_norm(&NormSpec::Schreier(a.clone()), &Outer::Lp(Exponent::integer(2)), &x, &ctx).unwrap();
        assert_eq!(r.value.pth_power(2), Some(int(5)));
        let b = baernstein_norm(&a, &Exponent::integer(2), &x, &ctx).unwrap();
        assert_eq!(r.value, b.value);
    }

    #[test]
    fn single_coordinate_is_the_inner_value() {
        let ctx = NormContext::default();
        let x = RationalVector::from_pairs([(4, ratio(-3, 7))]).unwrap();
        for outer in [Outer::Lp(Exponent::integer(2)), Outer::Lp(Exponent::Infinity), Outer::Schreier(Ordinal::nat(1))] {
            let r = composite_norm(&NormSpec::Schreier(Ordinal::nat(2)), &outer, &x, &ctx).unwrap();
            assert_eq!(r.value.exact(), Some(ratio(3, 7)), "{outer:?}");
        }
    }

    #[test]
    fn fractional_outer_is_certified() {
        let ctx = NormContext::default();
        let x = ones(&[2, 3, 4]);
        let p = Exponent::parse("3/2").unwrap();
        let r = composite_norm(&NormSpec::Schreier(Ordinal::nat(1)), &Outer::Lp(p.clone()), &x, &ctx).unwrap();
        let b = baernstein_norm(&Ordinal::nat(1), &p, &x, &ctx).unwrap();
        let (NormValue::Interval(a), NormValue::Interval(c)) = (&r.value, &b.value) else { panic!() };
        assert!(a.width() <= ctx.tolerance);
        assert!(a.lo <= c.hi && c.lo <= a.hi);
    }

    #[test]
    fn schreier_outer_exhausts_partitions() {
        let ctx = NormContext::default();
        // Inner ℓ_1 of each run, outer S_0: the best single run is the whole support.
        let x = ones(&[1, 2, 3, 4]);
        let r = composite_norm(&NormSpec::Lp(Exponent::integer(1)), &Outer::Schreier(Ordinal::zero()), &x, &ctx).unwrap();
        assert_eq!(r.value, NormValue::Exact(int(4)));
        assert_eq!(r.witness, vec![vec![1, 2, 3, 4]]);
    }

    #[test]
    fn composite_budget() {
        let ctx = NormContext { composite_ceiling: 3, ..NormContext::default() };
        let err = composite_norm(&NormSpec::Schreier(Ordinal::nat(1)), &Outer::Lp(Exponent::integer(2)), &ones(&[1, 2, 3, 4]), &ctx)
            .unwrap_err();
        assert!(err.is_budget());
    }
}
