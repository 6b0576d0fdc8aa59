//! Exact Schreier, Baernstein and ℓ_p norms on finitely supported rational
//! vectors, the interval-blocking composite norm, and a domination falsifier.
//!
//! Both `‖x‖_α = sup_{E ∈ S_α} Σ_{i∈E} |x_i|` and the Baernstein norm
//! `‖x‖_{α,p} = sup (Σ_j (Σ_{i∈E_j} |x_i|)^p)^{1/p}` over successive members
//! `E_1 < E_2 < …` only read `|x_i|` on the support, so all searches run over
//! support positions.

mod composite;
mod domination;
pub mod search;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::interval::{interval_power, rational_power_enclosure, root_enclosure, Interval};
use crate::ordinal::Ordinal;
use crate::rational::{format_rational, lcm_denominators, parse_rational, pow, scaled_abs, Exponent, Rational};
use crate::report::rational_json;
use crate::schreier::Plan;

pub use composite::{composite_norm, Outer};
pub use domination::{
    check_domination, coefficient_samples, DominationOutcome, DominationProblem, SampleFamilies,
};
use search::{Best, Weight, Weighted};

/// A finitely supported vector with exact rational coordinates. Zero
/// coordinates are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RationalVector {
    entries: BTreeMap<u64, Rational>,
}

impl RationalVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut v = RationalVector::new();
        for (i, q) in pairs {
            if i == 0 {
                return Err(Error::invalid("positions start at 1"));
            }
            v.add_at(i, &q);
        }
        Ok(v)
    }

    /// The unit vector `e_i`.
    pub fn unit(i: u64) -> Self {
        RationalVector::from_pairs([(i, Rational::one())]).expect("positive position")
    }

    /// `Σ_{i∈positions} e_i`.
    pub fn indicator(positions: &[u64]) -> Result<Self> {
        RationalVector::from_pairs(positions.iter().map(|&i| (i, Rational::one())))
    }

    pub fn add_at(&mut self, i: u64, q: &Rational) {
        let entry = self.entries.entry(i).or_insert_with(Rational::zero);
        *entry += q;
        if entry.is_zero() {
            self.entries.remove(&i);
        }
    }

    pub fn get(&self, i: u64) -> Rational {
        self.entries.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.entries.iter().map(|(&i, q)| (i, q))
    }

    pub fn support(&self) -> Vec<u64> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `min supp`; `None` stands for `∞` on the zero vector.
    pub fn min_supp(&self) -> Option<u64> {
        self.entries.keys().next().copied()
    }

    /// `max supp`; `0` on the zero vector.
    pub fn max_supp(&self) -> u64 {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    /// `Ex`: coordinates outside `e` are dropped.
    pub fn restrict(&self, e: &[u64]) -> RationalVector {
        RationalVector {
            entries: e
                .iter()
                .filter_map(|i| self.entries.get(i).map(|q| (*i, q.clone())))
                .collect(),
        }
    }

    /// Coordinates with `lo <= i <= hi`.
    pub fn restrict_range(&self, lo: u64, hi: u64) -> RationalVector {
        RationalVector {
            entries: self
                .entries
                .range(lo..=hi)
                .map(|(i, q)| (*i, q.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> RationalVector {
        if c.is_zero() {
            return RationalVector::new();
        }
        RationalVector {
            entries: self.entries.iter().map(|(i, q)| (*i, q * c)).collect(),
        }
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        let mut out = self.clone();
        for (i, q) in other.iter() {
            out.add_at(i, q);
        }
        out
    }

    pub fn sum<'a>(vectors: impl IntoIterator<Item = &'a RationalVector>) -> RationalVector {
        let mut out = RationalVector::new();
        for v in vectors {
            for (i, q) in v.iter() {
                out.add_at(i, q);
            }
        }
        out
    }

    pub fn coefficient_sum(&self) -> Rational {
        self.entries.values().sum()
    }

    pub fn l1(&self) -> Rational {
        self.entries.values().map(|q| q.abs()).sum()
    }

    /// Moves coordinate `support[k]` to `targets[k]`.
    pub fn relocate(&self, targets: &[u64]) -> Result<RationalVector> {
        if targets.len() != self.len() {
            return Err(Error::invalid("relocation needs one target per support point"));
        }
        RationalVector::from_pairs(targets.iter().copied().zip(self.entries.values().cloned()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "coords": self.entries.iter().map(|(i, q)| json!({
                "i": i,
                "num": int_json(q.numer()),
                "den": int_json(q.denom()),
            })).collect::<Vec<_>>()
        })
    }

    /// Strict parser for `{"coords":[{"i":3,"num":1,"den":3}, …]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let coords = v
            .get("coords")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("vector JSON needs a `coords` array".into()))?;
        let mut out = RationalVector::new();
        let mut last = 0u64;
        for (k, c) in coords.iter().enumerate() {
            let at = |f: &str| format!("coords[{k}].{f}");
            let i = c
                .get("i")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Parse(format!("{} must be a positive integer", at("i"))))?;
            if i == 0 || i <= last {
                return Err(Error::Parse(format!(
                    "{} must be positive and strictly increasing",
                    at("i")
                )));
            }
            last = i;
            let num = json_int(c.get("num"), &at("num"))?;
            let den = json_int(c.get("den"), &at("den"))?;
            if den < BigInt::one() {
                return Err(Error::Parse(format!("{} must be >= 1", at("den"))));
            }
            if num.is_zero() {
                return Err(Error::Parse(format!("{} must be nonzero", at("num"))));
            }
            let q = Rational::new(num.clone(), den.clone());
            if q.numer() != &num || q.denom() != &den {
                return Err(Error::Parse(format!("coords[{k}] is not gcd-reduced")));
            }
            out.entries.insert(i, q);
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        RationalVector::from_json(&v)
    }

    /// Support positions, integer weights `|x_i|·D`, and `D`.
    pub(crate) fn scaled(&self) -> (Vec<u64>, Vec<BigUint>, BigUint) {
        let d = lcm_denominators(self.entries.values());
        let weights = self.entries.values().map(|q| scaled_abs(q, &d)).collect();
        (self.support(), weights, d)
    }
}

fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => Value::String(n.to_string()),
    }
}

fn json_int(v: Option<&Value>, at: &str) -> Result<BigInt> {
    match v {
        Some(Value::Number(n)) if n.is_i64() || n.is_u64() => {
            Ok(n.to_string().parse().expect("integral JSON number"))
        }
        Some(Value::String(s)) => s
            .parse()
            .map_err(|_| Error::Parse(format!("{at} must be an integer"))),
        _ => Err(Error::Parse(format!("{at} must be an integer"))),
    }
}

/// A norm value: exact, exact p-th power, or a certified enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormValue {
    Exact(Rational),
    /// The value is `power^(1/p)`.
    PthPower { power: Rational, p: u32 },
    Interval(Interval),
}

impl NormValue {
    pub fn zero() -> Self {
        NormValue::Exact(Rational::zero())
    }

    /// `value^p` when it is rational and known exactly.
    pub fn pth_power(&self, p: u32) -> Option<Rational> {
        match self {
            NormValue::Exact(q) => Some(pow(q, p)),
            NormValue::PthPower { power, p: q } if *q == p => Some(power.clone()),
            NormValue::PthPower { power, p: q } if p.is_multiple_of(*q) => Some(pow(power, p / q)),
            NormValue::PthPower { power, p: q } => {
                // Perfect powers still give an exact value.
                let root = exact_root(power, *q)?;
                Some(pow(&root, p))
            }
            NormValue::Interval(iv) if iv.is_point() => Some(pow(&iv.lo, p)),
            NormValue::Interval(_) => None,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        self.pth_power(1)
    }

    pub fn enclosure(&self, width: &Rational) -> Interval {
        match self {
            NormValue::Exact(q) => Interval::point(q.clone()),
            NormValue::PthPower { power, p } => root_enclosure(power, *p, width),
            NormValue::Interval(iv) => iv.clone(),
        }
    }

    pub fn scale(&self, c: &Rational) -> NormValue {
        assert!(!c.is_negative());
        match self {
            NormValue::Exact(q) => NormValue::Exact(q * c),
            NormValue::PthPower { power, p } => NormValue::PthPower {
                power: power * pow(c, *p),
                p: *p,
            },
            NormValue::Interval(iv) => NormValue::Interval(iv.scale(c)),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            NormValue::Exact(q) => json!({ "mode": "exact", "value": rational_json(q) }),
            NormValue::PthPower { power, p } => {
                json!({ "mode": "pth-power", "p": p, "power": rational_json(power) })
            }
            NormValue::Interval(iv) => json!({
                "mode": "interval",
                "lo": rational_json(&iv.lo),
                "hi": rational_json(&iv.hi),
            }),
        }
    }

    /// Short human-readable form.
    pub fn describe(&self) -> String {
        match self {
            NormValue::Exact(q) => format_rational(q),
            NormValue::PthPower { power, p } => {
                format!("({})^(1/{p})", format_rational(power))
            }
            NormValue::Interval(iv) => {
                format!("[{}, {}]", format_rational(&iv.lo), format_rational(&iv.hi))
            }
        }
    }
}

fn exact_root(q: &Rational, k: u32) -> Option<Rational> {
    let n = nth_root_exact(&q.numer().to_biguint()?, k)?;
    let d = nth_root_exact(&q.denom().to_biguint()?, k)?;
    Some(Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn nth_root_exact(n: &BigUint, k: u32) -> Option<BigUint> {
    let r = n.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *n).then_some(r)
}

/// Orders `u` against `c·l`; exact when both sides have rational p-th
/// powers for a common `p`, otherwise by enclosures of width `tol`.
/// `None` when the enclosures overlap.
pub fn compare_scaled(u: &NormValue, c: &Rational, l: &NormValue, tol: &Rational) -> Option<Ordering> {
    let p = match (u, l) {
        (NormValue::PthPower { p, .. }, _) | (_, NormValue::PthPower { p, .. }) => *p,
        _ => 1,
    };
    if let (Some(a), Some(b)) = (u.pth_power(p), l.pth_power(p)) {
        return Some(a.cmp(&(b * pow(c, p))));
    }
    let a = u.enclosure(tol);
    let b = l.enclosure(tol).scale(c);
    if a.hi < b.lo {
        Some(Ordering::Less)
    } else if a.lo > b.hi {
        Some(Ordering::Greater)
    } else if a.is_point() && b.is_point() && a.lo == b.lo {
        Some(Ordering::Equal)
    } else {
        None
    }
}

pub fn compare(u: &NormValue, l: &NormValue, tol: &Rational) -> Option<Ordering> {
    compare_scaled(u, &Rational::one(), l, tol)
}

/// A norm evaluation: the value plus the optimizing blocks (one block for
/// the Schreier norm, the partition for the Baernstein norm, the interval
/// pieces for composite norms).
#[derive(Debug, Clone, PartialEq)]
pub struct NormResult {
    pub value: NormValue,
    pub witness: Vec<Vec<u64>>,
}

impl NormResult {
    pub fn to_json(&self) -> Value {
        json!({ "value": self.value.to_json(), "witness": self.witness })
    }
}

/// Which norm to evaluate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormSpec {
    Schreier(Ordinal),
    Baernstein(Ordinal, Exponent),
    Lp(Exponent),
}

impl NormSpec {
    pub fn describe(&self) -> String {
        match self {
            NormSpec::Schreier(a) => format!("schreier(alpha={a})"),
            NormSpec::Baernstein(a, p) => format!("baernstein(alpha={a}, p={p})"),
            NormSpec::Lp(p) => format!("lp(p={p})"),
        }
    }

    pub fn evaluate(&self, x: &RationalVector, ctx: &NormContext) -> Result<NormResult> {
        match self {
            NormSpec::Schreier(a) => schreier_norm(a, x, ctx),
            NormSpec::Baernstein(a, p) => baernstein_norm(a, p, x, ctx),
            NormSpec::Lp(p) => lp_norm(p, x, ctx),
        }
    }
}

/// Budgets and tolerances shared by the evaluators.
#[derive(Debug, Clone)]
pub struct NormContext {
    /// Largest support handled by the Schreier/Baernstein searches.
    pub support_ceiling: usize,
    /// Largest support handled by [`composite_norm`].
    pub composite_ceiling: usize,
    /// Certified width of interval-mode results.
    pub tolerance: Rational,
}

impl Default for NormContext {
    fn default() -> Self {
        NormContext {
            support_ceiling: 25,
            composite_ceiling: 20,
            tolerance: parse_rational("1e-12").expect("literal"),
        }
    }
}

fn check_support(x: &RationalVector, ceiling: usize) -> Result<()> {
    if x.len() > ceiling {
        return Err(Error::budget(
            format!("support of size {} for exact search", x.len()),
            ceiling as u64,
        ));
    }
    Ok(())
}

fn indices_to_positions(pos: &[u64], idx: &[usize]) -> Vec<u64> {
    idx.iter().map(|&k| pos[k]).collect()
}

fn big_to_rational(b: &BigUint, d: &BigUint) -> Rational {
    Rational::new(BigInt::from(b.clone()), BigInt::from(d.clone()))
}

/// `‖x‖_α`, exact, with the lexicographically least optimal member.
pub fn schreier_norm(alpha: &Ordinal, x: &RationalVector, ctx: &NormContext) -> Result<NormResult> {
    check_support(x, ctx.support_ceiling)?;
    let (pos, weights, d) = x.scaled();
    let plan = Plan::new(alpha, pos.len().max(1))?;
    let (value, idx) = match Weighted::<u128>::new(pos.clone(), &weights) {
        Some(w) => {
            let b = search::heaviest_member(&plan, &w);
            (b.value.to_big(), b.indices)
        }
        None => {
            let w = Weighted::<BigUint>::new(pos.clone(), &weights).expect("bigint weights");
            let b = search::heaviest_member(&plan, &w);
            (b.value, b.indices)
        }
    };
    Ok(NormResult {
        value: NormValue::Exact(big_to_rational(&value, &d)),
        witness: vec![indices_to_positions(&pos, &idx)],
    })
}

/// Tables of heaviest blocks per start index; see [`search::block_table`].
fn tables<W: Weight>(plan: &Plan, w: &Weighted<W>) -> Vec<Vec<Best<W>>> {
    (0..w.len()).map(|i| search::block_table(plan, w, i)).collect()
}

/// `‖x‖_{X_α^p}`: exact for integral `p` (reported as a p-th power, or as
/// the value itself when `p = 1`), exact for `p = ∞`, and a certified
/// interval of width `ctx.tolerance` otherwise.
pub fn baernstein_norm(
    alpha: &Ordinal,
    p: &Exponent,
    x: &RationalVector,
    ctx: &NormContext,
) -> Result<NormResult> {
    check_support(x, ctx.support_ceiling)?;
    if *p == Exponent::Infinity {
        return schreier_norm(alpha, x, ctx);
    }
    let (pos, weights, d) = x.scaled();
    let plan = Plan::new(alpha, pos.len().max(1))?;
    if let Some(pi) = p.as_integer() {
        let (value, part) = integral_partition(&plan, &pos, &weights, pi);
        let power = big_to_rational(&value, &num_traits::pow(d, pi as usize));
        let witness = part.iter().map(|b| indices_to_positions(&pos, b)).collect();
        let value = if pi == 1 {
            NormValue::Exact(power)
        } else {
            NormValue::PthPower { power, p: pi }
        };
        return Ok(NormResult { value, witness });
    }
    let Exponent::Finite(pq) = p else { unreachable!() };
    let big = Weighted::<BigUint>::new(pos.clone(), &weights).expect("bigint weights");
    let tabs = tables(&plan, &big);
    let (iv, part) = fractional_partition(&tabs, &d, pq, &ctx.tolerance);
    Ok(NormResult {
        value: NormValue::Interval(iv),
        witness: part.iter().map(|b| indices_to_positions(&pos, b)).collect(),
    })
}

fn integral_partition(
    plan: &Plan,
    pos: &[u64],
    weights: &[BigUint],
    p: u32,
) -> (BigUint, Vec<Vec<usize>>) {
    if let Some(w) = Weighted::<u128>::new(pos.to_vec(), weights) {
        let tabs = tables(plan, &w);
        if let Some((v, part)) = search::best_partition(&tabs, p) {
            return (v.to_big(), part);
        }
    }
    let w = Weighted::<BigUint>::new(pos.to_vec(), weights).expect("bigint weights");
    let tabs = tables(plan, &w);
    search::best_partition(&tabs, p).expect("bigint arithmetic does not overflow")
}

/// Interval DP for a non-integral exponent. Block weights are exact; only
/// their powers are enclosed. Precision is tightened until the enclosure of
/// the norm is at most `tol` wide.
fn fractional_partition(
    tabs: &[Vec<Best<BigUint>>],
    d: &BigUint,
    p: &Rational,
    tol: &Rational,
) -> (Interval, Vec<Vec<usize>>) {
    let n = tabs.len();
    let inv_p = p.recip();
    let mut width = tol.clone();
    for _ in 0..40 {
        let mut dp: Vec<(Interval, Vec<Vec<usize>>)> = vec![(Interval::zero(), Vec::new()); n + 1];
        let piece_width = &width / Rational::from_integer(BigInt::from(4 * (n as i64 + 1)));
        for i in (0..n).rev() {
            let mut cand = dp[i + 1].clone();
            for (k, b) in tabs[i].iter().enumerate() {
                let j = i + k;
                let w = big_to_rational(&b.value, d);
                let iv = rational_power_enclosure(&w, p, &piece_width).add(&dp[j + 1].0);
                let mut part = vec![b.indices.clone()];
                part.extend(dp[j + 1].1.iter().cloned());
                let better = iv.lo > cand.0.lo || (iv.lo == cand.0.lo && part < cand.1);
                let hull = cand.0.max(&iv);
                cand = if better { (hull, part) } else { (hull, cand.1) };
            }
            dp[i] = cand;
        }
        let (sum_iv, part) = dp.swap_remove(0);
        let norm = interval_power(&sum_iv, &inv_p, &piece_width);
        if norm.width() <= *tol {
            return (norm, part);
        }
        width /= Rational::from_integer(BigInt::from(16));
    }
    unreachable!("enclosure width fails to shrink")
}

/// `‖x‖_{ℓ_p}`.
pub fn lp_norm(p: &Exponent, x: &RationalVector, ctx: &NormContext) -> Result<NormResult> {
    let witness = vec![x.support()];
    let value = match p {
        Exponent::Infinity => {
            NormValue::Exact(x.iter().map(|(_, q)| q.abs()).max().unwrap_or_else(Rational::zero))
        }
        Exponent::Finite(pq) => match p.as_integer() {
            Some(1) => NormValue::Exact(x.l1()),
            Some(pi) => NormValue::PthPower {
                power: x.iter().map(|(_, q)| pow(&q.abs(), pi)).sum(),
                p: pi,
            },
            None => {
                let n = Rational::from_integer(BigInt::from(x.len() as i64 + 1));
                let mut width = ctx.tolerance.clone();
                loop {
                    let piece = &width / &n;
                    let sum = x.iter().fold(Interval::zero(), |acc, (_, q)| {
                        acc.add(&rational_power_enclosure(&q.abs(), pq, &piece))
                    });
                    let iv = interval_power(&sum, &pq.recip(), &piece);
                    if iv.width() <= ctx.tolerance {
                        break NormValue::Interval(iv);
                    }
                    width /= Rational::from_integer(BigInt::from(16));
                }
            }
        },
    };
    Ok(NormResult { value, witness })
}

/// Vectors with strictly successive supports (`max supp z_n < min supp z_{n+1}`).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSequence {
    blocks: Vec<RationalVector>,
}

impl BlockSequence {
    pub fn new(blocks: Vec<RationalVector>) -> Result<Self> {
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::invalid(format!("block {k} is zero")));
            }
            if k > 0 && blocks[k - 1].max_supp() >= b.min_supp().unwrap() {
                return Err(Error::invalid(format!("blocks {} and {k} are not successive", k - 1)));
            }
        }
        Ok(BlockSequence { blocks })
    }

    pub fn blocks(&self) -> &[RationalVector] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `m_n = min supp z_n`.
    pub fn minima(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.min_supp().unwrap()).collect()
    }

    /// `Σ a_n z_n`.
    pub fn combine(&self, coeffs: &[Rational]) -> RationalVector {
        RationalVector::sum(
            self.blocks
                .iter()
                .zip(coeffs)
                .map(|(b, a)| b.scale(a))
                .collect::<Vec<_>>()
                .iter(),
        )
    }
}
