//! The repeated-averages hierarchy `x_n^{α,I}`.
//!
//! Each vector only depends on the position of the stream cursor when it is
//! started, so the recursion is driven by one cursor:
//! - `α = 0`: the next unit vector `e_{i}`;
//! - `α = β+1`: take the next β-vector `y`, set `s = min supp y`, and average
//!   `y` with the following `s-1` β-vectors;
//! - `α` limit: with `m` the next stream element, the next `(α[m]+1)`-vector.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::norms::search::{exhaustive_heaviest, Weighted};
use crate::norms::RationalVector;
use crate::ordinal::{Kind, Ordinal};
use crate::rational::Rational;
use crate::report::{rational_json, set_json, CheckReport};
use crate::schreier::{FamilyHandle, FiniteSet, Plan};

/// Default cap on coefficient entries produced by one [`generate`] call.
pub const DEFAULT_ENTRY_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthRule {
    /// `i_{n+1} = ratio·i_n` past the prefix.
    Geometric,
    /// The prefix is the whole stream.
    Finite,
}

/// A strictly increasing sequence `I = (i_n)` given by a prefix and a tail rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexStream {
    pub prefix: Vec<u64>,
    #[serde(default = "default_rule")]
    pub rule: GrowthRule,
    #[serde(default = "default_ratio")]
    pub ratio: u64,
    /// Require `3·i_n ≤ i_{n+1}` throughout.
    #[serde(default)]
    pub triple_growth: bool,
}

fn default_rule() -> GrowthRule {
    GrowthRule::Geometric
}

fn default_ratio() -> u64 {
    3
}

impl IndexStream {
    /// `(start, start·ratio, start·ratio², …)`.
    pub fn geometric(start: u64, ratio: u64) -> Result<Self> {
        IndexStream { prefix: vec![start], rule: GrowthRule::Geometric, ratio, triple_growth: false }.validated()
    }

    pub fn finite(elements: Vec<u64>) -> Result<Self> {
        IndexStream { prefix: elements, rule: GrowthRule::Finite, ratio: 1, triple_growth: false }.validated()
    }

    pub fn with_triple_growth(mut self) -> Result<Self> {
        self.triple_growth = true;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        FiniteSet::new(self.prefix.clone())
            .map_err(|e| Error::invalid(format!("stream prefix: {e}")))?;
        if self.rule == GrowthRule::Geometric {
            if self.prefix.is_empty() {
                return Err(Error::invalid("a geometric stream needs a nonempty prefix"));
            }
            if self.ratio < 2 {
                return Err(Error::invalid("a geometric ratio must be at least 2"));
            }
        }
        if self.triple_growth {
            if self.prefix.windows(2).any(|w| w[0].saturating_mul(3) > w[1]) {
                return Err(Error::invalid("stream prefix violates 3·i_n ≤ i_(n+1)"));
            }
            if self.rule == GrowthRule::Geometric && self.ratio < 3 {
                return Err(Error::invalid("stream ratio violates 3·i_n ≤ i_(n+1)"));
            }
        }
        Ok(self)
    }

    /// `i_{k+1}` (0-based `k`).
    pub fn get(&self, k: usize) -> Result<u64> {
        if let Some(&i) = self.prefix.get(k) {
            return Ok(i);
        }
        match self.rule {
            GrowthRule::Finite => Err(Error::budget(
                "finite index stream exhausted",
                self.prefix.len() as u64,
            )),
            GrowthRule::Geometric => {
                let last = *self.prefix.last().expect("validated");
                let steps = (k + 1 - self.prefix.len()) as u32;
                self.ratio
                    .checked_pow(steps)
                    .and_then(|f| f.checked_mul(last))
                    .ok_or_else(|| Error::budget(format!("stream element {} exceeds u64", k + 1), u64::MAX))
            }
        }
    }

    /// Reads `{prefix: [1,3,9], rule: geometric, ratio: 3}` (YAML or JSON).
    pub fn parse(text: &str) -> Result<Self> {
        let s: IndexStream = serde_yaml::from_str(text).map_err(|e| Error::Parse(format!("index stream: {e}")))?;
        s.validated()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// `x_1^{α,I}, …, x_N^{α,I}` and the number of stream elements used.
#[derive(Debug, Clone)]
pub struct AveragePrefix {
    pub alpha: Ordinal,
    pub stream: IndexStream,
    pub vectors: Vec<RationalVector>,
    pub consumed: usize,
}

impl AveragePrefix {
    pub fn sum(&self, n: usize) -> RationalVector {
        RationalVector::sum(self.vectors[..n].iter())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha.to_string(),
            "stream": self.stream.to_json(),
            "consumed": self.consumed,
            "vectors": self.vectors.iter().map(RationalVector::to_json).collect::<Vec<_>>(),
        })
    }
}

struct Cursor<'a> {
    stream: &'a IndexStream,
    at: usize,
    budget: u64,
}

impl Cursor<'_> {
    fn next(&mut self, alpha: &Ordinal) -> Result<RationalVector> {
        match alpha.kind() {
            Kind::Zero => {
                if self.at as u64 >= self.budget {
                    return Err(Error::budget("repeated-average coefficient entries", self.budget));
                }
                let i = self.stream.get(self.at)?;
                self.at += 1;
                Ok(RationalVector::unit(i))
            }
            Kind::Successor(beta) => {
                let first = self.next(&beta)?;
                let s = first.min_supp().expect("averages are nonzero");
                let mut parts = vec![first];
                for _ in 1..s {
                    parts.push(self.next(&beta)?);
                }
                let inv = Rational::new(BigInt::one(), BigInt::from(s));
                Ok(RationalVector::sum(parts.iter()).scale(&inv))
            }
            Kind::Limit => {
                let m = self.stream.get(self.at)?;
                self.next(&alpha.fundamental(m)?.successor())
            }
        }
    }
}

/// Generates the first `n` averages exactly and asserts convexity,
/// successive supports covering an initial segment of the stream, and
/// maximality of each support in `S_α`.
pub fn generate(alpha: &Ordinal, stream: &IndexStream, n: usize, entry_budget: u64) -> Result<AveragePrefix> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let mut cursor = Cursor { stream, at: 0, budget: entry_budget };
    let mut vectors = Vec::with_capacity(n);
    for _ in 0..n {
        vectors.push(cursor.next(alpha)?);
    }
    let prefix = AveragePrefix { alpha: alpha.clone(), stream: stream.clone(), vectors, consumed: cursor.at };
    check_invariants(&prefix)?;
    Ok(prefix)
}

fn check_invariants(prefix: &AveragePrefix) -> Result<()> {
    let family = FamilyHandle::new(prefix.alpha.clone());
    let mut used = Vec::new();
    for (k, v) in prefix.vectors.iter().enumerate() {
        let n = k + 1;
        if v.coefficient_sum() != Rational::one() || v.iter().any(|(_, q)| *q <= Rational::zero()) {
            return Err(Error::Invariant(format!("x_{n} is not a convex combination")));
        }
        let supp = FiniteSet::new(v.support())?;
        if !family.is_maximal(&supp)? {
            return Err(Error::Invariant(format!("supp x_{n} = {supp} is not maximal in S_{}", prefix.alpha)));
        }
        used.extend(supp.into_vec());
    }
    let expected: Vec<u64> = (0..prefix.consumed).map(|k| prefix.stream.get(k)).collect::<Result<_>>()?;
    if used != expected {
        return Err(Error::Invariant("supports do not partition an initial segment of the stream".into()));
    }
    Ok(())
}

/// Exhaustive check of `‖E(Σ_{n≤N_sum} x_n)‖_1 ≤ 2` over members
/// `E ⊆ {1..truncation}`. Only `E ∩ supp` matters and members are
/// hereditary, so members inside `supp ∩ [1, truncation]` are enumerated;
/// more than `ceiling` such positions is a budget error.
pub fn mass_bound_check(prefix: &AveragePrefix, n_sum: usize, truncation: u64, ceiling: usize) -> Result<CheckReport> {
    if !prefix.stream.triple_growth {
        return Err(Error::invalid("the stream must carry the 3·i_n ≤ i_(n+1) flag"));
    }
    if n_sum == 0 || n_sum > prefix.vectors.len() {
        return Err(Error::invalid(format!("N_sum must lie in 1..={}", prefix.vectors.len())));
    }
    let z = prefix.sum(n_sum).restrict_range(1, truncation);
    if z.len() > ceiling {
        return Err(Error::budget(format!("{} support positions to enumerate", z.len()), ceiling as u64));
    }
    let mut report = CheckReport::new("mass-bound");
    report
        .param("alpha", prefix.alpha.to_string())
        .param("stream", prefix.stream.to_json())
        .param("n_sum", n_sum)
        .param("truncation", truncation);
    let (pos, weights, d) = z.scaled();
    let plan = Plan::new(&prefix.alpha, pos.len().max(1))?;
    let w = Weighted::<num_bigint::BigUint>::new(pos.clone(), &weights).expect("bigint weights");
    let (members, best) = exhaustive_heaviest(&plan, &w);
    let max = Rational::new(BigInt::from(best.value), BigInt::from(d));
    let witness: Vec<u64> = best.indices.iter().map(|&k| pos[k]).collect();
    report
        .observe("members_enumerated", members)
        .observe("support_in_truncation", pos.len())
        .observe("max_l1_mass", rational_json(&max))
        .witness("argmax", set_json(&witness));
    if max > Rational::from_integer(BigInt::from(2)) {
        report.fail("violation", json!({ "set": witness, "mass": rational_json(&max) }));
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn stream_parse() {
        let s = IndexStream::parse("{prefix: [1,3,9], rule: \"geometric\", ratio: 3}").unwrap();
        assert_eq!(s.get(4).unwrap(), 81);
        assert!(IndexStream::parse("{prefix: [3,2]}").is_err());
        assert!(IndexStream::parse("{prefix: [1], extra: 1}").is_err());
        let f = IndexStream::parse(r#"{"prefix": [2, 5], "rule": "finite"}"#).unwrap();
        assert!(f.get(2).unwrap_err().is_budget());
    }

    fn pow3(start: u64) -> IndexStream {
        IndexStream::geometric(start, 3).unwrap().with_triple_growth().unwrap()
    }

    #[test]
    fn base_case_is_the_stream() {
        let p = generate(&o("0"), &pow3(1), 2, DEFAULT_ENTRY_BUDGET).unwrap();
        assert_eq!(p.vectors, vec![RationalVector::unit(1), RationalVector::unit(3)]);
        assert_eq!(p.consumed, 2);
    }

    #[test]
    fn successor_examples() {
        let p = generate(&o("1"), &pow3(1), 2, DEFAULT_ENTRY_BUDGET).unwrap();
        assert_eq!(p.vectors[0], RationalVector::unit(1));
        let third = ratio(1, 3);
        assert_eq!(
            p.vectors[1],
            RationalVector::from_pairs([(3, third.clone()), (9, third.clone()), (27, third)]).unwrap()
        );
        let p = generate(&o("2"), &pow3(1), 1, DEFAULT_ENTRY_BUDGET).unwrap();
        assert_eq!(p.vectors[0], RationalVector::unit(1));
    }

    #[test]
    fn limit_stage_uses_the_stream_minimum() {
        // m = 2, so x_1 = x_1^{3,I} over I = (2, 6, 18, …).
        let p = generate(&o("w"), &IndexStream::geometric(2, 3).unwrap(), 1, DEFAULT_ENTRY_BUDGET);
        assert!(p.unwrap_err().is_budget());
        let p = generate(&o("w"), &pow3(1), 1, DEFAULT_ENTRY_BUDGET).unwrap();
        assert_eq!(p.vectors[0], RationalVector::unit(1));
        let s = IndexStream::finite((2..3000).collect()).unwrap();
        let p = generate(&o("w"), &s, 1, DEFAULT_ENTRY_BUDGET).unwrap();
        // S_3 with min 2: two S_2 pieces, the first of which has min 2.
        assert_eq!(p.vectors[0].min_supp(), Some(2));
        assert_eq!(p.consumed, p.vectors[0].len());
    }

    #[test]
    fn budget_errors_are_explicit() {
        let e = generate(&o("1"), &pow3(1), 4, DEFAULT_ENTRY_BUDGET).unwrap_err();
        assert!(e.is_budget(), "{e}");
        let e = generate(&o("1"), &pow3(1), 3, 50).unwrap_err();
        assert!(e.is_budget(), "{e}");
        let e = generate(&o("1"), &IndexStream::finite(vec![1, 3, 9]).unwrap(), 3, DEFAULT_ENTRY_BUDGET).unwrap_err();
        assert!(e.is_budget());
    }

    #[test]
    fn stream_validation() {
        assert!(IndexStream::geometric(1, 2).unwrap().with_triple_growth().is_err());
        assert!(IndexStream::finite(vec![1, 2]).unwrap().with_triple_growth().is_err());
        assert!(IndexStream::finite(vec![3, 2]).is_err());
        assert!(IndexStream::geometric(0, 3).is_err());
        let s: IndexStream = serde_json::from_str(r#"{"prefix":[1,3,9],"rule":"geometric","ratio":3}"#).unwrap();
        assert_eq!(s.get(5).unwrap(), 243);
    }

    #[test]
    fn mass_bound_examples() {
        let p = generate(&o("1"), &pow3(1), 2, DEFAULT_ENTRY_BUDGET).unwrap();
        let r = mass_bound_check(&p, 2, 100, 25).unwrap();
        assert!(r.passed());
        let p = generate(&o("0"), &pow3(2), 3, DEFAULT_ENTRY_BUDGET).unwrap();
        let r = mass_bound_check(&p, 3, 1000, 25).unwrap();
        assert!(r.passed());
        let json = r.canonical_json();
        let max = json["observed"].as_array().unwrap().iter().find(|o| o["label"] == "max_l1_mass").unwrap();
        assert_eq!(max["value"], "1");
    }
}
