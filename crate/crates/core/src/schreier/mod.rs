//! Schreier families `S_α`: membership, maximality, enumeration and audits.
//!
//! `S_0` holds `∅` and the singletons. `S_{α+1}` holds unions
//! `E_1 < … < E_n` of members of `S_α` with `n ≤ min E_1`. For a limit `λ`,
//! `E ∈ S_λ` iff `E ∈ S_{λ[n]+1}` for some `1 ≤ n ≤ min E`, where `λ[n]` is
//! the fundamental sequence of [`Ordinal::fundamental`].

mod audit;
mod tracker;

use std::fmt;
use std::str::FromStr;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::ordinal::{Kind, Ordinal};

pub use audit::audit;
pub use tracker::{Plan, Tracker};

/// A strictly increasing finite sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FiniteSet(Vec<u64>);

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet(Vec::new())
    }

    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.first() == Some(&0) {
            return Err(Error::invalid("set elements must be positive"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "set elements must be strictly increasing: {elements:?}"
            )));
        }
        Ok(FiniteSet(elements))
    }

    pub fn from_mask(mask: u64) -> Self {
        FiniteSet(
            (0..64)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| b + 1)
                .collect(),
        )
    }

    pub fn elements(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `min ∅ = ∞`.
    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    /// `max ∅ = 0`.
    pub fn max(&self) -> u64 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn with(&self, m: u64) -> Result<Self> {
        if m <= self.max() {
            return Err(Error::invalid(format!("{m} does not extend {self}")));
        }
        let mut v = self.0.clone();
        v.push(m);
        Ok(FiniteSet(v))
    }

    /// `self < other`, i.e. `max self < min other` (vacuous for `∅`).
    pub fn precedes(&self, other: &FiniteSet) -> bool {
        match other.min() {
            Some(m) => self.max() < m,
            None => true,
        }
    }

    /// Initial-segment relation `self ⪯ other`.
    pub fn is_initial_segment_of(&self, other: &FiniteSet) -> bool {
        other.0.starts_with(&self.0)
    }

    /// True when `other` has the same size and dominates `self` termwise.
    pub fn is_spread_to(&self, other: &FiniteSet) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for FiniteSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("sets are written like {{2,3,7}}, got `{s}`")))?;
        if inner.trim().is_empty() {
            return Ok(FiniteSet::empty());
        }
        let elements = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad set element `{}`", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteSet::new(elements)
    }
}

/// Length of the longest initial segment of `e` lying in `S_α`.
///
/// Families are hereditary, so initial-segment membership is monotone and
/// the greedy decomposition (strip the longest member prefix, repeat) uses
/// the fewest pieces.
pub fn longest_member_prefix(alpha: &Ordinal, e: &[u64]) -> usize {
    let Some(&min) = e.first() else {
        return 0;
    };
    match alpha.kind() {
        Kind::Zero => 1,
        Kind::Successor(beta) => {
            let mut pos = 0;
            let mut pieces = 0u64;
            while pos < e.len() && pieces < min {
                pos += longest_member_prefix(&beta, &e[pos..]);
                pieces += 1;
            }
            pos
        }
        Kind::Limit => {
            // |E| ≤ min E puts E in S_1, which sits inside every S_{β+1}.
            if e.len() as u64 <= min {
                return e.len();
            }
            let mut best = 0;
            for n in 1..=min {
                let stage = alpha
                    .fundamental(n)
                    .expect("limit ordinal has a fundamental sequence")
                    .successor();
                best = best.max(longest_member_prefix(&stage, e));
                if best == e.len() {
                    break;
                }
            }
            best
        }
    }
}

pub fn is_member_raw(alpha: &Ordinal, e: &[u64]) -> bool {
    longest_member_prefix(alpha, e) == e.len()
}

/// A Schreier family `S_α` with a memo of resolved membership queries.
#[derive(Debug)]
pub struct FamilyHandle {
    alpha: Ordinal,
    probe_window: u64,
    memo: DashMap<Vec<u64>, bool>,
}

impl Clone for FamilyHandle {
    fn clone(&self) -> Self {
        FamilyHandle::with_probe_window(self.alpha.clone(), self.probe_window)
    }
}

impl FamilyHandle {
    pub fn new(alpha: Ordinal) -> Self {
        FamilyHandle::with_probe_window(alpha, 1)
    }

    pub fn with_probe_window(alpha: Ordinal, probe_window: u64) -> Self {
        FamilyHandle {
            alpha,
            probe_window: probe_window.max(1),
            memo: DashMap::new(),
        }
    }

    pub fn alpha(&self) -> &Ordinal {
        &self.alpha
    }

    pub fn probe_window(&self) -> u64 {
        self.probe_window
    }

    pub fn is_member(&self, e: &FiniteSet) -> bool {
        self.is_member_slice(e.elements())
    }

    pub fn is_member_slice(&self, e: &[u64]) -> bool {
        if e.len() <= 1 {
            return true;
        }
        if let Some(hit) = self.memo.get(e) {
            return *hit;
        }
        let answer = is_member_raw(&self.alpha, e);
        self.memo.insert(e.to_vec(), answer);
        answer
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn require_member(&self, e: &FiniteSet) -> Result<()> {
        if self.is_member(e) {
            Ok(())
        } else {
            Err(Error::NotMember {
                alpha: self.alpha.to_string(),
                set: e.to_string(),
            })
        }
    }

    /// True iff no `E ∪ {m}`, `m > max E`, is a member. Decided by probing
    /// `m = max E + 1, …, max E + window`.
    pub fn is_maximal(&self, e: &FiniteSet) -> Result<bool> {
        self.require_member(e)?;
        let mut probe = e.elements().to_vec();
        for m in e.max() + 1..=e.max() + self.probe_window {
            probe.push(m);
            let member = is_member_raw(&self.alpha, &probe);
            probe.pop();
            if member {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Greedily adds the smallest admissible values `≥ start` until the set
    /// is maximal.
    pub fn maximal_extension(&self, e: &FiniteSet, start: u64, max_len: usize) -> Result<FiniteSet> {
        self.maximal_extension_by(e, start, |m| m.checked_add(1), max_len)
    }

    /// Like [`maximal_extension`](Self::maximal_extension), but after adding
    /// `m` the next candidate is `next(m)` rather than `m + 1`. Membership of
    /// `E ∪ {m}` does not depend on the value of `m > max E`, so the result is
    /// maximal in `S_α` whenever the loop ends on a failed probe.
    pub fn maximal_extension_by(
        &self,
        e: &FiniteSet,
        start: u64,
        next: impl Fn(u64) -> Option<u64>,
        max_len: usize,
    ) -> Result<FiniteSet> {
        self.require_member(e)?;
        if start <= e.max() {
            return Err(Error::invalid(format!(
                "start {start} must exceed max {e} = {}",
                e.max()
            )));
        }
        let mut elems = e.elements().to_vec();
        let mut candidate = Some(start);
        loop {
            let Some(c) = candidate else {
                return Err(Error::budget("next extension candidate overflows u64", u64::MAX));
            };
            let mut added = None;
            for m in c..c.saturating_add(self.probe_window) {
                elems.push(m);
                if is_member_raw(&self.alpha, &elems) {
                    added = Some(m);
                    break;
                }
                elems.pop();
            }
            let Some(m) = added else {
                return Ok(FiniteSet(elems));
            };
            if elems.len() > max_len {
                return Err(Error::budget("maximal extension length", max_len as u64));
            }
            candidate = next(m);
        }
    }

    /// Members contained in `{1..n}`, in shortlex order (size, then
    /// lexicographic).
    pub fn enumerate(&self, n: u64, ceiling: u64) -> Result<Vec<FiniteSet>> {
        if n > ceiling {
            return Err(Error::budget(format!("enumeration ground {{1..{n}}}"), ceiling));
        }
        let ground: Vec<u64> = (1..=n).collect();
        let mut out = self.enumerate_within(&ground, usize::MAX)?;
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.elements().cmp(b.elements())));
        Ok(out)
    }

    /// Members contained in `ground`, in lexicographic (depth-first) order,
    /// found by extending members only (every initial segment of a member is
    /// a member).
    pub fn enumerate_within(&self, ground: &[u64], limit: usize) -> Result<Vec<FiniteSet>> {
        check_ground(ground)?;
        let mut out = Vec::new();
        let mut overflow = false;
        self.for_each_member_within(ground, &mut |set: &[u64]| {
            if out.len() >= limit {
                overflow = true;
                return false;
            }
            out.push(FiniteSet(set.to_vec()));
            true
        })?;
        if overflow {
            return Err(Error::budget("enumerated members", limit as u64));
        }
        Ok(out)
    }

    /// Visits every member contained in `ground` (including `∅`) in
    /// depth-first lexicographic order. The visitor returns `false` to stop.
    pub fn for_each_member_within(
        &self,
        ground: &[u64],
        visit: &mut dyn FnMut(&[u64]) -> bool,
    ) -> Result<()> {
        check_ground(ground)?;
        let plan = Plan::new(&self.alpha, ground.len())?;
        let mut stack = Vec::new();
        if !visit(&stack) {
            return Ok(());
        }
        fn rec(
            ground: &[u64],
            from: usize,
            state: &Tracker<'_>,
            stack: &mut Vec<u64>,
            visit: &mut dyn FnMut(&[u64]) -> bool,
        ) -> bool {
            for j in from..ground.len() {
                if let Some(next) = state.push(ground[j]) {
                    stack.push(ground[j]);
                    if !visit(stack) || !rec(ground, j + 1, &next, stack, visit) {
                        stack.pop();
                        return false;
                    }
                    stack.pop();
                }
            }
            true
        }
        let root = plan.tracker();
        rec(ground, 0, &root, &mut stack, visit);
        Ok(())
    }
}

fn check_ground(ground: &[u64]) -> Result<()> {
    FiniteSet::new(ground.to_vec()).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &str) -> FamilyHandle {
        FamilyHandle::new(s.parse().unwrap())
    }

    fn set(s: &str) -> FiniteSet {
        s.parse().unwrap()
    }

    #[test]
    fn set_syntax() {
        assert_eq!(set("{2, 3,7}").elements(), &[2, 3, 7]);
        assert!(set("{}").is_empty());
        assert!("{3,2}".parse::<FiniteSet>().is_err());
        assert!("{0,2}".parse::<FiniteSet>().is_err());
        assert!("2,3".parse::<FiniteSet>().is_err());
        assert_eq!(set("{2,3,7}").to_string(), "{2,3,7}");
        assert_eq!(FiniteSet::empty().max(), 0);
        assert_eq!(FiniteSet::empty().min(), None);
    }

    #[test]
    fn membership_examples() {
        for a in ["0", "1", "2", "w", "w*2", "w^2"] {
            assert!(fam(a).is_member(&FiniteSet::empty()));
        }
        assert!(fam("1").is_member(&set("{2,3}")));
        assert!(!fam("1").is_member(&set("{1,2}")));
        assert!(fam("2").is_member(&set("{3,4,5}")));
        // {2,5,6} splits as {2,5},{6} in S_2 = S_{ω[1]+1}.
        assert!(fam("w").is_member(&set("{2,5,6}")));
        assert!(!fam("0").is_member(&set("{2,5}")));
    }

    #[test]
    fn maximality_examples() {
        assert!(fam("1").is_maximal(&set("{2,3}")).unwrap());
        assert!(!fam("1").is_maximal(&set("{3,5}")).unwrap());
        assert!(fam("0").is_maximal(&set("{7}")).unwrap());
        assert!(!fam("2").is_maximal(&FiniteSet::empty()).unwrap());
        assert!(matches!(
            fam("1").is_maximal(&set("{1,2}")),
            Err(Error::NotMember { .. })
        ));
    }

    #[test]
    fn maximal_extension_examples() {
        assert_eq!(
            fam("1").maximal_extension(&set("{3}"), 5, 1000).unwrap(),
            set("{3,5,6}")
        );
        assert_eq!(
            fam("0").maximal_extension(&set("{4}"), 10, 1000).unwrap(),
            set("{4}")
        );
        let f = fam("2");
        let ext = f.maximal_extension(&FiniteSet::empty(), 2, 1000).unwrap();
        assert_eq!(ext, set("{2,3,4,5,6,7}"));
        assert!(f.is_maximal(&ext).unwrap());
        assert!(fam("1").maximal_extension(&set("{1,2}"), 5, 10).is_err());
        assert!(fam("1").maximal_extension(&set("{3}"), 3, 10).is_err());
    }

    #[test]
    fn geometric_extension_overflows_into_budget_error() {
        let f = fam("3");
        let err = f
            .maximal_extension_by(&FiniteSet::empty(), 2, |m| m.checked_mul(3), 1000)
            .unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn enumerate_examples() {
        let got = fam("1").enumerate(3, 20).unwrap();
        let want: Vec<FiniteSet> = ["{}", "{1}", "{2}", "{3}", "{2,3}"]
            .iter()
            .map(|s| set(s))
            .collect();
        assert_eq!(got, want);
        let got = fam("0").enumerate(2, 20).unwrap();
        assert_eq!(got, vec![set("{}"), set("{1}"), set("{2}")]);
        // Oracle: subsets of {1..4} whose S_2 status is decided by brute force.
        assert_eq!(fam("2").enumerate(4, 20).unwrap().len(), 9);
        assert!(fam("1").enumerate(21, 20).unwrap_err().is_budget());
    }

    #[test]
    fn enumerate_matches_subset_scan() {
        for a in ["0", "1", "2", "3", "w", "w+1", "w*2", "w^2"] {
            let f = fam(a);
            let listed = f.enumerate(10, 20).unwrap();
            let scanned = (0u64..1 << 10)
                .map(FiniteSet::from_mask)
                .filter(|s| f.is_member(s))
                .count();
            assert_eq!(listed.len(), scanned, "alpha = {a}");
        }
    }

    #[test]
    fn memo_does_not_change_answers() {
        let f = fam("w*2");
        let sets: Vec<FiniteSet> = (0u64..1 << 9).map(FiniteSet::from_mask).collect();
        let first: Vec<bool> = sets.iter().map(|s| f.is_member(s)).collect();
        assert!(f.memo_len() > 0);
        let second: Vec<bool> = sets.iter().map(|s| f.is_member(s)).collect();
        let cold = fam("w*2");
        let third: Vec<bool> = sets.iter().rev().map(|s| cold.is_member(s)).collect();
        assert_eq!(first, second);
        assert_eq!(first, third.into_iter().rev().collect::<Vec<_>>());
    }
}
