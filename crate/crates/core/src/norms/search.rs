//! Exact block searches over integer-scaled weights.
//!
//! A rational vector is scaled by the lcm `D` of its denominators so every
//! `|x_i|·D` is an integer. Searches run on `u128` and fall back to
//! `BigUint` when a sum or power would overflow.

use std::fmt::Debug;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::schreier::{Plan, Tracker};

pub trait Weight: Clone + Ord + Send + Sync + Debug + 'static {
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn checked_add(&self, o: &Self) -> Option<Self>;
    fn checked_pow(&self, p: u32) -> Option<Self>;
    fn from_big(b: &BigUint) -> Option<Self>;
    fn to_big(&self) -> BigUint;
}

impl Weight for u128 {
    fn zero() -> Self {
        0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn checked_add(&self, o: &Self) -> Option<Self> {
        u128::checked_add(*self, *o)
    }
    fn checked_pow(&self, p: u32) -> Option<Self> {
        u128::checked_pow(*self, p)
    }
    fn from_big(b: &BigUint) -> Option<Self> {
        b.to_u128()
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Weight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn checked_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn checked_pow(&self, p: u32) -> Option<Self> {
        Some(num_traits::pow(self.clone(), p as usize))
    }
    fn from_big(b: &BigUint) -> Option<Self> {
        Some(b.clone())
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

/// Support positions with their integer weights and prefix sums.
#[derive(Debug, Clone)]
pub struct Weighted<W> {
    pub positions: Vec<u64>,
    pub weights: Vec<W>,
    /// `cum[k] = w_0 + … + w_{k-1}`.
    cum: Vec<W>,
}

impl<W: Weight> Weighted<W> {
    /// `None` when the total weight does not fit `W`.
    pub fn new(positions: Vec<u64>, weights: &[BigUint]) -> Option<Self> {
        let weights: Vec<W> = weights.iter().map(W::from_big).collect::<Option<_>>()?;
        let mut cum = vec![W::zero()];
        for w in &weights {
            let next = cum.last().unwrap().checked_add(w)?;
            cum.push(next);
        }
        Some(Weighted {
            positions,
            weights,
            cum,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `w_{a} + … + w_{b-1}`.
    pub fn range_sum(&self, a: usize, b: usize) -> W {
        self.cum[b].sub(&self.cum[a])
    }
}

/// Best member found so far: weight plus support indices.
#[derive(Debug, Clone)]
pub struct Best<W> {
    pub value: W,
    pub indices: Vec<usize>,
}

/// For the start index `i`, entry `j - i` holds the heaviest member `E` with
/// `min E = positions[i]` and `E ⊆ positions[i..=j]`; ties keep the
/// lexicographically least set.
pub fn block_table<W: Weight>(plan: &Plan, w: &Weighted<W>, i: usize) -> Vec<Best<W>> {
    let n = w.len();
    let root = plan
        .tracker()
        .push(w.positions[i])
        .expect("singletons are members");
    let first = Best {
        value: w.weights[i].clone(),
        indices: vec![i],
    };
    // best[k] is for max index <= i + k.
    let mut best: Vec<Best<W>> = vec![first.clone(); n - i];
    let mut stack = vec![i];

    fn rec<W: Weight>(
        w: &Weighted<W>,
        i: usize,
        state: &Tracker<'_>,
        value: &W,
        stack: &mut Vec<usize>,
        best: &mut [Best<W>],
    ) {
        let last = *stack.last().unwrap();
        for j in last + 1..w.len() {
            let v = value.add(&w.weights[j]);
            // Descendants end at some J >= j with weight <= v + w(j+1..=J).
            let promising = (j..w.len()).any(|big_j| {
                v.add(&w.range_sum(j + 1, big_j + 1)) > best[big_j - i].value
            });
            if !promising {
                continue;
            }
            let Some(next) = state.push(w.positions[j]) else {
                continue;
            };
            stack.push(j);
            for slot in &mut best[j - i..] {
                if v > slot.value {
                    slot.value = v.clone();
                    slot.indices = stack.clone();
                }
            }
            rec(w, i, &next, &v, stack, best);
            stack.pop();
        }
    }

    rec(w, i, &root, &first.value, &mut stack, &mut best);
    best
}

/// Heaviest member contained in the support; ties keep the
/// lexicographically least set.
pub fn heaviest_member<W: Weight>(plan: &Plan, w: &Weighted<W>) -> Best<W> {
    let n = w.len();
    let mut best = Best {
        value: W::zero(),
        indices: Vec::new(),
    };
    fn rec<W: Weight>(
        w: &Weighted<W>,
        state: &Tracker<'_>,
        value: &W,
        stack: &mut Vec<usize>,
        best: &mut Best<W>,
    ) {
        let from = stack.last().map_or(0, |l| l + 1);
        for j in from..w.len() {
            let v = value.add(&w.weights[j]);
            if v.add(&w.range_sum(j + 1, w.len())) <= best.value {
                continue;
            }
            let Some(next) = state.push(w.positions[j]) else {
                continue;
            };
            stack.push(j);
            if v > best.value {
                best.value = v.clone();
                best.indices = stack.clone();
            }
            rec(w, &next, &v, stack, best);
            stack.pop();
        }
    }
    if n > 0 {
        rec(w, &plan.tracker(), &W::zero(), &mut Vec::new(), &mut best);
    }
    best
}

/// Exhaustive visit of every nonempty member inside the support, carrying
/// the running weight. Returns the number of members visited and the
/// heaviest one (first found on ties).
pub fn exhaustive_heaviest<W: Weight>(plan: &Plan, w: &Weighted<W>) -> (u64, Best<W>) {
    let mut best = Best {
        value: W::zero(),
        indices: Vec::new(),
    };
    let mut count = 0u64;
    fn rec<W: Weight>(
        w: &Weighted<W>,
        state: &Tracker<'_>,
        value: &W,
        stack: &mut Vec<usize>,
        best: &mut Best<W>,
        count: &mut u64,
    ) {
        let from = stack.last().map_or(0, |l| l + 1);
        for j in from..w.len() {
            let Some(next) = state.push(w.positions[j]) else {
                continue;
            };
            let v = value.add(&w.weights[j]);
            stack.push(j);
            *count += 1;
            if v > best.value {
                best.value = v.clone();
                best.indices = stack.clone();
            }
            rec(w, &next, &v, stack, best, count);
            stack.pop();
        }
    }
    rec(w, &plan.tracker(), &W::zero(), &mut Vec::new(), &mut best, &mut count);
    (count, best)
}

/// Optimal successive-member partition for an integral exponent `p`:
/// maximizes `Σ_j (weight E_j)^p`. `None` on overflow.
pub fn best_partition<W: Weight>(
    tables: &[Vec<Best<W>>],
    p: u32,
) -> Option<(W, Vec<Vec<usize>>)> {
    let n = tables.len();
    let mut dp: Vec<(W, Vec<Vec<usize>>)> = vec![(W::zero(), Vec::new()); n + 1];
    for i in (0..n).rev() {
        let mut cand = dp[i + 1].clone();
        for (k, b) in tables[i].iter().enumerate() {
            let j = i + k;
            let value = b.value.checked_pow(p)?.checked_add(&dp[j + 1].0)?;
            let better = match value.cmp(&cand.0) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => {
                    let mut part = vec![b.indices.clone()];
                    part.extend(dp[j + 1].1.iter().cloned());
                    part < cand.1
                }
            };
            if better {
                let mut part = vec![b.indices.clone()];
                part.extend(dp[j + 1].1.iter().cloned());
                cand = (value, part);
            }
        }
        dp[i] = cand;
    }
    Some(dp.swap_remove(0))
}
