//! Brute-force reference implementations. They share no search code with
//! the library: membership tries every split into successive blocks, and
//! the Baernstein oracle labels every support point as skipped, continuing
//! the current block, or opening a new one.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};

use crate::norms::RationalVector;
use crate::ordinal::{Kind, Ordinal};
use crate::rational::Rational;

/// Memoized all-splits membership for one family.
#[derive(Debug, Default)]
pub struct MembershipOracle {
    memo: HashMap<Ordinal, HashMap<Vec<u64>, bool>>,
}

impl MembershipOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_member(&mut self, alpha: &Ordinal, e: &[u64]) -> bool {
        if e.is_empty() {
            return true;
        }
        if let Some(&v) = self.memo.get(alpha).and_then(|m| m.get(e)) {
            return v;
        }
        let v = match alpha.kind() {
            Kind::Zero => e.len() == 1,
            Kind::Successor(beta) => self.splits(&beta, e, e[0] as usize),
            Kind::Limit => (1..=e[0]).any(|n| {
                let stage = alpha.fundamental(n).expect("limit").successor();
                self.is_member(&stage, e)
            }),
        };
        self.memo.entry(alpha.clone()).or_default().insert(e.to_vec(), v);
        v
    }

    /// Can `e` be cut into at most `pieces` successive `S_β` blocks?
    fn splits(&mut self, beta: &Ordinal, e: &[u64], pieces: usize) -> bool {
        if e.is_empty() {
            return true;
        }
        if pieces == 0 {
            return false;
        }
        for cut in 1..=e.len() {
            if self.is_member(beta, &e[..cut]) && self.splits(beta, &e[cut..], pieces - 1) {
                return true;
            }
        }
        false
    }
}

/// `‖x‖^p` for the Baernstein norm with integral `p`, by enumerating every
/// labeling of the support. Returns the exact p-th power.
pub fn baernstein_power(alpha: &Ordinal, p: u32, x: &RationalVector, oracle: &mut MembershipOracle) -> Rational {
    let (pos, weights, d) = x.scaled();
    let w: Vec<BigUint> = weights;
    let n = pos.len();
    let mut best = BigUint::from(0u32);
    let mut labels = vec![0u8; n];
    // 0 = skip, 1 = continue current block, 2 = open a block.
    loop {
        if let Some(v) = labeling_value(&pos, &w, &labels, alpha, p, oracle) {
            if v > best {
                best = v;
            }
        }
        let mut k = 0;
        while k < n && labels[k] == 2 {
            labels[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
        labels[k] += 1;
    }
    Rational::new(BigInt::from(best), BigInt::from(num_traits::pow(d, p as usize)))
}

fn labeling_value(
    pos: &[u64],
    w: &[BigUint],
    labels: &[u8],
    alpha: &Ordinal,
    p: u32,
    oracle: &mut MembershipOracle,
) -> Option<BigUint> {
    let mut blocks: Vec<(Vec<u64>, BigUint)> = Vec::new();
    for (k, &l) in labels.iter().enumerate() {
        match l {
            0 => {}
            1 => {
                let last = blocks.last_mut()?;
                last.0.push(pos[k]);
                last.1 += &w[k];
            }
            _ => blocks.push((vec![pos[k]], w[k].clone())),
        }
    }
    let mut total = BigUint::from(0u32);
    for (b, s) in &blocks {
        if !oracle.is_member(alpha, b) {
            return None;
        }
        total += num_traits::pow(s.clone(), p as usize);
    }
    Some(total)
}
