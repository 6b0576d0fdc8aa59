//! Membership against a precomputed plan: the ordinals reachable from `α`
//! are resolved once into an arena, so repeated queries do no ordinal
//! arithmetic. A [`Tracker`] is a member set that can be grown one element
//! at a time.
//!
//! Each append re-runs the greedy prefix scan over the arena, stopping at
//! the first limit stage that accepts. An incremental decomposition state
//! needs one sub-state per admissible `n ≤ min E` at every nested limit and
//! grew about 5x per element at `ω²`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ordinal::{Kind, Ordinal};

const MAX_PLAN_NODES: usize = 200_000;

#[derive(Debug)]
enum Node {
    Zero,
    Succ { pred: usize },
    /// `alts[n-1]` is the node of `λ[n] + 1`.
    Limit { alts: Vec<usize> },
}

/// The ordinals reachable from `α` by predecessor and `λ ↦ λ[n]+1` steps
/// (`n ≤ horizon`), flattened into an arena.
#[derive(Debug)]
pub struct Plan {
    nodes: Vec<Node>,
    root: usize,
    horizon: usize,
}

impl Plan {
    /// `horizon` bounds the size of every set the tracker will see.
    pub fn new(alpha: &Ordinal, horizon: usize) -> Result<Self> {
        let mut index = HashMap::new();
        let mut nodes = Vec::new();
        let root = build(alpha, horizon, &mut index, &mut nodes)?;
        Ok(Plan { nodes, root, horizon })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn tracker(&self) -> Tracker<'_> {
        Tracker { plan: self, elements: Vec::new() }
    }

    /// Whether `e` (increasing, `|e| ≤ horizon`) lies in `S_α`.
    pub fn contains(&self, e: &[u64]) -> bool {
        assert!(e.len() <= self.horizon, "plan horizon {} exceeded", self.horizon);
        self.prefix_len(self.root, e) == e.len()
    }

    /// Longest initial segment of `e` in the family of `node`.
    fn prefix_len(&self, node: usize, e: &[u64]) -> usize {
        let Some(&min) = e.first() else {
            return 0;
        };
        match &self.nodes[node] {
            Node::Zero => 1,
            Node::Succ { pred } => {
                let mut pos = 0;
                let mut pieces = 0u64;
                while pos < e.len() && pieces < min {
                    pos += self.prefix_len(*pred, &e[pos..]);
                    pieces += 1;
                }
                pos
            }
            Node::Limit { alts } => {
                // |E| ≤ min E puts E in S_1, inside every stage. Past the
                // horizon this always holds, so `alts` never runs short.
                if e.len() as u64 <= min {
                    return e.len();
                }
                let mut best = 0;
                for &a in &alts[..min as usize] {
                    best = best.max(self.prefix_len(a, e));
                    if best == e.len() {
                        break;
                    }
                }
                best
            }
        }
    }
}

fn build(alpha: &Ordinal, horizon: usize, index: &mut HashMap<Ordinal, usize>, nodes: &mut Vec<Node>) -> Result<usize> {
    if let Some(&id) = index.get(alpha) {
        return Ok(id);
    }
    if nodes.len() >= MAX_PLAN_NODES {
        return Err(Error::budget("membership plan nodes", MAX_PLAN_NODES as u64));
    }
    let node = match alpha.kind() {
        Kind::Zero => Node::Zero,
        Kind::Successor(beta) => Node::Succ { pred: build(&beta, horizon, index, nodes)? },
        Kind::Limit => {
            let mut alts = Vec::with_capacity(horizon);
            for n in 1..=horizon as u64 {
                let stage = alpha.fundamental(n)?.successor();
                alts.push(build(&stage, horizon, index, nodes)?);
            }
            Node::Limit { alts }
        }
    };
    let id = nodes.len();
    nodes.push(node);
    index.insert(alpha.clone(), id);
    Ok(id)
}

/// A member set of the plan's family, grown by appends.
#[derive(Debug, Clone)]
pub struct Tracker<'p> {
    plan: &'p Plan,
    elements: Vec<u64>,
}

impl<'p> Tracker<'p> {
    /// `E ∪ {m}` if that set is a member. `m` must exceed `max E`.
    pub fn push(&self, m: u64) -> Option<Tracker<'p>> {
        debug_assert!(self.elements.last().is_none_or(|&l| l < m));
        let mut elements = Vec::with_capacity(self.elements.len() + 1);
        elements.extend_from_slice(&self.elements);
        elements.push(m);
        self.plan.contains(&elements).then_some(Tracker { plan: self.plan, elements })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Membership of a whole set through the incremental tracker.
#[cfg(test)]
fn tracked_member(plan: &Plan, e: &[u64]) -> bool {
    let mut t = plan.tracker();
    for &m in e {
        match t.push(m) {
            Some(n) => t = n,
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::{is_member_raw, FiniteSet};

    #[test]
    fn tracker_agrees_with_greedy_prefix_scan() {
        for a in ["0", "1", "2", "3", "w", "w+1", "w+2", "w*2", "w^2", "w^2+w"] {
            let alpha: Ordinal = a.parse().unwrap();
            let plan = Plan::new(&alpha, 11).unwrap();
            for mask in 0u64..1 << 11 {
                let s = FiniteSet::from_mask(mask);
                assert_eq!(
                    tracked_member(&plan, s.elements()),
                    is_member_raw(&alpha, s.elements()),
                    "alpha = {a}, set = {s}"
                );
            }
        }
    }

    #[test]
    fn saturation_for_large_minima() {
        let alpha: Ordinal = "w".parse().unwrap();
        let plan = Plan::new(&alpha, 4).unwrap();
        assert!(tracked_member(&plan, &[100, 101, 102, 103]));
        assert!(tracked_member(&plan, &[2, 5, 6]));
        assert!(!tracked_member(&plan, &[1, 2]));
    }

    #[test]
    fn huge_plans_hit_the_node_budget() {
        let alpha: Ordinal = "w^(w)".parse().unwrap();
        assert!(Plan::new(&alpha, 25).unwrap_err().is_budget());
    }
}
