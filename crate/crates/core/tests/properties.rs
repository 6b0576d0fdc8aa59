//! Property tests for ordinals, families, averages and norms.

use std::cmp::Ordering;

use num_traits::Signed;
use proptest::prelude::*;
use schreier_core::averages::{generate, IndexStream};
use schreier_core::norms::{baernstein_norm, schreier_norm, NormContext, RationalVector};
use schreier_core::ordinal::{compare, Kind};
use schreier_core::rational::{int, ratio};
use schreier_core::verify::oracle::{baernstein_power, MembershipOracle};
use schreier_core::{Exponent, FamilyHandle, FiniteSet, Ordinal, Rational};

fn ordinal() -> impl Strategy<Value = Ordinal> {
    proptest::collection::btree_map(0u64..4, 1u64..4, 0..4).prop_map(|m| {
        let terms: Vec<(u64, u64)> = m.into_iter().rev().collect();
        Ordinal::from_nat_terms(&terms).unwrap()
    })
}

fn limit_ordinal() -> impl Strategy<Value = Ordinal> {
    ordinal().prop_filter("limit", |a| a.kind() == Kind::Limit)
}

fn family_ordinal() -> impl Strategy<Value = Ordinal> {
    prop::sample::select(vec!["0", "1", "2", "3", "w", "w+1", "w+2", "w*2", "w^2", "w^2+w"])
        .prop_map(|s| s.parse().unwrap())
}

fn subset(n: u64) -> impl Strategy<Value = FiniteSet> {
    (0u64..1 << n).prop_map(FiniteSet::from_mask)
}

fn vector(max_pos: u64, max_len: usize) -> impl Strategy<Value = RationalVector> {
    proptest::collection::btree_map(1..=max_pos, (-6i64..=6, 1i64..=4), 0..=max_len).prop_map(|m| {
        RationalVector::from_pairs(m.into_iter().filter(|(_, (n, _))| *n != 0).map(|(i, (n, d))| (i, ratio(n, d)))).unwrap()
    })
}

fn ctx() -> NormContext {
    NormContext::default()
}

fn sup_norm(x: &RationalVector) -> Rational {
    x.iter().map(|(_, q)| q.clone().abs()).max().unwrap_or_else(|| int(0))
}

fn schreier_value(alpha: &Ordinal, x: &RationalVector) -> Rational {
    schreier_norm(alpha, x, &ctx()).unwrap().value.exact().unwrap()
}

fn square(alpha: &Ordinal, x: &RationalVector) -> Rational {
    baernstein_norm(alpha, &Exponent::integer(2), x, &ctx()).unwrap().value.pth_power(2).unwrap()
}

proptest! {
    #[test]
    fn ordinal_trichotomy(a in ordinal(), b in ordinal()) {
        let c = compare(&a, &b).unwrap();
        prop_assert_eq!(c, compare(&b, &a).unwrap().reverse());
        prop_assert_eq!(c == Ordering::Equal, a == b);
        prop_assert_eq!(a.cmp(&b), c);
    }

    #[test]
    fn ordinal_display_roundtrip(a in ordinal()) {
        prop_assert_eq!(a.to_string().parse::<Ordinal>().unwrap(), a);
    }

    #[test]
    fn successor_kind(a in ordinal()) {
        let s = a.successor();
        prop_assert!(s > a);
        prop_assert_eq!(s.kind(), Kind::Successor(a));
    }

    #[test]
    fn fundamental_sequence_increases_below_limit(l in limit_ordinal(), n in 1u64..30) {
        let a = l.fundamental(n).unwrap();
        let b = l.fundamental(n + 1).unwrap();
        prop_assert!(a < b);
        prop_assert!(b < l);
    }

    #[test]
    fn greedy_membership_matches_oracle(alpha in family_ordinal(), e in subset(14)) {
        let fast = FamilyHandle::new(alpha.clone()).is_member(&e);
        prop_assert_eq!(fast, MembershipOracle::new().is_member(&alpha, e.elements()));
    }

    #[test]
    fn members_are_hereditary(alpha in family_ordinal(), e in subset(14), drop in 0u64..1 << 14) {
        let h = FamilyHandle::new(alpha);
        prop_assume!(h.is_member(&e));
        let sub: Vec<u64> = e.elements().iter().copied().filter(|&i| drop >> (i - 1) & 1 == 0).collect();
        prop_assert!(h.is_member_slice(&sub));
    }

    #[test]
    fn members_are_spreading(alpha in family_ordinal(), e in subset(12), shifts in proptest::collection::vec(0u64..3, 12)) {
        let h = FamilyHandle::new(alpha);
        prop_assume!(h.is_member(&e));
        let mut spread = Vec::new();
        let mut last = 0;
        for (k, &i) in e.elements().iter().enumerate() {
            let g = (i + shifts[k]).max(last + 1);
            spread.push(g);
            last = g;
        }
        prop_assert!(h.is_member_slice(&spread));
    }

    #[test]
    fn successor_family_contains_family(alpha in family_ordinal(), e in subset(12)) {
        if FamilyHandle::new(alpha.clone()).is_member(&e) {
            prop_assert!(FamilyHandle::new(alpha.successor()).is_member(&e));
        }
    }

    #[test]
    fn averages_are_convex_successive_blocks(
        alpha in prop::sample::select(vec!["0", "1", "2", "w"]),
        start in 1u64..5,
        ratio_ in 3u64..6,
        n in 1usize..4,
    ) {
        let alpha: Ordinal = alpha.parse().unwrap();
        let stream = IndexStream::geometric(start, ratio_).unwrap();
        let prefix = match generate(&alpha, &stream, n, 100_000) {
            Ok(p) => p,
            Err(e) => {
                prop_assert!(e.is_budget());
                return Ok(());
            }
        };
        let mut used = Vec::new();
        for x in &prefix.vectors {
            prop_assert_eq!(x.coefficient_sum(), int(1));
            prop_assert!(x.iter().all(|(_, q)| *q > int(0)));
            if let Some(&prev) = used.last() {
                prop_assert!(prev < x.min_supp().unwrap());
            }
            used.extend(x.support());
        }
        let expected: Vec<u64> = (0..used.len()).map(|k| stream.get(k).unwrap()).collect();
        prop_assert_eq!(used, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn baernstein_dp_matches_labeling_oracle(alpha in family_ordinal(), p in 1u32..=3, x in vector(10, 7)) {
        let dp = baernstein_norm(&alpha, &Exponent::integer(p), &x, &ctx()).unwrap().value.pth_power(p).unwrap();
        prop_assert_eq!(dp, baernstein_power(&alpha, p, &x, &mut MembershipOracle::new()));
    }

    #[test]
    fn sandwich_between_sup_and_l1(alpha in family_ordinal(), x in vector(16, 10)) {
        let s = schreier_value(&alpha, &x);
        let b = square(&alpha, &x);
        let m = sup_norm(&x);
        let l1 = x.l1();
        prop_assert!(m <= s && s <= l1);
        prop_assert!(&m * &m <= b && b <= &l1 * &l1);
        prop_assert!(&s * &s <= b);
    }

    #[test]
    fn norms_are_homogeneous(alpha in family_ordinal(), x in vector(14, 8), n in -5i64..=5, d in 1i64..=3) {
        let c = ratio(n, d);
        let y = x.scale(&c);
        prop_assert_eq!(schreier_value(&alpha, &y), c.clone().abs() * schreier_value(&alpha, &x));
        prop_assert_eq!(square(&alpha, &y), &c * &c * square(&alpha, &x));
    }

    #[test]
    fn triangle_inequality(alpha in family_ordinal(), x in vector(12, 6), y in vector(12, 6)) {
        let sum = x.add(&y);
        prop_assert!(schreier_value(&alpha, &sum) <= schreier_value(&alpha, &x) + schreier_value(&alpha, &y));
        // sqrt(a) <= sqrt(b) + sqrt(c)  iff  a - b - c <= 2 sqrt(bc).
        let (a, b, c) = (square(&alpha, &sum), square(&alpha, &x), square(&alpha, &y));
        let gap = &a - &b - &c;
        prop_assert!(gap <= int(0) || &gap * &gap <= int(4) * &b * &c);
    }

    #[test]
    fn norms_grow_with_alpha(alpha in family_ordinal(), x in vector(14, 8)) {
        let next = alpha.successor();
        prop_assert!(schreier_value(&alpha, &x) <= schreier_value(&next, &x));
        prop_assert!(square(&alpha, &x) <= square(&next, &x));
    }

    #[test]
    fn right_shift_never_decreases(alpha in family_ordinal(), x in vector(10, 6), shifts in proptest::collection::vec(0u64..3, 6)) {
        let mut targets = Vec::new();
        let mut last = 0;
        for (k, i) in x.support().into_iter().enumerate() {
            let g = (i + shifts[k]).max(last + 1);
            targets.push(g);
            last = g;
        }
        let y = x.relocate(&targets).unwrap();
        prop_assert!(square(&alpha, &x) <= square(&alpha, &y));
        prop_assert!(schreier_value(&alpha, &x) <= schreier_value(&alpha, &y));
    }
}
