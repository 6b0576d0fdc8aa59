//! Worked examples with values fixed by hand or by exhaustive brute force.

use std::cmp::Ordering;

use num_bigint::BigUint;
use schreier_core::averages::{generate, mass_bound_check, IndexStream};
use schreier_core::norms::{baernstein_norm, composite_norm, schreier_norm, NormContext, NormSpec, NormValue, Outer, RationalVector};
use schreier_core::ordinal::{compare, Kind};
use schreier_core::rational::{int, ratio};
use schreier_core::szlenk::{enumerate_branches, szlenk_threshold, szlenk_witness, threshold_holds, TreeCertificate};
use schreier_core::{Exponent, FamilyHandle, FiniteSet, Ordinal, Rational};
use serde_json::json;

fn o(s: &str) -> Ordinal {
    s.parse().unwrap()
}

fn set(s: &str) -> FiniteSet {
    s.parse().unwrap()
}

fn vec_of(pairs: &[(u64, i64, i64)]) -> RationalVector {
    RationalVector::from_pairs(pairs.iter().map(|&(i, n, d)| (i, ratio(n, d)))).unwrap()
}

fn ones(positions: &[u64]) -> RationalVector {
    RationalVector::indicator(positions).unwrap()
}

fn ctx() -> NormContext {
    NormContext::default()
}

#[test]
fn ordinal_comparisons() {
    assert_eq!(compare(&o("w"), &o("w")).unwrap(), Ordering::Equal);
    assert_eq!(compare(&o("w*2+3"), &o("w*3")).unwrap(), Ordering::Less);
    for k in 1..=100u64 {
        assert_eq!(compare(&o("w^2"), &o(&format!("w*{k}"))).unwrap(), Ordering::Greater);
    }
}

#[test]
fn ordinal_kinds_and_sequences() {
    assert_eq!(o("0").kind(), Kind::Zero);
    assert_eq!(o("w+1").kind(), Kind::Successor(o("w")));
    assert_eq!(o("w^2*2").kind(), Kind::Limit);
    for n in 1..=20u64 {
        assert_eq!(o("w").fundamental(n).unwrap(), Ordinal::nat(n));
        assert_eq!(o("w^2").fundamental(n).unwrap(), o(&format!("w*{n}")));
        assert_eq!(o("w*3").fundamental(n).unwrap(), o(&format!("w*2+{n}")));
    }
    assert!("w+w".parse::<Ordinal>().is_err());
}

#[test]
fn membership_examples() {
    for a in ["0", "1", "2", "w", "w^2"] {
        assert!(FamilyHandle::new(o(a)).is_member(&FiniteSet::empty()));
    }
    let s1 = FamilyHandle::new(o("1"));
    assert!(s1.is_member(&set("{2,3}")));
    assert!(!s1.is_member(&set("{1,2}")));
    assert!(FamilyHandle::new(o("2")).is_member(&set("{3,4,5}")));
    // {2,5,6} is not in S_1 (3 > 2) but is in S_2 = S_{1+1}, reached at n = 1 ≤ 2.
    assert!(FamilyHandle::new(o("w")).is_member(&set("{2,5,6}")));
}

#[test]
fn maximality_examples() {
    let s1 = FamilyHandle::new(o("1"));
    assert!(s1.is_maximal(&set("{2,3}")).unwrap());
    assert!(!s1.is_maximal(&set("{3,5}")).unwrap());
    assert!(FamilyHandle::new(o("0")).is_maximal(&set("{7}")).unwrap());
    assert_eq!(s1.maximal_extension(&set("{3}"), 5, 64).unwrap(), set("{3,5,6}"));
    assert_eq!(FamilyHandle::new(o("0")).maximal_extension(&set("{4}"), 10, 64).unwrap(), set("{4}"));
    assert_eq!(FamilyHandle::new(o("2")).maximal_extension(&FiniteSet::empty(), 2, 64).unwrap(), set("{2,3,4,5,6,7}"));
}

#[test]
fn enumeration_examples() {
    let show = |a: &str, n| -> Vec<String> {
        FamilyHandle::new(o(a)).enumerate(n, 20).unwrap().iter().map(|e| e.to_string()).collect()
    };
    assert_eq!(show("1", 3), ["{}", "{1}", "{2}", "{3}", "{2,3}"]);
    assert_eq!(show("0", 2), ["{}", "{1}", "{2}"]);
    // Of the 16 subsets of {1..4}, exactly those containing 1 with size > 1 drop out.
    assert_eq!(show("2", 4), ["{}", "{1}", "{2}", "{3}", "{4}", "{2,3}", "{2,4}", "{3,4}", "{2,3,4}"]);
}

#[test]
fn average_examples() {
    let geo = IndexStream::geometric(1, 3).unwrap();
    let p0 = generate(&o("0"), &geo, 2, 1_000_000).unwrap();
    assert_eq!(p0.vectors, vec![ones(&[1]), ones(&[3])]);
    let p1 = generate(&o("1"), &geo, 2, 1_000_000).unwrap();
    assert_eq!(p1.vectors[0], ones(&[1]));
    assert_eq!(p1.vectors[1], vec_of(&[(3, 1, 3), (9, 1, 3), (27, 1, 3)]));
    let p2 = generate(&o("2"), &geo, 1, 1_000_000).unwrap();
    assert_eq!(p2.vectors[0], ones(&[1]));
}

#[test]
fn mass_bound_examples() {
    let geo = IndexStream::geometric(1, 3).unwrap().with_triple_growth().unwrap();
    let p1 = generate(&o("1"), &geo, 2, 1_000_000).unwrap();
    let r = mass_bound_check(&p1, 2, 27, 25).unwrap();
    assert!(r.passed());
    let z = p1.sum(2);
    assert_eq!(z.restrict(&[3, 9, 27]).l1(), int(1));
    let p0 = generate(&o("0"), &geo, 5, 1_000_000).unwrap();
    let r0 = mass_bound_check(&p0, 5, p0.sum(5).max_supp(), 25).unwrap();
    let max = r0.observed.iter().find(|(l, _)| l == "max_l1_mass").unwrap();
    assert_eq!(max.1, json!("1"));
    let p2 = generate(&o("2"), &geo, 1, 1_000_000).unwrap();
    assert!(mass_bound_check(&p2, 1, p2.sum(1).max_supp(), 25).unwrap().passed());
}

#[test]
fn schreier_norm_examples() {
    let r = schreier_norm(&o("1"), &ones(&[1, 2, 3]), &ctx()).unwrap();
    assert_eq!(r.value, NormValue::Exact(int(2)));
    assert_eq!(r.witness, vec![vec![2, 3]]);
    for a in ["0", "1", "w"] {
        assert_eq!(schreier_norm(&o(a), &vec_of(&[(7, -3, 4)]), &ctx()).unwrap().value, NormValue::Exact(ratio(3, 4)));
    }
    let r = schreier_norm(&o("1"), &vec_of(&[(1, 1, 1), (2, 1, 2), (3, 1, 3)]), &ctx()).unwrap();
    assert_eq!(r.value, NormValue::Exact(int(1)));
    assert_eq!(r.witness, vec![vec![1]]);
}

#[test]
fn baernstein_examples() {
    let two = Exponent::integer(2);
    let r = baernstein_norm(&o("1"), &two, &ones(&[1, 2, 3]), &ctx()).unwrap();
    assert_eq!(r.value.pth_power(2), Some(int(5)));
    assert_eq!(r.witness, vec![vec![1], vec![2, 3]]);
    let r = baernstein_norm(&o("1"), &two, &ones(&[2, 3, 4, 5]), &ctx()).unwrap();
    assert_eq!(r.value.pth_power(2), Some(int(10)));
    assert_eq!(r.witness, vec![vec![2], vec![3, 4, 5]]);
    for p in ["1", "2", "3/2", "inf"] {
        let v = baernstein_norm(&o("2"), &Exponent::parse(p).unwrap(), &ones(&[9]), &ctx()).unwrap().value;
        assert!(v.enclosure(&ratio(1, 1_000_000_000_000)).contains(&int(1)), "p = {p}");
    }
}

#[test]
fn composite_examples() {
    let two = Exponent::integer(2);
    let c = composite_norm(&NormSpec::Schreier(o("1")), &Outer::Lp(two.clone()), &ones(&[1, 2, 3]), &ctx()).unwrap();
    assert_eq!(c.value.pth_power(2), Some(int(5)));
    let x = vec_of(&[(2, 1, 1), (3, -1, 2), (5, 1, 3), (6, 1, 1)]);
    let inner = NormSpec::Baernstein(o("1"), two.clone());
    let c = composite_norm(&inner, &Outer::Lp(two.clone()), &x, &ctx()).unwrap();
    let b = baernstein_norm(&o("1"), &two, &x, &ctx()).unwrap();
    assert_eq!(c.value.pth_power(2), b.value.pth_power(2));
    let single = vec_of(&[(4, -2, 3)]);
    for inner in [NormSpec::Schreier(o("2")), NormSpec::Lp(Exponent::integer(3))] {
        let c = composite_norm(&inner, &Outer::Lp(two.clone()), &single, &ctx()).unwrap();
        assert!(c.value.enclosure(&ratio(1, 1_000_000_000_000)).contains(&ratio(2, 3)));
    }
}

#[test]
fn tree_examples() {
    let show = |a: &str, n| -> Vec<String> {
        let cert = TreeCertificate::new(o(a), Rational::from_integer(1.into()), n).unwrap();
        enumerate_branches(&cert, 20)
            .unwrap()
            .iter()
            .map(|b| b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
            .collect()
    };
    assert_eq!(show("1", 3), ["{1}", "{2},{2,3}", "{3}"]);
    assert_eq!(show("0", 2), ["{1}", "{2}"]);
    assert_eq!(show("2", 4), ["{1}", "{2},{2,3},{2,3,4}", "{2},{2,4}", "{3},{3,4}", "{4}"]);
    let n2 = baernstein_norm(&o("1"), &Exponent::integer(2), &ones(&[2, 3]), &ctx()).unwrap();
    assert_eq!(n2.value.pth_power(2), Some(int(4)));
}

#[test]
fn threshold_examples() {
    let one = int(1);
    let two = Exponent::integer(2);
    assert_eq!(szlenk_threshold(&one, &two).unwrap(), BigUint::from(6401u32));
    assert!(!threshold_holds(&one, &two, &BigUint::from(6400u32)).unwrap());
    assert!(threshold_holds(&one, &two, &BigUint::from(6401u32)).unwrap());
    assert!(szlenk_threshold(&int(2), &two).is_err());
}

#[test]
fn witness_examples() {
    let two = Exponent::integer(2);
    let w = szlenk_witness(&o("1"), &two, 2, 64, 1_000_000, &ctx()).unwrap();
    assert!(w.passed());
    let get = |l: &str| w.observed.iter().find(|(k, _)| k == l).unwrap().1.clone();
    assert_eq!(get("mass"), json!("2"));
    let w0 = szlenk_witness(&o("0"), &two, 3, 64, 1_000_000, &ctx()).unwrap();
    assert!(w0.passed());
    let norm = w0.observed.iter().find(|(k, _)| k == "norm").unwrap().1.clone();
    assert_eq!(norm["power"], json!("3"));
    // The maximal 3-growth set in S_3 from 2 runs past u64.
    assert!(szlenk_witness(&o("2"), &two, 2, 64, 1_000_000, &ctx()).unwrap_err().is_budget());
}
