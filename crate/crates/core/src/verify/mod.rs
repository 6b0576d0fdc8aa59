//! The verification suite: one check per claim, each producing a
//! [`CheckReport`], plus the aggregate run with a digest of the canonical
//! report sections.

pub mod oracle;


use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::averages::{generate, mass_bound_check, IndexStream};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::norms::{
    baernstein_norm, check_domination, composite_norm, BlockSequence, DominationProblem, NormSpec,
    Outer, RationalVector,
};
use crate::ordinal::Ordinal;
use crate::par;
use crate::rational::{ratio, Exponent, Rational};
use crate::report::{interval_json, rational_json, set_json, CheckReport, Status};
use crate::schreier::{audit, FamilyHandle, FiniteSet};
use crate::szlenk::{lp_equivalence_check, szlenk_threshold, szlenk_witness, threshold_holds, verify_branch_lower, TreeCertificate};
use oracle::{baernstein_power, MembershipOracle};

const CAP: usize = 16;

fn o(s: &str) -> Ordinal {
    s.parse().expect("ordinal literal")
}

/// The ordinals of the membership and structure checks.
pub fn test_ordinals() -> Vec<Ordinal> {
    ["1", "2", "3", "w", "w+1", "w*2"].into_iter().map(o).collect()
}

fn entry_values() -> Vec<Rational> {
    [(1, 1), (-1, 1), (1, 2), (-1, 2), (1, 3), (-1, 3)].into_iter().map(|(a, b)| ratio(a, b)).collect()
}

/// Vectors for the norm checks: every vector supported in `{1,2,3}` with
/// entries in `{±1, ±1/2, ±1/3}`, then `random` seeded vectors with at most
/// ten support points in `{1..12}`.
pub fn corpus(seed: u64, random: usize) -> Vec<RationalVector> {
    let vals = entry_values();
    let mut out = Vec::new();
    for mask in 1u32..8 {
        let pos: Vec<u64> = (0..3).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        let k = pos.len() as u32;
        for code in 0..6usize.pow(k) {
            let mut c = code;
            let pairs: Vec<(u64, Rational)> = pos
                .iter()
                .map(|&i| {
                    let v = vals[c % 6].clone();
                    c /= 6;
                    (i, v)
                })
                .collect();
            out.push(RationalVector::from_pairs(pairs).expect("positive positions"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ground: Vec<u64> = (1..=12).collect();
    for _ in 0..random {
        let size = rng.gen_range(1..=10);
        let mut pos: Vec<u64> = ground.choose_multiple(&mut rng, size).copied().collect();
        pos.sort_unstable();
        let pairs: Vec<(u64, Rational)> = pos.into_iter().map(|i| (i, vals.choose(&mut rng).unwrap().clone())).collect();
        out.push(RationalVector::from_pairs(pairs).expect("positive positions"));
    }
    out
}

fn observed<'a>(r: &'a CheckReport, label: &str) -> Option<&'a Value> {
    r.observed.iter().find(|(l, _)| l == label).map(|(_, v)| v)
}

/// Greedy membership against the all-splits oracle on every `E ⊆ {1..n}`.
pub fn membership_equivalence(n: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("membership-equivalence");
    report.param("n", n);
    let ordinals = test_ordinals();
    let results = par::map(&ordinals, |alpha| {
        let h = FamilyHandle::new(alpha.clone());
        let mut oracle = MembershipOracle::new();
        let mut mismatches = Vec::new();
        let mut members = 0u64;
        for mask in 0..1u64 << n {
            let e = FiniteSet::from_mask(mask);
            let fast = h.is_member(&e);
            members += fast as u64;
            if fast != oracle.is_member(alpha, e.elements()) {
                mismatches.push(e);
            }
        }
        (members, mismatches)
    });
    for (alpha, (members, mismatches)) in ordinals.iter().zip(results) {
        report.observe(format!("members[{alpha}]"), members);
        for e in mismatches.iter().take(CAP) {
            report.fail("mismatch", json!({ "alpha": alpha.to_string(), "set": set_json(e.elements()) }));
        }
    }
    Ok(report.finish())
}

/// Hereditary and spreading closure of every truncation `S_α ∩ P({1..n})`.
pub fn family_structure(n: u64, cfg: &Config) -> Result<CheckReport> {
    let mut report = CheckReport::new("family-structure");
    report.param("n", n);
    for alpha in test_ordinals() {
        let a = audit(&FamilyHandle::new(alpha.clone()), n, cfg.enumeration_ceiling.max(n))?;
        for key in ["hereditary_violations", "spreading_violations"] {
            let v = observed(&a, key).and_then(Value::as_u64).unwrap_or(u64::MAX);
            report.observe(format!("{key}[{alpha}]"), v);
            if v != 0 {
                let w: Vec<&(String, Value)> = a.witnesses.iter().filter(|(l, _)| key.starts_with(l.as_str())).take(CAP).collect();
                report.fail(key, json!({ "alpha": alpha.to_string(), "witnesses": w.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>() }));
            }
        }
        if let Some(f) = observed(&a, "nesting_findings") {
            report.observe(format!("nesting_findings[{alpha}]"), f.clone());
        }
    }
    Ok(report.finish())
}

/// Exhaustive mass bound `‖E Σ_{n≤N} x_n‖_1 ≤ 2` for ratio-3 streams, for
/// every `N` the budgets admit.
pub fn averages_mass_bound(cfg: &Config) -> Result<CheckReport> {
    let mut report = CheckReport::new("averages-mass-bound");
    let mut limited = Vec::new();
    for alpha in ["1", "2", "w"].map(o) {
        for i1 in [1u64, 2] {
            let stream = IndexStream::geometric(i1, 3)?.with_triple_growth()?;
            let tag = format!("alpha={alpha},i1={i1}");
            let mut reached = 0usize;
            let mut last_err = None;
            for n in 1..=8usize {
                match generate(&alpha, &stream, n, cfg.entry_budget) {
                    Ok(prefix) => {
                        let truncation = prefix.sum(n).max_supp();
                        match mass_bound_check(&prefix, n, truncation, cfg.support_ceiling) {
                            Ok(r) => {
                                let max = observed(&r, "max_l1_mass").cloned().unwrap_or(Value::Null);
                                report.observe(format!("max_mass[{tag},N={n}]"), max);
                                if !r.passed() {
                                    report.fail("bound", json!({ "case": tag, "n_sum": n, "report": r.canonical_json() }));
                                }
                                reached = n;
                            }
                            Err(e) if e.is_budget() => {
                                last_err = Some(e.to_string());
                                break;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    Err(e) if e.is_budget() => {
                        last_err = Some(e.to_string());
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            report.observe(format!("max_n_sum[{tag}]"), reached);
            if let Some(e) = last_err {
                limited.push(json!({ "case": tag, "tested_up_to": reached, "stopped_by": e }));
            }
        }
    }
    report.observe("budget_limited", Value::Array(limited));
    report.note("N_sum runs up to the first budget error; cases with nothing feasible are listed as budget-limited");
    Ok(report.finish())
}

/// DP against the labeling oracle, and the interval-blocking formula with
/// Schreier inner norm against the DP.
pub fn baernstein_correctness(vectors: &[RationalVector], cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let mut report = CheckReport::new("baernstein-correctness");
    report.param("vectors", vectors.len()).param("seed", cfg.seed);
    let mut compared = 0u64;
    for alpha in ["1", "2"].map(o) {
        for p in [1u32, 2] {
            let exp = Exponent::integer(p);
            let rows = par::map(vectors, |x| -> Result<(bool, bool, Value)> {
                let dp = baernstein_norm(&alpha, &exp, x, &ctx)?.value.pth_power(p).expect("integral p");
                let brute = baernstein_power(&alpha, p, x, &mut MembershipOracle::new());
                let comp = composite_norm(&NormSpec::Schreier(alpha.clone()), &Outer::Lp(exp.clone()), x, &ctx)?
                    .value
                    .pth_power(p)
                    .expect("integral p");
                let detail = json!({
                    "alpha": alpha.to_string(), "p": p, "x": x.to_json(),
                    "dp": rational_json(&dp), "brute": rational_json(&brute), "composite": rational_json(&comp),
                });
                Ok((dp == brute, dp == comp, detail))
            });
            let mut shown = 0;
            for row in rows {
                let (a, b, detail) = row?;
                compared += 1;
                if !(a && b) && shown < CAP {
                    shown += 1;
                    report.fail(if a { "composite mismatch" } else { "oracle mismatch" }, detail);
                }
            }
        }
    }
    report.observe("comparisons", compared);
    Ok(report.finish())
}

/// `composite(baernstein inner, ℓ_p outer) = baernstein`.
pub fn composition_idempotence(vectors: &[RationalVector], cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let p = 2u32;
    let exp = Exponent::integer(p);
    let mut report = CheckReport::new("composition-idempotence");
    report.param("vectors", vectors.len()).param("p", p);
    let mut compared = 0u64;
    for alpha in ["1", "2"].map(o) {
        let inner = NormSpec::Baernstein(alpha.clone(), exp.clone());
        let rows = par::map(vectors, |x| -> Result<(bool, Value)> {
            let b = baernstein_norm(&alpha, &exp, x, &ctx)?.value;
            let c = composite_norm(&inner, &Outer::Lp(exp.clone()), x, &ctx)?.value;
            let same = b.pth_power(p).is_some() && b.pth_power(p) == c.pth_power(p);
            Ok((same, json!({ "alpha": alpha.to_string(), "x": x.to_json(), "baernstein": b.to_json(), "composite": c.to_json() })))
        });
        let mut shown = 0;
        for row in rows {
            let (same, detail) = row?;
            compared += 1;
            if !same && shown < CAP {
                shown += 1;
                report.fail("mismatch", detail);
            }
        }
    }
    report.observe("comparisons", compared);
    Ok(report.finish())
}

/// All increasing `g` with `g_j ≥ s_j` and `g_last ≤ n`.
pub fn spreads(support: &[u64], n: u64) -> Vec<Vec<u64>> {
    fn rec(s: &[u64], from: u64, n: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        let k = cur.len();
        if k == s.len() {
            out.push(cur.clone());
            return;
        }
        let remaining = (s.len() - k - 1) as u64;
        let lo = s[k].max(from);
        for g in lo..=n.saturating_sub(remaining) {
            cur.push(g);
            rec(s, g + 1, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(support, 1, n, &mut Vec::new(), &mut out);
    out
}

/// Moving coordinates to the right never decreases the Baernstein norm.
pub fn right_dominance(vectors: &[RationalVector], n: u64, cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let mut report = CheckReport::new("right-dominance");
    report.param("vectors", vectors.len()).param("n", n);
    let mut compared = 0u64;
    for alpha in ["1", "2"].map(o) {
        for p in [1u32, 2] {
            let exp = Exponent::integer(p);
            let rows = par::map(vectors, |x| -> Result<(u64, Vec<Value>)> {
                let base = baernstein_norm(&alpha, &exp, x, &ctx)?.value.pth_power(p).expect("integral p");
                let mut count = 0;
                let mut bad = Vec::new();
                for g in spreads(&x.support(), n) {
                    let y = x.relocate(&g)?;
                    let v = baernstein_norm(&alpha, &exp, &y, &ctx)?.value.pth_power(p).expect("integral p");
                    count += 1;
                    if v < base && bad.len() < 2 {
                        bad.push(json!({
                            "alpha": alpha.to_string(), "p": p, "x": x.to_json(), "spread": set_json(&g),
                            "original": rational_json(&base), "spread_value": rational_json(&v),
                        }));
                    }
                }
                Ok((count, bad))
            });
            let mut shown = 0;
            for row in rows {
                let (count, bad) = row?;
                compared += count;
                for b in bad {
                    if shown < CAP {
                        shown += 1;
                        report.fail("violation", b);
                    }
                }
            }
        }
    }
    report.observe("comparisons", compared).note("values compared as exact p-th powers");
    Ok(report.finish())
}

/// A seeded block sequence: 1..=5 blocks with supports inside `{1..15}`.
pub fn random_block_sequence(rng: &mut ChaCha8Rng) -> BlockSequence {
    let vals = entry_values();
    let len = rng.gen_range(1..=5usize);
    let count = rng.gen_range(len..=15usize);
    let ground: Vec<u64> = (1..=15).collect();
    let mut pos: Vec<u64> = ground.choose_multiple(rng, count).copied().collect();
    pos.sort_unstable();
    let mut cuts: Vec<usize> = (1..count).collect::<Vec<_>>().choose_multiple(rng, len - 1).copied().collect();
    cuts.sort_unstable();
    cuts.push(count);
    let mut blocks = Vec::with_capacity(len);
    let mut start = 0;
    for c in cuts {
        let pairs: Vec<(u64, Rational)> = pos[start..c].iter().map(|&i| (i, vals.choose(rng).unwrap().clone())).collect();
        blocks.push(RationalVector::from_pairs(pairs).expect("positive positions"));
        start = c;
    }
    BlockSequence::new(blocks).expect("successive by construction")
}

/// Falsifier run of the upper estimate with constant 4 against the basis at
/// the block minima, over at least `min_samples` coefficient samples per α.
pub fn upper_block_estimates(min_samples: usize, cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let c = Rational::from_integer(BigInt::from(4));
    let mut report = CheckReport::new("upper-block-estimates");
    report.param("constant", rational_json(&c)).param("min_samples", min_samples).param("seed", cfg.seed);
    for alpha in ["1", "2"].map(o) {
        let norm = NormSpec::Baernstein(alpha.clone(), Exponent::integer(2));
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (mut samples, mut sequences, mut inconclusive) = (0usize, 0usize, 0usize);
        let mut best: Option<(crate::interval::Interval, Value)> = None;
        let mut shown = 0;
        while samples < min_samples {
            let batch: Vec<BlockSequence> = (0..32).map(|_| random_block_sequence(&mut rng)).collect();
            let mut families = cfg.families();
            families.seed = rng.gen();
            let outs = par::map(&batch, |blocks| -> Result<_> {
                let m = blocks.minima();
                let problem = DominationProblem::normalized(blocks.clone(), norm.clone(), m, norm.clone(), &ctx)?;
                check_domination(&problem, &c, &families, &ctx)
            });
            for (blocks, out) in batch.iter().zip(outs) {
                let out = out?;
                samples += out.samples;
                sequences += 1;
                inconclusive += out.inconclusive;
                if best.as_ref().is_none_or(|(b, _)| out.max_ratio.lo > b.lo) {
                    let seq: Vec<Value> = blocks.blocks().iter().map(RationalVector::to_json).collect();
                    best = Some((out.max_ratio.clone(), json!({ "blocks": seq, "coefficients": out.max_ratio_coeffs.iter().map(rational_json).collect::<Vec<_>>() })));
                }
                if out.falsified && shown < CAP {
                    shown += 1;
                    report.fail("violation", json!({ "alpha": alpha.to_string(), "report": out.report.canonical_json() }));
                }
            }
        }
        let (ratio_iv, at) = best.expect("at least one sequence");
        report
            .observe(format!("samples[{alpha}]"), samples)
            .observe(format!("sequences[{alpha}]"), sequences)
            .observe(format!("inconclusive[{alpha}]"), inconclusive)
            .observe(format!("max_ratio[{alpha}]"), interval_json(&ratio_iv))
            .witness(format!("max_ratio_at[{alpha}]"), at);
    }
    report.note("falsifier over seeded samples; not falsified is not a proof of domination");
    Ok(report.finish())
}

/// `‖a‖_p ≤ ‖Σ_{n≤k} a_n x_n‖ ≤ 5‖a‖_p` for `k ≤ 4`. A `k` whose averages
/// exceed the budgets is a failure of the check, with the budget error as
/// its witness.
pub fn lp_equivalence(max_k: usize, cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let exp = Exponent::integer(2);
    let mut report = CheckReport::new("lp-equivalence");
    report.param("max_k", max_k).param("seed", cfg.seed);
    let stream = IndexStream::geometric(1, 3)?.with_triple_growth()?;
    for alpha in ["1", "2"].map(o) {
        for k in 1..=max_k {
            let tag = format!("alpha={alpha},k={k}");
            match lp_equivalence_check(&alpha, &exp, &stream, k, &cfg.families(), cfg.entry_budget, &ctx) {
                Ok(r) => {
                    report.observe(format!("samples[{tag}]"), observed(&r, "samples").cloned().unwrap_or(Value::Null));
                    if !r.passed() {
                        report.fail("violation", json!({ "case": tag, "report": r.canonical_json() }));
                    }
                }
                Err(e) if e.is_budget() => {
                    report.fail("out of budget", json!({ "case": tag, "error": e.to_string() }));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report.finish())
}

/// Exact branch identity on the canonical tree.
pub fn canonical_tree(n: u64, cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let mut report = CheckReport::new("canonical-tree");
    report.param("truncation", n);
    for alpha in ["1", "2"].map(o) {
        let cert = TreeCertificate::new(alpha.clone(), Rational::one(), n)?;
        let norm = NormSpec::Baernstein(alpha.clone(), Exponent::integer(2));
        let r = verify_branch_lower(&cert, &norm, &cfg.families(), cfg.enumeration_ceiling, &ctx)?;
        for key in ["branches", "samples", "inconclusive"] {
            report.observe(format!("{key}[{alpha}]"), observed(&r, key).cloned().unwrap_or(Value::Null));
        }
        if !r.passed() {
            report.fail("violation", json!({ "alpha": alpha.to_string(), "report": r.canonical_json() }));
        }
        if observed(&r, "inconclusive").and_then(Value::as_u64) != Some(0) {
            report.fail("inexact", json!({ "alpha": alpha.to_string() }));
        }
    }
    Ok(report.finish())
}

/// Threshold and boundary for `ρ = 1`, `p = 2`; the witness for `α = 1`,
/// `i_1 = 2`.
pub fn szlenk_arithmetic(cfg: &Config) -> Result<CheckReport> {
    let ctx = cfg.norm_context();
    let mut report = CheckReport::new("szlenk-arithmetic");
    let two = Exponent::integer(2);
    let one = Rational::one();
    let t = szlenk_threshold(&one, &two)?;
    let below = threshold_holds(&one, &two, &BigUint::from(6400u32))?;
    let at = threshold_holds(&one, &two, &BigUint::from(6401u32))?;
    report
        .observe("threshold", t.to_string())
        .observe("holds_at_6400", below)
        .observe("holds_at_6401", at);
    if t != BigUint::from(6401u32) || below || !at {
        report.fail("threshold", json!({ "threshold": t.to_string(), "6400": below, "6401": at }));
    }
    let w = szlenk_witness(&o("1"), &two, 2, 64, cfg.entry_budget, &ctx)?;
    for key in ["set", "mass", "norm", "bound"] {
        report.observe(format!("witness_{key}"), observed(&w, key).cloned().unwrap_or(Value::Null));
    }
    if observed(&w, "mass") != Some(&json!("2")) {
        report.fail("mass", w.canonical_json());
    } else if !w.passed() {
        report.fail("witness", w.canonical_json());
    }
    let norm_ok = match observed(&w, "norm") {
        Some(v) => v["mode"] == "pth-power" && v["p"] == 2,
        None => false,
    };
    if !norm_ok {
        report.fail("norm mode", json!({ "expected": "exact p-th power" }));
    }
    Ok(report.finish())
}

/// Sizes of the sampled parts of the suite.
#[derive(Debug, Clone)]
pub struct SuiteScale {
    pub membership_n: u64,
    pub random_vectors: usize,
    pub spread_n: u64,
    pub block_samples: usize,
    pub max_k: usize,
    pub tree_n: u64,
}

impl Default for SuiteScale {
    fn default() -> Self {
        SuiteScale { membership_n: 12, random_vectors: 300, spread_n: 12, block_samples: 10_000, max_k: 4, tree_n: 6 }
    }
}

pub const CRITERIA: [&str; 11] = [
    "membership-equivalence",
    "family-structure",
    "averages-mass-bound",
    "baernstein-correctness",
    "composition-idempotence",
    "right-dominance",
    "upper-block-estimates",
    "lp-equivalence",
    "canonical-tree",
    "szlenk-arithmetic",
    "determinism",
];

/// Runs criterion `k` (1-based). Determinism is not runnable on its own.
pub fn run_criterion(k: usize, scale: &SuiteScale, cfg: &Config) -> Result<CheckReport> {
    let vectors = || corpus(cfg.seed, scale.random_vectors);
    match k {
        1 => membership_equivalence(scale.membership_n),
        2 => family_structure(scale.membership_n, cfg),
        3 => averages_mass_bound(cfg),
        4 => baernstein_correctness(&vectors(), cfg),
        5 => composition_idempotence(&vectors(), cfg),
        6 => right_dominance(&vectors(), scale.spread_n, cfg),
        7 => upper_block_estimates(scale.block_samples, cfg),
        8 => lp_equivalence(scale.max_k, cfg),
        9 => canonical_tree(scale.tree_n, cfg),
        10 => szlenk_arithmetic(cfg),
        _ => Err(Error::invalid(format!("no criterion {k}"))),
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub reports: Vec<CheckReport>,
    pub summary: CheckReport,
}

impl SuiteRun {
    pub fn canonical_json(&self) -> Value {
        json!({
            "summary": self.summary.canonical_json(),
            "reports": self.reports.iter().map(CheckReport::canonical_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "summary": self.summary.to_json(),
            "reports": self.reports.iter().map(CheckReport::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn passed(&self) -> bool {
        self.summary.status != Status::Fail
    }
}

fn digest(reports: &[CheckReport]) -> String {
    let canon: Vec<Value> = reports.iter().map(CheckReport::canonical_json).collect();
    let bytes = serde_json::to_vec(&canon).expect("serializable");
    format!("{:x}", Sha256::digest(bytes))
}

/// Runs criteria 1–10; with `repeat` the whole suite runs a second time
/// and criterion 11 compares the two canonical digests.
pub fn run_all(scale: &SuiteScale, cfg: &Config, repeat: bool) -> Result<SuiteRun> {
    let run = || -> Result<Vec<CheckReport>> { (1..=10).map(|k| run_criterion(k, scale, cfg)).collect() };
    let mut reports = run()?;
    let first = digest(&reports);
    let mut det = CheckReport::new("determinism");
    det.param("seed", cfg.seed).observe("digest", first.clone());
    if repeat {
        let second = digest(&run()?);
        det.observe("repeat_digest", second.clone());
        if second != first {
            det.fail("digest mismatch", json!({ "first": first, "second": second }));
        }
    } else {
        det.set_info().note("single run; determinism not re-checked");
    }
    reports.push(det.finish());

    let mut summary = CheckReport::new("verify-all");
    summary.param("config", cfg.to_json()).param("repeat", repeat);
    for (name, r) in CRITERIA.iter().zip(&reports) {
        summary.observe(*name, r.status.as_str());
        if r.status == Status::Fail {
            summary.fail(*name, json!({ "failed_check": r.check_name }));
        }
    }
    summary.observe("digest", digest(&reports));
    Ok(SuiteRun { reports, summary: summary.finish() })
}
