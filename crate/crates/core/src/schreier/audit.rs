use serde_json::json;

use super::{is_member_raw, FamilyHandle, FiniteSet};
use crate::error::{Error, Result};
use crate::ordinal::Kind;
use crate::par;
use crate::report::{set_json, CheckReport, Status};

const WITNESS_CAP: usize = 16;

fn bitmap(alpha: &crate::ordinal::Ordinal, n: u64) -> Vec<bool> {
    par::map_range(0..1u64 << n, |mask| {
        is_member_raw(alpha, FiniteSet::from_mask(mask).elements())
    })
}

/// Structural audit of `S_α ∩ P({1..n})`.
///
/// Hereditary and spreading closure are checked through single-element
/// deletions and single `+1` moves over every member of the truncation;
/// both generate the full closures inside `{1..n}`. Successor monotonicity
/// compares against `S_{α+1}`. For limit `α` the nesting of the stages
/// `S_{α[i]+1} ⊆ S_{α[j]}` (`i < j ≤ n`) is reported as information.
pub fn audit(h: &FamilyHandle, n: u64, ceiling: u64) -> Result<CheckReport> {
    if n > ceiling {
        return Err(Error::budget(format!("audit ground {{1..{n}}}"), ceiling));
    }
    let alpha = h.alpha();
    let mut report = CheckReport::new("schreier.audit");
    report.param("alpha", alpha.to_string()).param("n", n);

    let members = bitmap(alpha, n);
    let member_masks: Vec<u64> = (0..1u64 << n).filter(|&m| members[m as usize]).collect();
    report.observe("members", member_masks.len() as u64);

    let listed = h.enumerate(n, ceiling)?;
    if listed.len() != member_masks.len() {
        report.fail(
            "prefix-enumeration mismatch",
            json!({ "dfs": listed.len(), "scan": member_masks.len() }),
        );
    }

    let mut hereditary = Vec::new();
    let mut spreading = Vec::new();
    for &mask in &member_masks {
        for b in 0..n {
            if mask >> b & 1 == 0 {
                continue;
            }
            let sub = mask & !(1 << b);
            if !members[sub as usize] {
                hereditary.push((mask, sub));
            }
            if b + 1 < n && mask >> (b + 1) & 1 == 0 {
                let moved = sub | 1 << (b + 1);
                if !members[moved as usize] {
                    spreading.push((mask, moved));
                }
            }
        }
    }
    let succ = bitmap(&alpha.successor(), n);
    let monotone: Vec<u64> = member_masks
        .iter()
        .copied()
        .filter(|&m| !succ[m as usize])
        .collect();

    for (name, found) in [("hereditary", &hereditary), ("spreading", &spreading)] {
        report.observe(format!("{name}_violations"), found.len() as u64);
        for (from, to) in found.iter().take(WITNESS_CAP) {
            report.fail(
                name,
                json!({
                    "member": set_json(FiniteSet::from_mask(*from).elements()),
                    "non_member": set_json(FiniteSet::from_mask(*to).elements()),
                }),
            );
        }
    }
    report.observe("successor_monotonicity_violations", monotone.len() as u64);
    for m in monotone.iter().take(WITNESS_CAP) {
        report.fail(
            "successor_monotonicity",
            json!({ "set": set_json(FiniteSet::from_mask(*m).elements()) }),
        );
    }

    if alpha.kind() == Kind::Limit {
        let mut stage_plus_one = Vec::new();
        let mut stage = Vec::new();
        for i in 1..=n {
            let a = alpha.fundamental(i)?;
            stage_plus_one.push(bitmap(&a.successor(), n));
            stage.push(bitmap(&a, n));
        }
        let mut findings = 0u64;
        let mut shown = 0;
        for i in 1..=n as usize {
            for j in i + 1..=n as usize {
                for mask in 0..1usize << n {
                    if stage_plus_one[i - 1][mask] && !stage[j - 1][mask] {
                        findings += 1;
                        if shown < WITNESS_CAP {
                            shown += 1;
                            report.witness(
                                "nesting",
                                json!({
                                    "i": i, "j": j,
                                    "set": set_json(FiniteSet::from_mask(mask as u64).elements()),
                                }),
                            );
                        }
                    }
                }
            }
        }
        report.observe("nesting_findings", findings);
        report.note("nesting findings are informational: limit stages use fixed fundamental sequences without offsets");
    }
    if report.status == Status::Pass && report.witnesses.iter().any(|(l, _)| l == "nesting") {
        report.set_info();
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn observed(r: &CheckReport, label: &str) -> serde_json::Value {
        r.observed
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.clone())
            .unwrap()
    }

    #[test]
    fn audit_examples() {
        let r = audit(&FamilyHandle::new("1".parse().unwrap()), 8, 20).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(observed(&r, "hereditary_violations"), json!(0));
        assert_eq!(observed(&r, "spreading_violations"), json!(0));

        let r = audit(&FamilyHandle::new("0".parse().unwrap()), 5, 20).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(observed(&r, "members"), json!(6));

        let r = audit(&FamilyHandle::new("w".parse().unwrap()), 10, 20).unwrap();
        assert!(r.passed());
        assert_eq!(observed(&r, "hereditary_violations"), json!(0));
        assert_eq!(observed(&r, "spreading_violations"), json!(0));
        assert!(r.observed.iter().any(|(l, _)| l == "nesting_findings"));
    }

    #[test]
    fn audit_respects_ceiling() {
        let h = FamilyHandle::new("1".parse().unwrap());
        assert!(audit(&h, 21, 20).unwrap_err().is_budget());
    }
}
