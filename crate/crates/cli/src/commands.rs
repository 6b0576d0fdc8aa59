use std::fmt::Write as _;

use anyhow::{bail, Context};
use clap::{Args, Subcommand, ValueEnum};
use schreier_core::averages::{generate, mass_bound_check, IndexStream};
use schreier_core::config::Config;
use schreier_core::norms::{
    check_domination, composite_norm, BlockSequence, DominationProblem, NormResult, NormSpec, Outer, RationalVector,
};
use schreier_core::rational::{format_rational, parse_rational};
use schreier_core::report::{CheckReport, Status};
use schreier_core::schreier::{audit, FamilyHandle, FiniteSet};
use schreier_core::szlenk::{
    enumerate_branches, szlenk_threshold, szlenk_witness, threshold_holds, verify_branch_lower, TreeCertificate,
};
use schreier_core::verify::{run_all, SuiteScale, CRITERIA};
use schreier_core::{Exponent, Ordinal, Rational};
use serde_json::{json, Value};

use crate::{Command, Outcome};

#[derive(Subcommand, Debug)]
pub enum SchreierCmd {
    /// Is the set a member of S_α?
    Check {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        set: String,
    },
    /// All members inside {1..n}, in shortlex order.
    Enumerate {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u64,
    },
    /// Hereditary, spreading and successor-monotonicity audit on {1..n}.
    Audit {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Args, Debug)]
pub struct StreamArgs {
    /// Index stream, e.g. '{prefix: [1,3,9], rule: geometric, ratio: 3}' or @file.
    #[arg(long, conflicts_with = "i1")]
    stream: Option<String>,
    /// Shorthand for the ratio-3 stream (i1, 3·i1, 9·i1, …).
    #[arg(long)]
    i1: Option<u64>,
}

impl StreamArgs {
    fn build(&self) -> anyhow::Result<IndexStream> {
        Ok(match &self.stream {
            Some(t) => IndexStream::parse(&read_arg(t)?)?,
            None => IndexStream::geometric(self.i1.unwrap_or(1), 3)?.with_triple_growth()?,
        })
    }
}

#[derive(Subcommand, Debug)]
pub enum AveragesCmd {
    /// Computes x_1^{α,I}, …, x_n^{α,I}.
    Generate {
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long)]
        n: usize,
    },
    /// Exhaustive check of ‖E(Σ_{n≤N} x_n)‖_1 ≤ 2 over members E.
    MassBound {
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long)]
        n_sum: usize,
        /// Only E inside {1..T}; defaults to the whole support.
        #[arg(long)]
        truncation: Option<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum InnerKind {
    Schreier,
    Baernstein,
    Lp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum OuterKind {
    Lp,
    Schreier,
}

#[derive(Subcommand, Debug)]
pub enum NormCmd {
    /// ‖x‖_{X_α}: the largest ℓ_1 mass on a member of S_α.
    Schreier {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        vec: String,
    },
    /// ‖x‖_{X_α^p}: ℓ_p aggregation of successive member masses.
    Baernstein {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        vec: String,
    },
    /// Interval blocking of an inner norm aggregated by an outer norm.
    Composite {
        #[arg(long, value_enum)]
        inner: InnerKind,
        /// α of the inner norm.
        #[arg(long)]
        alpha: Option<String>,
        /// p of the inner norm.
        #[arg(long)]
        p: Option<String>,
        #[arg(long, value_enum)]
        outer: OuterKind,
        #[arg(long)]
        outer_p: Option<String>,
        #[arg(long)]
        outer_alpha: Option<String>,
        #[arg(long)]
        vec: String,
    },
}

#[derive(Args, Debug)]
pub struct DominateArgs {
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    p: String,
    /// JSON array of vectors with successive supports, or @file.
    #[arg(long)]
    blocks: String,
    /// Positions k_n of the dominating basis; defaults to the block minima.
    #[arg(long)]
    lower: Option<String>,
    #[arg(long, default_value = "4")]
    constant: String,
    /// Use the blocks as given instead of normalizing them.
    #[arg(long)]
    raw: bool,
}

#[derive(Subcommand, Debug)]
pub enum SzlenkCmd {
    /// Branches of the canonical tree inside {1..n}.
    Branches {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "1")]
        rho: String,
    },
    /// Branch identity and ρ lower bound in X_α^p.
    Verify {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "1")]
        rho: String,
    },
    /// Least i with i^{1-1/p} > 80/ρ.
    Threshold {
        #[arg(long)]
        rho: String,
        #[arg(long)]
        p: String,
    },
    /// Mass and norm of the averages over a maximal 3-growth set.
    Witness {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        p: String,
        #[arg(long)]
        i1: u64,
        #[arg(long, default_value_t = 64)]
        max_set_len: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Every criterion, aggregated into one summary report.
    All {
        /// Run the suite a second time and compare digests.
        #[arg(long)]
        repeat: bool,
        /// Omit runtimes so the output is byte-stable.
        #[arg(long)]
        canonical: bool,
    },
}

/// `@path` reads the file, anything else is taken literally.
fn read_arg(text: &str) -> anyhow::Result<String> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(text.to_string()),
    }
}

fn ordinal(text: &str, cfg: &Config) -> anyhow::Result<Ordinal> {
    let a: Ordinal = text.parse()?;
    cfg.check_alpha(&a)?;
    Ok(a)
}

fn handle(alpha: Ordinal, cfg: &Config) -> FamilyHandle {
    FamilyHandle::with_probe_window(alpha, cfg.probe_window)
}

fn vector(text: &str) -> anyhow::Result<RationalVector> {
    Ok(RationalVector::parse(&read_arg(text)?)?)
}

fn exponent(text: Option<&str>, what: &str) -> anyhow::Result<Exponent> {
    match text {
        Some(t) => Ok(Exponent::parse(t)?),
        None => bail!("{what} is required"),
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render_report(r: &CheckReport) -> String {
    let mut s = format!("{}: {}\n", r.check_name, r.status.as_str());
    for (k, v) in &r.parameters {
        let _ = writeln!(s, "  {k} = {}", render_value(v));
    }
    for (l, v) in &r.observed {
        let _ = writeln!(s, "  {l}: {}", render_value(v));
    }
    for (l, v) in &r.witnesses {
        let _ = writeln!(s, "  witness {l}: {v}");
    }
    for n in &r.notes {
        let _ = writeln!(s, "  note: {n}");
    }
    s
}

fn from_report(r: CheckReport) -> Outcome {
    Outcome { text: render_report(&r), failed: r.status == Status::Fail, json: r.to_json() }
}

fn render_vector(x: &RationalVector) -> String {
    let parts: Vec<String> = x.iter().map(|(i, q)| format!("{i}: {}", format_rational(q))).collect();
    format!("{{{}}}", parts.join(", "))
}

fn norm_outcome(spec: &str, x: &RationalVector, r: NormResult) -> Outcome {
    let parts: Vec<String> = r.witness.iter().map(|b| FiniteSet::new(b.clone()).map(|e| e.to_string()).unwrap_or_default()).collect();
    Outcome {
        text: format!("{}\nwitness: {}\n", r.value.describe(), parts.join(" ")),
        json: json!({ "norm": spec, "x": x.to_json(), "value": r.value.to_json(), "witness": r.witness }),
        failed: false,
    }
}

pub fn run(cmd: &Command, cfg: &Config) -> anyhow::Result<Outcome> {
    let ctx = cfg.norm_context();
    match cmd {
        Command::Schreier(SchreierCmd::Check { alpha, set }) => {
            let a = ordinal(alpha, cfg)?;
            let e: FiniteSet = set.parse()?;
            let member = handle(a.clone(), cfg).is_member(&e);
            Ok(Outcome {
                text: format!("{member}\n"),
                json: json!({ "alpha": a.to_string(), "set": e.elements(), "member": member }),
                failed: false,
            })
        }
        Command::Schreier(SchreierCmd::Enumerate { alpha, n }) => {
            let a = ordinal(alpha, cfg)?;
            let sets = handle(a.clone(), cfg).enumerate(*n, cfg.enumeration_ceiling)?;
            let mut text = String::new();
            for e in &sets {
                let _ = writeln!(text, "{e}");
            }
            let list: Vec<&[u64]> = sets.iter().map(FiniteSet::elements).collect();
            Ok(Outcome { text, json: json!({ "alpha": a.to_string(), "n": n, "count": sets.len(), "sets": list }), failed: false })
        }
        Command::Schreier(SchreierCmd::Audit { alpha, n }) => {
            let a = ordinal(alpha, cfg)?;
            Ok(from_report(audit(&handle(a, cfg), *n, cfg.enumeration_ceiling)?))
        }
        Command::Averages(AveragesCmd::Generate { alpha, stream, n }) => {
            let a = ordinal(alpha, cfg)?;
            let prefix = generate(&a, &stream.build()?, *n, cfg.entry_budget)?;
            let mut text = String::new();
            for (k, x) in prefix.vectors.iter().enumerate() {
                let _ = writeln!(text, "x_{} = {}", k + 1, render_vector(x));
            }
            let _ = writeln!(text, "stream elements used: {}", prefix.consumed);
            Ok(Outcome { text, json: prefix.to_json(), failed: false })
        }
        Command::Averages(AveragesCmd::MassBound { alpha, stream, n_sum, truncation }) => {
            let a = ordinal(alpha, cfg)?;
            let s = stream.build()?.with_triple_growth()?;
            let prefix = generate(&a, &s, *n_sum, cfg.entry_budget)?;
            let t = truncation.unwrap_or_else(|| prefix.sum(*n_sum).max_supp());
            Ok(from_report(mass_bound_check(&prefix, *n_sum, t, cfg.support_ceiling)?))
        }
        Command::Norm(NormCmd::Schreier { alpha, vec }) => {
            let spec = NormSpec::Schreier(ordinal(alpha, cfg)?);
            let x = vector(vec)?;
            let r = spec.evaluate(&x, &ctx)?;
            Ok(norm_outcome(&spec.describe(), &x, r))
        }
        Command::Norm(NormCmd::Baernstein { alpha, p, vec }) => {
            let spec = NormSpec::Baernstein(ordinal(alpha, cfg)?, Exponent::parse(p)?);
            let x = vector(vec)?;
            let r = spec.evaluate(&x, &ctx)?;
            Ok(norm_outcome(&spec.describe(), &x, r))
        }
        Command::Norm(NormCmd::Composite { inner, alpha, p, outer, outer_p, outer_alpha, vec }) => {
            let need_alpha = |a: &Option<String>, what: &str| -> anyhow::Result<Ordinal> {
                match a {
                    Some(t) => ordinal(t, cfg),
                    None => bail!("{what} is required"),
                }
            };
            let inner = match inner {
                InnerKind::Schreier => NormSpec::Schreier(need_alpha(alpha, "--alpha")?),
                InnerKind::Baernstein => NormSpec::Baernstein(need_alpha(alpha, "--alpha")?, exponent(p.as_deref(), "--p")?),
                InnerKind::Lp => NormSpec::Lp(exponent(p.as_deref(), "--p")?),
            };
            let (outer, outer_desc) = match outer {
                OuterKind::Lp => {
                    let q = exponent(outer_p.as_deref(), "--outer-p")?;
                    let d = format!("lp(p={q})");
                    (Outer::Lp(q), d)
                }
                OuterKind::Schreier => {
                    let b = need_alpha(outer_alpha, "--outer-alpha")?;
                    let d = format!("schreier(alpha={b})");
                    (Outer::Schreier(b), d)
                }
            };
            let x = vector(vec)?;
            let r = composite_norm(&inner, &outer, &x, &ctx)?;
            Ok(norm_outcome(&format!("composite(inner={}, outer={outer_desc})", inner.describe()), &x, r))
        }
        Command::Dominate(d) => {
            let spec = NormSpec::Baernstein(ordinal(&d.alpha, cfg)?, Exponent::parse(&d.p)?);
            let raw: Value = serde_json::from_str(&read_arg(&d.blocks)?).context("--blocks must be a JSON array of vectors")?;
            let Value::Array(items) = raw else { bail!("--blocks must be a JSON array of vectors") };
            let blocks = BlockSequence::new(items.iter().map(RationalVector::from_json).collect::<Result<Vec<_>, _>>()?)?;
            let lower = match &d.lower {
                Some(t) => t.parse::<FiniteSet>()?.into_vec(),
                None => blocks.minima(),
            };
            let c: Rational = parse_rational(&d.constant)?;
            let problem = if d.raw {
                DominationProblem::new(blocks, spec.clone(), lower, spec)?
            } else {
                DominationProblem::normalized(blocks, spec.clone(), lower, spec, &ctx)?
            };
            let out = check_domination(&problem, &c, &cfg.families(), &ctx)?;
            Ok(from_report(out.report))
        }
        Command::Szlenk(SzlenkCmd::Branches { alpha, n, rho }) => {
            let cert = TreeCertificate::new(ordinal(alpha, cfg)?, parse_rational(rho)?, *n)?;
            let branches = enumerate_branches(&cert, cfg.enumeration_ceiling)?;
            let mut text = String::new();
            for b in &branches {
                let chain: Vec<String> = b.iter().map(FiniteSet::to_string).collect();
                let _ = writeln!(text, "{}", chain.join(" < "));
            }
            let list: Vec<Vec<&[u64]>> = branches.iter().map(|b| b.iter().map(FiniteSet::elements).collect()).collect();
            Ok(Outcome {
                text,
                json: json!({ "alpha": cert.alpha.to_string(), "truncation": n, "count": branches.len(), "branches": list }),
                failed: false,
            })
        }
        Command::Szlenk(SzlenkCmd::Verify { alpha, p, n, rho }) => {
            let a = ordinal(alpha, cfg)?;
            let cert = TreeCertificate::new(a.clone(), parse_rational(rho)?, *n)?;
            let norm = NormSpec::Baernstein(a, Exponent::parse(p)?);
            Ok(from_report(verify_branch_lower(&cert, &norm, &cfg.families(), cfg.enumeration_ceiling, &ctx)?))
        }
        Command::Szlenk(SzlenkCmd::Threshold { rho, p }) => {
            let rho = parse_rational(rho)?;
            let p = Exponent::parse(p)?;
            let t = szlenk_threshold(&rho, &p)?;
            let below = t.bits() > 1 && threshold_holds(&rho, &p, &(&t - 1u32))?;
            Ok(Outcome {
                text: format!("{t}\n"),
                json: json!({
                    "rho": format_rational(&rho), "p": p.to_string(), "threshold": t.to_string(),
                    "holds_at_threshold": threshold_holds(&rho, &p, &t)?, "holds_below": below,
                }),
                failed: false,
            })
        }
        Command::Szlenk(SzlenkCmd::Witness { alpha, p, i1, max_set_len }) => {
            let a = ordinal(alpha, cfg)?;
            Ok(from_report(szlenk_witness(&a, &Exponent::parse(p)?, *i1, *max_set_len, cfg.entry_budget, &ctx)?))
        }
        Command::Verify(VerifyCmd::All { repeat, canonical }) => {
            let run = run_all(&SuiteScale::default(), cfg, *repeat)?;
            let mut text = String::new();
            for (name, r) in CRITERIA.iter().zip(&run.reports) {
                let _ = writeln!(text, "{name}: {} ({} ms)", r.status.as_str(), r.runtime_ms);
                for (l, w) in &r.witnesses {
                    let _ = writeln!(text, "  {l}: {w}");
                }
            }
            let _ = writeln!(text, "overall: {}", run.summary.status.as_str());
            let json = if *canonical { run.canonical_json() } else { run.to_json() };
            Ok(Outcome { text, json, failed: !run.passed() })
        }
    }
}
