//! Run configuration: budgets, tolerance, seed and ordinal ceiling, loaded
//! from YAML (or JSON) with command-line overrides applied on top.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::norms::{NormContext, SampleFamilies};
use crate::ordinal::Ordinal;
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Largest `N` for enumerations of `S_α ∩ P({1..N})`.
    pub enumeration_ceiling: u64,
    pub support_ceiling: usize,
    pub composite_ceiling: usize,
    /// Pseudorandom coefficient vectors per falsifier run.
    pub coefficient_budget: usize,
    /// Cap on coefficient entries produced by repeated averages.
    pub entry_budget: u64,
    pub tolerance: Rational,
    pub seed: u64,
    /// Ordinals must lie strictly below this.
    pub ordinal_ceiling: Ordinal,
    pub probe_window: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            enumeration_ceiling: 20,
            support_ceiling: 25,
            composite_ceiling: 20,
            coefficient_budget: 64,
            entry_budget: 1_000_000,
            tolerance: parse_rational("1e-12").expect("literal"),
            seed: 42,
            ordinal_ceiling: Ordinal::omega_pow_omega(),
            probe_window: 1,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    enumeration_ceiling: Option<u64>,
    support_ceiling: Option<usize>,
    composite_ceiling: Option<usize>,
    coefficient_budget: Option<usize>,
    entry_budget: Option<u64>,
    tolerance: Option<serde_yaml::Value>,
    seed: Option<u64>,
    ordinal_ceiling: Option<String>,
    probe_window: Option<u64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub enumeration_ceiling: Option<u64>,
    pub support_ceiling: Option<usize>,
    pub composite_ceiling: Option<usize>,
    pub coefficient_budget: Option<usize>,
    pub entry_budget: Option<u64>,
    pub tolerance: Option<String>,
    pub seed: Option<u64>,
    pub ordinal_ceiling: Option<String>,
}

fn config_err(path: &str, message: impl ToString) -> Error {
    Error::Config { path: path.into(), message: message.to_string() }
}

fn parse_tolerance(text: &str, path: &str) -> Result<Rational> {
    let q = parse_rational(text).map_err(|e| config_err(path, e))?;
    if q <= Rational::from_integer(0.into()) {
        return Err(config_err(path, "must be positive"));
    }
    Ok(q)
}

fn parse_ceiling(text: &str, path: &str) -> Result<Ordinal> {
    text.parse().map_err(|e| config_err(path, e))
}

fn positive<T: PartialOrd + Default + Copy>(v: T, path: &str) -> Result<T> {
    if v <= T::default() {
        return Err(config_err(path, "must be positive"));
    }
    Ok(v)
}

impl Config {
    /// Parses a YAML (or JSON) document; absent keys keep their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let raw: RawConfig = if text.trim().is_empty() {
            RawConfig::default()
        } else {
            serde_yaml::from_str(text).map_err(|e| {
                let path = e
                    .location()
                    .map(|l| format!("line {} column {}", l.line(), l.column()))
                    .unwrap_or_else(|| "<document>".into());
                config_err(&path, e)
            })?
        };
        let mut c = Config::default();
        if let Some(v) = raw.enumeration_ceiling {
            c.enumeration_ceiling = positive(v, "enumeration_ceiling")?;
        }
        if let Some(v) = raw.support_ceiling {
            c.support_ceiling = positive(v, "support_ceiling")?;
        }
        if let Some(v) = raw.composite_ceiling {
            c.composite_ceiling = positive(v, "composite_ceiling")?;
        }
        if let Some(v) = raw.coefficient_budget {
            c.coefficient_budget = v;
        }
        if let Some(v) = raw.entry_budget {
            c.entry_budget = positive(v, "entry_budget")?;
        }
        if let Some(v) = raw.tolerance {
            let text = match v {
                serde_yaml::Value::String(s) => s,
                serde_yaml::Value::Number(n) => n.to_string(),
                other => return Err(config_err("tolerance", format!("expected a number, got {other:?}"))),
            };
            c.tolerance = parse_tolerance(&text, "tolerance")?;
        }
        if let Some(v) = raw.seed {
            c.seed = v;
        }
        if let Some(v) = raw.ordinal_ceiling {
            c.ordinal_ceiling = parse_ceiling(&v, "ordinal_ceiling")?;
        }
        if let Some(v) = raw.probe_window {
            c.probe_window = positive(v, "probe_window")?;
        }
        Ok(c)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(v) = o.enumeration_ceiling {
            self.enumeration_ceiling = positive(v, "--budget-enumeration")?;
        }
        if let Some(v) = o.support_ceiling {
            self.support_ceiling = positive(v, "--budget-support")?;
        }
        if let Some(v) = o.composite_ceiling {
            self.composite_ceiling = positive(v, "--budget-composite")?;
        }
        if let Some(v) = o.coefficient_budget {
            self.coefficient_budget = v;
        }
        if let Some(v) = o.entry_budget {
            self.entry_budget = positive(v, "--budget-entries")?;
        }
        if let Some(t) = &o.tolerance {
            self.tolerance = parse_tolerance(t, "--tolerance")?;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(t) = &o.ordinal_ceiling {
            self.ordinal_ceiling = parse_ceiling(t, "--ordinal-ceiling")?;
        }
        Ok(self)
    }

    /// Rejects ordinals at or above the ceiling.
    pub fn check_alpha(&self, alpha: &Ordinal) -> Result<()> {
        if *alpha >= self.ordinal_ceiling {
            return Err(Error::Ceiling { alpha: alpha.to_string(), ceiling: self.ordinal_ceiling.to_string() });
        }
        Ok(())
    }

    pub fn norm_context(&self) -> NormContext {
        NormContext {
            support_ceiling: self.support_ceiling,
            composite_ceiling: self.composite_ceiling,
            tolerance: self.tolerance.clone(),
        }
    }

    pub fn families(&self) -> SampleFamilies {
        SampleFamilies { seed: self.seed, random: self.coefficient_budget, ..SampleFamilies::default() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "enumeration_ceiling": self.enumeration_ceiling,
            "support_ceiling": self.support_ceiling,
            "composite_ceiling": self.composite_ceiling,
            "coefficient_budget": self.coefficient_budget,
            "entry_budget": self.entry_budget,
            "tolerance": format_rational(&self.tolerance),
            "seed": self.seed,
            "ordinal_ceiling": self.ordinal_ceiling.to_string(),
            "probe_window": self.probe_window,
        })
    }
}

/// Loads `path`; a missing file yields the defaults.
pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) if !p.exists() => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(&p.display().to_string(), e))?;
            Config::from_text(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_file_gives_defaults() {
        let c = load_config(Some(Path::new("/nonexistent/schreier.yaml"))).unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.to_json()["tolerance"], "1/1000000000000");
    }

    #[test]
    fn yaml_and_json_documents() {
        let c = Config::from_text("tolerance: 1e-12\nseed: 7\nordinal_ceiling: w^3\n").unwrap();
        assert_eq!(c.tolerance, parse_rational("1/1000000000000").unwrap());
        assert_eq!(c.seed, 7);
        assert!(c.check_alpha(&"w^2*5".parse().unwrap()).is_ok());
        assert!(matches!(c.check_alpha(&"w^3".parse().unwrap()), Err(Error::Ceiling { .. })));
        let j = Config::from_text(r#"{"support_ceiling": 12, "tolerance": "1/1000"}"#).unwrap();
        assert_eq!(j.support_ceiling, 12);
    }

    #[test]
    fn errors_name_the_field() {
        for (doc, field) in [
            ("tolerance: -1", "tolerance"),
            ("tolerance: [1]", "tolerance"),
            ("support_ceiling: 0", "support_ceiling"),
            ("ordinal_ceiling: w^0", "ordinal_ceiling"),
        ] {
            match Config::from_text(doc) {
                Err(Error::Config { path, .. }) => assert_eq!(path, field, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
        assert!(matches!(Config::from_text("bogus: 1"), Err(Error::Config { .. })));
    }

    #[test]
    fn overrides_win() {
        let c = Config::from_text("seed: 1").unwrap();
        let c = c.apply(&Overrides { seed: Some(42), tolerance: Some("1/100".into()), ..Overrides::default() }).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.families().seed, 42);
        assert_eq!(c.norm_context().tolerance, parse_rational("0.01").unwrap());
    }
}
