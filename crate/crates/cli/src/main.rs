//! `schreier-tool`: command-line front end for Schreier families, repeated
//! averages, the Baernstein-type norms and the verification suite.
//!
//! Exit codes: 0 pass, 1 fail, 2 usage or config error, 3 budget exceeded.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schreier_core::config::{load_config, Config, Overrides};
use schreier_core::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "schreier-tool", version, about = "Schreier families, repeated averages and Baernstein norms")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Print the JSON report instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// YAML or JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_enumeration: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_support: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_composite: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_coefficients: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub budget_entries: Option<u64>,
    #[arg(long, global = true, value_name = "RATIONAL")]
    pub tolerance: Option<String>,
    #[arg(long, global = true, value_name = "ORDINAL")]
    pub ordinal_ceiling: Option<String>,
}

impl GlobalOpts {
    fn overrides(&self) -> Overrides {
        Overrides {
            enumeration_ceiling: self.budget_enumeration,
            support_ceiling: self.budget_support,
            composite_ceiling: self.budget_composite,
            coefficient_budget: self.budget_coefficients,
            entry_budget: self.budget_entries,
            tolerance: self.tolerance.clone(),
            seed: self.seed,
            ordinal_ceiling: self.ordinal_ceiling.clone(),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Membership, enumeration and closure audits of S_α.
    #[command(subcommand)]
    Schreier(commands::SchreierCmd),
    /// Repeated averages x_n^{α,I}.
    #[command(subcommand)]
    Averages(commands::AveragesCmd),
    /// Norm evaluation.
    #[command(subcommand)]
    Norm(commands::NormCmd),
    /// Falsifier for an upper block estimate.
    Dominate(commands::DominateArgs),
    /// Canonical tree and threshold arithmetic.
    #[command(subcommand)]
    Szlenk(commands::SzlenkCmd),
    /// The verification suite.
    #[command(subcommand)]
    Verify(commands::VerifyCmd),
}

/// What a command produced: the JSON body and the text rendering.
pub struct Outcome {
    pub json: serde_json::Value,
    pub text: String,
    pub failed: bool,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Budget { .. }) => 3,
        Some(Error::Invariant(_)) => 1,
        _ => 2,
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    match e.downcast_ref::<Error>() {
        Some(Error::Budget { .. }) => "budget",
        Some(Error::Invariant(_)) => "invariant",
        Some(Error::Config { .. }) => "config",
        Some(Error::Parse(_)) | Some(Error::NonCanonical(_)) => "parse",
        _ => "usage",
    }
}

fn effective_config(g: &GlobalOpts) -> anyhow::Result<Config> {
    Ok(load_config(g.config.as_deref())?.apply(&g.overrides())?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json_mode = cli.global.json;
    let result = effective_config(&cli.global).and_then(|cfg| commands::run(&cli.command, &cfg).map(|o| (o, cfg)));
    match result {
        Ok((out, cfg)) => {
            if json_mode {
                let body = json!({ "config": cfg.to_json(), "result": out.json });
                println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(e) => {
            let code = exit_code(&e);
            if json_mode {
                let body = json!({ "error": { "kind": error_kind(&e), "message": format!("{e:#}"), "exit_code": code } });
                println!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            }
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
