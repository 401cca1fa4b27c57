//! Command-line front end. Every subcommand emits a [`RunReport`].
//!
//! Exit codes: 0 when every finding passes, 1 when a check fails or a claim
//! is refuted, 2 on usage or input errors.

pub mod commands;
pub mod report;
pub mod reproduce;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::io::InputError;
use commands::Ctx;
pub use report::{Finding, RunReport, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "ipcopula", version, about = "Exact checks for p-boxes, imprecise copulas and credal products")]
pub struct Cli {
    /// JSON input file; `-` reads standard input.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Seed for every randomized battery.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Copula lattice density: nodes k/r for k = 0..r.
    #[arg(long, global = true, default_value_t = 21, value_parser = clap::value_parser!(u64).range(1..=400))]
    pub resolution: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a univariate or bivariate p-box.
    ValidatePbox,
    /// Check the copula axioms of a family or a tabulated copula.
    ValidateCopula {
        #[arg(long)]
        family: Option<String>,
        #[arg(long, requires = "family", allow_hyphen_values = true)]
        theta: Option<String>,
    },
    /// Check an imprecise copula `{"lower": ..., "upper": ...}`.
    ValidateIcopula,
    /// Join marginal p-boxes through a copula set or an imprecise copula.
    Combine,
    /// Frechet-Hoeffding bounds of two marginal p-boxes.
    NaturalExtension,
    /// Decide coherence of a bivariate p-box by linear programming.
    Coherence,
    /// Split the CDF of a pmf into marginals and a subcopula.
    Decompose,
    /// Test whether the envelopes of several pmfs factor through their marginals.
    Factorability {
        /// Also require the combining function to be a copula.
        #[arg(long)]
        copula: bool,
    },
    /// Strong product of two marginal lower previsions.
    StrongProduct {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Independent natural extension against the strong product.
    InatExtension {
        /// Random gambles drawn when the input lists none.
        #[arg(long, default_value_t = 20)]
        gambles: usize,
    },
    /// Search for a failure of the factorisation identities.
    FactorisingProbe {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Stochastic dominance and statistical preference for a joint pmf.
    Dominance,
    /// Rerun every published worked example from embedded fixtures.
    ReproducePaper,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ValidatePbox => "validate-pbox",
            Command::ValidateCopula { .. } => "validate-copula",
            Command::ValidateIcopula => "validate-icopula",
            Command::Combine => "combine",
            Command::NaturalExtension => "natural-extension",
            Command::Coherence => "coherence",
            Command::Decompose => "decompose",
            Command::Factorability { .. } => "factorability",
            Command::StrongProduct { .. } => "strong-product",
            Command::InatExtension { .. } => "inat-extension",
            Command::FactorisingProbe { .. } => "factorising-probe",
            Command::Dominance => "dominance",
            Command::ReproducePaper => "reproduce-paper",
        }
    }
}

/// What the binary prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn read_input(path: &Option<PathBuf>) -> Result<String, InputError> {
    let path = path
        .as_ref()
        .ok_or_else(|| InputError::new("", "this subcommand needs --input"))?;
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| InputError::new("", e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| InputError::new("", format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli) -> Result<RunReport, InputError> {
    let ctx = Ctx {
        seed: cli.seed,
        resolution: cli.resolution as usize,
    };
    let name = cli.command.name();
    let report = |inputs: &[&[u8]], findings| RunReport::new(name, ctx.seed, ctx.resolution, inputs, findings);
    if let Command::ReproducePaper = cli.command {
        return Ok(report(&reproduce::fixtures(), reproduce::run(ctx)));
    }
    if let Command::ValidateCopula { family: Some(f), theta } = &cli.command {
        let args = format!("{f}\0{}", theta.as_deref().unwrap_or(""));
        let findings = commands::validate_copula_cmd(ctx, Some(f), theta.as_deref(), None)?;
        return Ok(report(&[args.as_bytes()], findings));
    }
    let text = read_input(&cli.input)?;
    let findings = match &cli.command {
        Command::ValidatePbox => commands::validate_pbox(&text)?,
        Command::ValidateCopula { .. } => commands::validate_copula_cmd(ctx, None, None, Some(&text))?,
        Command::ValidateIcopula => commands::validate_icopula(ctx, &text)?,
        Command::Combine => commands::combine(ctx, &text)?,
        Command::NaturalExtension => commands::natural_extension_cmd(&text)?,
        Command::Coherence => commands::coherence(&text)?,
        Command::Decompose => commands::decompose(&text)?,
        Command::Factorability { copula } => commands::factorability(&text, *copula)?,
        Command::StrongProduct { trials } => commands::strong_product_cmd(ctx, &text, *trials)?,
        Command::InatExtension { gambles } => commands::inat_extension(ctx, &text, *gambles)?,
        Command::FactorisingProbe { trials } => commands::factorising_probe_cmd(ctx, &text, *trials)?,
        Command::Dominance => commands::dominance(&text)?,
        Command::ReproducePaper => unreachable!("handled above"),
    };
    Ok(report(&[text.as_bytes()], findings))
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            };
        }
    };
    match execute(&cli) {
        Ok(report) => Outcome {
            stdout: match cli.format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            },
            stderr: String::new(),
            code: report.exit,
        },
        Err(e) => {
            let diag = serde_json::json!({
                "command": cli.command.name(),
                "error": { "pointer": e.pointer, "message": e.message },
                "exit": 2,
            });
            Outcome {
                stdout: match cli.format {
                    Format::Json => serde_json::to_string_pretty(&diag).expect("serializes") + "\n",
                    Format::Text => String::new(),
                },
                stderr: format!("error: {e}\n"),
                code: 2,
            }
        }
    }
}
