//! `fdlab`: runs the verification suites and writes JSON reports.
//!
//! Exit codes: 0 when every asserted implication passes, 1 when a
//! verification fails (the report says which), 2 on malformed input or a
//! failed precondition.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fourier_decay::Error;
use serde_json::json;

use crate::commands::{Outcome, Which};
use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "fdlab",
    version,
    about = "Fourier-decay verification laboratory"
)]
struct Cli {
    /// JSON config mirroring the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Majorant checks (`∫_0^t φ(u)/u du ≲ φ(t)`, optionally `Ω_β`).
    Majorant {
        #[command(subcommand)]
        action: MajorantAction,
    },
    /// Admissibility of a multiplier family.
    Family {
        #[command(subcommand)]
        action: FamilyAction,
    },
    /// Lipschitz smoothness against shell decay of the transform.
    Titchmarsh {
        #[command(subcommand)]
        action: TitchmarshAction,
    },
    /// Besov smoothness against the spectral functional.
    Besov {
        #[command(subcommand)]
        action: BesovAction,
    },
    /// General monotone spectral profiles.
    Gm {
        #[command(subcommand)]
        action: GmAction,
    },
    /// Pointwise decay of a general monotone spectrum.
    RlBound,
    /// The tail condition without `Ω_{2β}`: a function that is not Lipschitz.
    Counterexample,
    /// Closed-form pairs and spectral fixtures.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum MajorantAction {
    Check,
}

#[derive(Subcommand)]
enum FamilyAction {
    Admit,
}

#[derive(Subcommand)]
enum TitchmarshAction {
    Forward,
    Backward,
    Iff,
}

#[derive(Subcommand)]
enum BesovAction {
    Run,
    /// Single and double spectral modes side by side.
    Spectral,
}

#[derive(Subcommand)]
enum GmAction {
    Check,
    Build,
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    /// Writes the space and Fourier profiles as CSV with JSON sidecars.
    Dump {
        name: String,
    },
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Majorant { .. } => "majorant check",
            Command::Family { .. } => "family admit",
            Command::Titchmarsh { action } => match action {
                TitchmarshAction::Forward => "titchmarsh forward",
                TitchmarshAction::Backward => "titchmarsh backward",
                TitchmarshAction::Iff => "titchmarsh iff",
            },
            Command::Besov { action } => match action {
                BesovAction::Run => "besov run",
                BesovAction::Spectral => "besov spectral",
            },
            Command::Gm { action } => match action {
                GmAction::Check => "gm check",
                GmAction::Build => "gm build",
            },
            Command::RlBound => "rl-bound",
            Command::Counterexample => "counterexample",
            Command::Catalog { action } => match action {
                CatalogAction::List => "catalog list",
                CatalogAction::Dump { .. } => "catalog dump",
            },
        }
    }
}

fn dispatch(command: &Command, cfg: &mut RunConfig) -> fourier_decay::Result<Outcome> {
    match command {
        Command::Majorant {
            action: MajorantAction::Check,
        } => commands::majorant_check(cfg),
        Command::Family {
            action: FamilyAction::Admit,
        } => commands::family_admit(cfg),
        Command::Titchmarsh { action } => {
            let which = match action {
                TitchmarshAction::Forward => Which::Forward,
                TitchmarshAction::Backward => Which::Backward,
                TitchmarshAction::Iff => Which::Iff,
            };
            commands::titchmarsh(cfg, which)
        }
        Command::Besov { action } => match action {
            BesovAction::Run => commands::besov_run(cfg),
            BesovAction::Spectral => commands::besov_spectral(cfg),
        },
        Command::Gm { action } => match action {
            GmAction::Check => commands::gm_check(cfg),
            GmAction::Build => commands::gm_build(cfg),
        },
        Command::RlBound => commands::rl_bound(cfg),
        Command::Counterexample => commands::counterexample(cfg),
        Command::Catalog { action } => match action {
            CatalogAction::List => commands::catalog_list(),
            CatalogAction::Dump { name } => commands::catalog_dump(cfg, name),
        },
    }
}

/// Configuration and precondition problems exit with 2; anything else the
/// numerics raise is a failed verification.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter { .. }
            | Error::Unknown { .. }
            | Error::Precondition { .. }
            | Error::OutOfDomain { .. }
            | Error::Io(_)
            | Error::Format(_)
    )
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::OutOfDomain { .. } => "out_of_domain",
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::NotMonotone { .. } => "not_monotone",
        Error::NonFinite { .. } => "non_finite",
        Error::Divergent { .. } => "divergent",
        Error::OscillatoryCancellation { .. } => "oscillatory_cancellation",
        Error::Precondition { .. } => "precondition",
        Error::Unknown { .. } => "unknown",
        Error::TruncationCap { .. } => "truncation_cap",
        Error::PanelCap { .. } => "panel_cap",
        Error::Calibration(_) => "calibration",
        Error::Io(_) => "io",
        Error::Format(_) => "format",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let label = cli.command.label();
    let mut cfg = match RunConfig::resolve(cli.config.as_deref(), &cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("fdlab: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = dispatch(&cli.command, &mut cfg);
    let (code, status, body) = match &outcome {
        Ok(o) => (
            u8::from(!o.pass),
            if o.pass { "pass" } else { "fail" },
            json!({ "pass": o.pass, "result": o.result }),
        ),
        Err(e) => (
            if is_input_error(e) { 2 } else { 1 },
            "error",
            json!({ "pass": false, "error": { "kind": error_kind(e), "message": e.to_string() } }),
        ),
    };
    let mut report = body;
    report["command"] = json!(label);
    report["config"] = serde_json::to_value(&cfg).unwrap_or_default();
    report["version"] = json!(env!("CARGO_PKG_VERSION"));

    if let (Some(dir), Ok(o)) = (&cfg.csv, &outcome) {
        if !matches!(cli.command, Command::Catalog { .. }) {
            match output::write_tables(dir, &o.result) {
                Ok(files) => report["tables"] = json!(files),
                Err(e) => eprintln!("fdlab: writing tables: {e}"),
            }
        }
    }
    let text = match output::render(report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("fdlab: {e}");
            return ExitCode::from(2);
        }
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("fdlab: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if let Err(e) = &outcome {
        eprintln!("fdlab: {label}: {e}");
    }
    eprintln!("fdlab: {label}: {status}");
    ExitCode::from(code)
}
