//! `locan`: command-line driver for the locan toolkit.

mod commands;
mod config;
mod error;
mod input;
mod report;

use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, JobConfig};
use error::CliError;
use input::{parse_envelope, Envelope, InvariantsPayload};
use report::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "locan", version, about = "Capped-precision p-adic period-ring computations")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the refinements of a filtered phi-module.
    Refine,
    /// Normal form of a phi-module over truncated entire series.
    NormalForm,
    /// Computations in the u-adjoined de Rham model.
    Uadj {
        #[command(subcommand)]
        which: UadjCommand,
    },
    /// Sen operator of an action matrix.
    Sen,
    /// Newton polygon and unit test of a truncated series.
    Newton,
    /// Kernel of the anticyclotomic operator in total degree at most N.
    Anticyclo {
        /// Total degree bound.
        n: usize,
    },
    /// Graded lattice attached to a filtered phi-module.
    Dtri,
}

#[derive(Subcommand, Debug)]
enum UadjCommand {
    /// The invariant section through a coefficient element.
    Section,
    /// Basis of the invariants.
    Invariants,
    /// Coefficient-growth analyticity test.
    AnalyticTest,
}

fn read_input(flags: &Flags) -> Result<String, CliError> {
    match &flags.input {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))
        }
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn with_payload<P: serde::de::DeserializeOwned>(
    flags: &Flags,
    run: impl FnOnce(&JobConfig, &P) -> Result<Report, CliError>,
) -> Result<Report, CliError> {
    let env: Envelope<P> = parse_envelope(&read_input(flags)?)?;
    let cfg = JobConfig::resolve(flags, &env.config)?;
    run(&cfg, &env.payload)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Refine => with_payload(flags, commands::refine),
        Command::NormalForm => with_payload(flags, commands::normal_form_cmd),
        Command::Uadj { which } => match which {
            UadjCommand::Section => with_payload(flags, commands::uadj_section),
            UadjCommand::AnalyticTest => with_payload(flags, commands::uadj_analytic),
            UadjCommand::Invariants => {
                if flags.input.is_some() {
                    with_payload(flags, commands::uadj_invariants)
                } else {
                    let cfg = JobConfig::resolve(flags, &Default::default())?;
                    commands::uadj_invariants(&cfg, &InvariantsPayload::default())
                }
            }
        },
        Command::Sen => with_payload(flags, commands::sen),
        Command::Newton => with_payload(flags, commands::newton),
        Command::Anticyclo { n } => {
            let cfg = JobConfig::resolve(flags, &Default::default())?;
            commands::anticyclo(&cfg, *n)
        }
        Command::Dtri => with_payload(flags, commands::dtri),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.flags.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|rep| emit(&cli, &rep.render(cli.format)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
