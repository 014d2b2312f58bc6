//! `ds2d` command line front end.

mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ds2d_core::io::{Command, ExperimentConfig};
use ds2d_core::Error;

#[derive(Parser)]
#[command(name = "ds2d", version, about = "Ground states, stability and multi-solitons of the generalized Davey-Stewartson equation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sharp Gagliardo-Nirenberg constant d_J and its optimizer.
    Dj(Overrides),
    /// Ground state at a frequency (`--omega`) or a mass (`--mass`).
    Groundstate(Overrides),
    /// Mass-frequency stability curve.
    Curve(Overrides),
    /// Split-step evolution of a soliton or a bump.
    Evolve(Overrides),
    /// Backward construction of a multi-soliton.
    Multisoliton(Overrides),
    /// Invariant suite with one PASS/FAIL line per check.
    Verify(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// `key = value` file; flags given after it override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `--key value` or `--key=value` pairs, keys as in the config file.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    flags: Vec<String>,
}

impl Sub {
    fn split(self) -> (Command, Overrides) {
        match self {
            Sub::Dj(o) => (Command::Dj, o),
            Sub::Groundstate(o) => (Command::GroundState, o),
            Sub::Curve(o) => (Command::Curve, o),
            Sub::Evolve(o) => (Command::Evolve, o),
            Sub::Multisoliton(o) => (Command::MultiSoliton, o),
            Sub::Verify(o) => (Command::Verify, o),
        }
    }
}

fn apply_flags(cfg: &mut ExperimentConfig, flags: &[String]) -> Result<(), Error> {
    let mut it = flags.iter();
    while let Some(f) = it.next() {
        let key = f
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected a --key flag, found {f:?}")))?;
        if let Some((k, v)) = key.split_once('=') {
            cfg.set(k, v)?;
        } else {
            let v = it.next().ok_or_else(|| Error::Config(format!("flag --{key} needs a value")))?;
            cfg.set(key, v)?;
        }
    }
    Ok(())
}

fn load(command: Command, o: &Overrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &o.config {
        Some(p) => ExperimentConfig::load(command, p)?,
        None => ExperimentConfig::new(command),
    };
    apply_flags(&mut cfg, &o.flags)?;
    Ok(cfg)
}

fn report(kind: &str, message: &str, code: u8) -> ExitCode {
    let rec = serde_json::json!({ "error": kind, "message": message, "exit": code });
    eprintln!("{rec}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report("usage", e.to_string().trim(), 1),
    };
    let (command, o) = cli.command.split();
    let result = load(command, &o).and_then(run::dispatch);
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => report("check_failed", "one or more checks failed", 2),
        Err(e) => report(e.kind(), &e.to_string(), if e.is_validation() { 1 } else { 2 }),
    }
}
