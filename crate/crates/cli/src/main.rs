#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod error;
mod figure;
mod run;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use error::CliError;

/// Thread count for the internal parallel sweeps.
const THREADS_VAR: &str = "PACS_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("cannot size the thread pool: {e}")))
}

fn unknown_keys(given: &Value, parsed: &Value) -> Vec<String> {
    match (given, parsed) {
        (Value::Object(g), Value::Object(p)) => g.keys().filter(|k| !p.contains_key(*k)).cloned().collect(),
        _ => Vec::new(),
    }
}

fn load_config(path: &Path) -> Result<Command, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let cmd: Command =
        serde_json::from_value(raw.clone()).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let echoed = serde_json::to_value(&cmd).map_err(pacs_core::Error::from)?;
    let unknown = unknown_keys(&raw, &echoed);
    if !unknown.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: unknown keys {unknown:?}",
            path.display()
        )));
    }
    Ok(cmd)
}

fn real_main() -> Result<(), CliError> {
    let cli = Cli::parse();
    configure_threads()?;
    let cmd = match (cli.config, cli.command) {
        (Some(path), None) => load_config(&path)?,
        (None, Some(cmd)) => cmd,
        (Some(_), Some(_)) => {
            return Err(CliError::Validation(
                "give either --config or a subcommand, not both".into(),
            ))
        }
        (None, None) => return Err(CliError::Validation("no subcommand given (see --help)".into())),
    };
    run::execute(&cmd)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pacs: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
