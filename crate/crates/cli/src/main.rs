mod args;
mod commands;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;
use shiftbound::{generate, Scenario};

use args::{Cli, Command};
use commands::execute;
use manifest::{manifest_path, seed_of, RunManifest};

/// Exit status for a checked inequality or comparison that failed.
const VIOLATION: u8 = 2;
/// Exit status for usage and configuration errors.
const CONFIG_ERROR: u8 = 1;

fn configure_workers() -> Result<usize> {
    let requested = match std::env::var("SHIFTBOUND_WORKERS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("SHIFTBOUND_WORKERS={v:?} is not a count"))?;
            if n == 0 {
                bail!("SHIFTBOUND_WORKERS must be positive");
            }
            Some(n)
        }
        Err(_) => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = requested {
        builder = builder.num_threads(n);
    }
    builder.build_global().context("starting worker pool")?;
    Ok(rayon::current_num_threads())
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(bytes).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn say(line: &str) -> Result<()> {
    emit(format!("{line}\n").as_bytes())
}

fn output_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Verify(a) => a.output.out.as_deref(),
        Command::Train(a) => a.output.out.as_deref(),
        Command::Constants(a) => a.output.out.as_deref(),
        Command::Axioms(a) => a.output.out.as_deref(),
        Command::Generate(a) => a.out.as_deref(),
        Command::CheckScenario(_) | Command::Replay(_) => None,
    }
}

fn run_document(cmd: Command, workers: usize) -> Result<u8> {
    let started = Instant::now();
    let outcome = execute(&cmd)?;
    match output_path(&cmd) {
        Some(out) => {
            fs::write(out, &outcome.body).with_context(|| format!("writing {}", out.display()))?;
            say(&outcome.summary)?;
            let manifest = RunManifest {
                command: cmd.name().to_string(),
                config: outcome.config.clone(),
                weights: outcome.weights,
                seed: seed_of(&cmd),
                version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: vec![std::path::absolute(out)?],
                workers,
                wall_clock_seconds: started.elapsed().as_secs_f64(),
                invocation: cmd.clone(),
            };
            let path = manifest_path(out);
            fs::write(&path, shiftbound::json::to_string_pretty(&manifest)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            emit(&outcome.body)?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(if outcome.pass { 0 } else { VIOLATION })
}

fn check_scenario(file: &PathBuf) -> Result<u8> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let stored: Scenario = serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    let fresh = generate(&stored.config)?;
    let (a, b) = (
        shiftbound::json::to_string(&stored)?,
        shiftbound::json::to_string(&fresh)?,
    );
    if a == b {
        say(&format!("{}: matches its regenerated scenario", file.display()))?;
        Ok(0)
    } else {
        say(&format!(
            "{}: DRIFT, regenerating from the embedded config gives a different scenario",
            file.display()
        ))?;
        Ok(VIOLATION)
    }
}

fn replay(path: &PathBuf) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let recorded_path = manifest.outputs.first().context("manifest lists no outputs")?;
    let recorded = fs::read(recorded_path).with_context(|| format!("reading {}", recorded_path.display()))?;
    let outcome = execute(&manifest.invocation)?;
    if outcome.body == recorded {
        say(&format!("{}: replay is byte-identical", recorded_path.display()))?;
        Ok(0)
    } else {
        say(&format!(
            "{}: replay DIFFERS from the recorded output",
            recorded_path.display()
        ))?;
        Ok(VIOLATION)
    }
}

fn run(cmd: Command) -> Result<u8> {
    let workers = configure_workers()?;
    match cmd {
        Command::CheckScenario(a) => check_scenario(&a.file),
        Command::Replay(a) => replay(&a.manifest),
        other => run_document(other, workers),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => CONFIG_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
