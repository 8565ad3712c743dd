use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

mod args;
mod commands;
mod config;
mod error;
mod range;
mod table;

use args::{Cli, Command, CommandArgs, OutputArgs};
use commands::Outcome;
use config::{manifest_path, RunManifest};
use error::{CliError, Result};

/// Exit status for `validate` when any class disagrees with the simulation.
const EXIT_FLAGGED: u8 = 1;
const EXIT_UNVERIFIED: u8 = 4;

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("PNR_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.trim().parse().map_err(|_| CliError::usage(format!("PNR_THREADS must be a count, got `{value}`")))?;
    if threads > 0 {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn emit<C: CommandArgs + Serialize>(args: &C, outcome: &Outcome) -> Result<u8> {
    let output = args.output();
    let format = output.format();
    let body = outcome.table.encode(format)?;
    match &output.out {
        Some(path) => fs::write(path, &body).map_err(|source| CliError::Io { path: path.clone(), source })?,
        None => std::io::stdout()
            .write_all(&body)
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    let manifest = RunManifest {
        tool: "pnrq",
        version: env!("CARGO_PKG_VERSION"),
        command: C::NAME,
        params: args,
        seeds: &outcome.seeds,
        timestamp: config::timestamp(),
        format,
        output: output.out.as_deref(),
        truncation_bounds: &outcome.truncation_bounds,
        truncation_verified: outcome.truncation_verified,
    };
    let path = manifest_path(output.out.as_deref(), output.manifest.as_deref(), C::NAME);
    config::write_manifest(&path, &manifest)?;

    if outcome.flagged {
        log::error!("Monte Carlo disagreement above the z threshold");
        return Ok(EXIT_FLAGGED);
    }
    if !outcome.truncation_verified {
        log::error!("some results could not certify their truncation; see the truncation_verified column");
        return Ok(EXIT_UNVERIFIED);
    }
    Ok(0)
}

fn execute<C, F>(args: C, run: F) -> Result<u8>
where
    C: CommandArgs,
    F: FnOnce(&mut C) -> Result<Outcome>,
{
    let mut args = config::merge(args)?;
    let outcome = run(&mut args)?;
    emit(&args, &outcome)
}

fn rerun_as<C, F>(params: serde_json::Map<String, serde_json::Value>, source: &std::path::Path, output: OutputArgs, run: F) -> Result<u8>
where
    C: CommandArgs,
    F: FnOnce(&mut C) -> Result<Outcome>,
{
    let mut args: C = config::decode_params(params, source)?;
    *args.output_mut() = output;
    let outcome = run(&mut args)?;
    emit(&args, &outcome)
}

fn rerun(a: args::RerunArgs) -> Result<u8> {
    let source = a.manifest_in;
    let (command, params, format) = config::read_manifest(&source)?;
    let mut output = OutputArgs { format, ..Default::default() };
    output.overlay(&a.output);
    match command.as_str() {
        "quality" => rerun_as(params, &source, output, commands::quality),
        "curve" => rerun_as(params, &source, output, commands::curve),
        "threshold" => rerun_as(params, &source, output, commands::threshold),
        "scaling" => rerun_as(params, &source, output, commands::scaling),
        "dark-sweep" => rerun_as(params, &source, output, commands::dark),
        "loop" => rerun_as(params, &source, output, commands::looped),
        "validate" => rerun_as(params, &source, output, commands::validate),
        other => Err(CliError::usage(format!("{} records unknown command `{other}`", source.display()))),
    }
}

fn dispatch(command: Command) -> Result<u8> {
    configure_threads()?;
    match command {
        Command::Quality(a) => execute(a, commands::quality),
        Command::Curve(a) => execute(a, commands::curve),
        Command::Threshold(a) => execute(a, commands::threshold),
        Command::Scaling(a) => execute(a, commands::scaling),
        Command::DarkSweep(a) => execute(a, commands::dark),
        Command::Loop(a) => execute(a, commands::looped),
        Command::Validate(a) => execute(a, commands::validate),
        Command::Rerun(a) => rerun(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
