//! Command-line front end for `gibbsent`.
//!
//! An invocation resolves one [`RunConfig`] from a JSON file and flags, runs
//! exactly one command inside a dedicated thread pool, and emits the result:
//! a JSON document on stdout, plus the `--out` file when given. CSV outputs
//! get a `<file>.config.json` sidecar holding the resolved configuration;
//! JSON outputs embed it under `config`.
//!
//! Exit statuses: 0 success, 1 I/O failure or failed self-check, 2 usage or
//! parse error, 3 enumeration budget exceeded, 4 undecided verdict (the
//! report is still written).

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;
mod selftest;

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

pub use crate::args::Cli;
pub use crate::commands::Report;
pub use crate::config::{CommandName, RunConfig};
pub use crate::error::{CliError, Result};
use crate::output::{record_table, sidecar_path, write_atomic, Cell, Table};

/// Resolves the configuration and runs the command in a pool of the
/// requested size.
pub fn execute(cli: &Cli) -> Result<(RunConfig, Report)> {
    let config = config::resolve(cli.config.as_deref(), cli.to_flags()?)?;
    let report = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Failed(format!("cannot start {t} worker threads: {e}")))?
            .install(|| commands::run(&config))?,
        None => commands::run(&config)?,
    };
    Ok((config, report))
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => Value::from(*x),
        Cell::Int(i) => Value::from(*i),
        Cell::UInt(u) => Value::from(*u),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Bool(b) => Value::from(*b),
        Cell::Empty => Value::Null,
    }
}

fn rows_json(t: &Table) -> Value {
    t.rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = t.header.iter().cloned().zip(row.iter().map(cell_json)).collect();
            Value::Object(obj)
        })
        .collect()
}

/// The JSON document of a run: command, result fields, rows, resolved config.
pub fn document(config: &RunConfig, report: &Report) -> Value {
    let mut doc = Map::new();
    doc.insert("command".into(), Value::from(config.command.as_str()));
    doc.extend(report.fields.clone());
    if let Some(t) = &report.table {
        doc.insert("rows".into(), rows_json(t));
    }
    doc.insert("config".into(), config.to_value());
    Value::Object(doc)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes the artifacts of a run and returns the text destined for stdout.
pub fn emit(config: &RunConfig, report: &Report) -> Result<String> {
    let doc = document(config, report);
    let file_doc = report.document.as_ref().unwrap_or(&doc);
    if let Some(path) = &config.out {
        if is_csv(path) {
            let table = report.table.clone().unwrap_or_else(|| record_table(&report.fields));
            write_atomic(path, table.to_csv().as_bytes())?;
            write_atomic(&sidecar_path(path), pretty(&config.to_value()).as_bytes())?;
        } else {
            write_atomic(path, pretty(file_doc).as_bytes())?;
            if report.document.is_some() {
                write_atomic(&sidecar_path(path), pretty(&config.to_value()).as_bytes())?;
            }
        }
    }
    Ok(match (&report.lines, &config.out) {
        (Some(lines), _) => lines.iter().map(|l| format!("{l}\n")).collect(),
        (None, None) => pretty(file_doc),
        (None, Some(_)) => pretty(&doc),
    })
}

/// Full invocation: resolve, run, emit, and map the outcome to an exit status.
pub fn main_with(cli: &Cli) -> i32 {
    let outcome = execute(cli).and_then(|(config, report)| {
        let text = emit(&config, &report)?;
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|()| stdout.flush())
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            })?;
        if report.failed {
            Err(CliError::Failed("self-checks failed".into()))
        } else if report.undecided {
            Err(CliError::Undecided)
        } else {
            Ok(())
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gibbsent: {e}");
            e.exit_code()
        }
    }
}
