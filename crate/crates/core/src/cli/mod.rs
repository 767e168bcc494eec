//! The `tailrisk` command-line front end.
//!
//! Exit codes: 0 success, 1 failing selftest or output error, 2 usage and
//! parse errors, 3 domain and numerical errors. Nothing is written on a
//! nonzero exit.

pub mod commands;
pub mod config;
pub mod input;
pub mod output;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;
use serde_json::Value;

use crate::error::RiskError;
use commands::Output;
use config::{Cli, Format, RunConfig};
use output::{render_json, write_atomic, Obj, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub fn exit_code(e: &RiskError) -> i32 {
    match e {
        RiskError::Parse(_) | RiskError::Input(_) => EXIT_USAGE,
        _ => EXIT_DOMAIN,
    }
}

fn selftest(cfg: &RunConfig) -> Output {
    let checks = selftest::run(cfg.seed);
    let mut table = Table::new(&["property", "passed", "detail"]);
    let mut records = Vec::new();
    for c in &checks {
        table.push(vec![c.name.into(), c.passed.to_string(), c.detail.clone()]);
        records.push(Value::from(
            Obj::new()
                .set("property", c.name)
                .set("passed", c.passed)
                .set("detail", c.detail.as_str()),
        ));
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    Output {
        results: Obj::new()
            .set("passed", passed)
            .set("failed", checks.len() - passed)
            .set("checks", records)
            .into(),
        table,
        warnings: Vec::new(),
        failed: passed != checks.len(),
    }
}

/// Render the output of one command; `Ok((text, code))`.
pub fn execute(cfg: &RunConfig) -> Result<(String, i32), RiskError> {
    let start = Instant::now();
    if cfg.command == "sample" {
        return Ok((commands::sample_csv(cfg)?, EXIT_OK));
    }
    let out = match cfg.command {
        "measure" => commands::measure(cfg)?,
        "sweep" => commands::sweep(cfg)?,
        "allocate" => commands::allocate(cfg)?,
        "reinsure" => commands::reinsure(cfg)?,
        "portfolio" => commands::portfolio(cfg)?,
        "selftest" => selftest(cfg),
        other => return Err(RiskError::Internal(format!("unknown command {other}"))),
    };
    let code = if out.failed { EXIT_FAILED } else { EXIT_OK };
    let text = match cfg.format {
        Format::Csv => out
            .table
            .render()
            .map_err(|e| RiskError::Internal(format!("csv rendering failed: {e}")))?,
        Format::Json => {
            let wall = if cfg.timing {
                output::num(start.elapsed().as_secs_f64())
            } else {
                Value::Null
            };
            let envelope: Value = Obj::new()
                .set("tool", "tailrisk")
                .set("version", env!("CARGO_PKG_VERSION"))
                .set("command", cfg.command)
                .set("config", cfg.echo())
                .set("results", out.results)
                .set("warnings", out.warnings)
                .set("wall_time", wall)
                .into();
            render_json(&envelope)
        }
    };
    Ok((text, code))
}

/// Parse `args`, run, write the output, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = RunConfig::resolve(&cli.command).and_then(|cfg| execute(&cfg).map(|r| (cfg, r)));
    let (cfg, (text, code)) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.out {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_FAILED;
    }
    code
}
