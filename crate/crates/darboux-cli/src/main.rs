mod args;
mod commands;
mod report;
mod selftest;

use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;

use args::{Cli, Command};
use commands::Outcome;
use darboux_embed::errata::errata_report;
use darboux_embed::mesh::SurfaceMesh;
use darboux_embed::par::Exec;
use report::{write_json, write_mesh, CommandEcho, Report, Timing, SCHEMA_VERSION};

const THREADS_VAR: &str = "DARBOUX_EMBED_THREADS";

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn name_of(c: &Command) -> &'static str {
    match c {
        Command::Catalog(_) => "catalog",
        Command::Check(_) => "check",
        Command::Embed(_) => "embed",
        Command::Cauchy(_) => "cauchy",
        Command::Revolve(_) => "revolve",
        Command::Selftest(_) => "selftest",
    }
}

/// Returns whether every check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads()?;
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let start = Instant::now();
    let name = name_of(&cli.command);
    let (mesh_path, report_path) = match &cli.command {
        Command::Catalog(a) => {
            commands::catalog_cmd(a)?;
            return Ok(true);
        }
        Command::Check(a) => (None, a.out.clone()),
        Command::Embed(a) => (a.out.clone(), a.report.clone()),
        Command::Cauchy(a) => (a.out.clone(), a.report.clone()),
        Command::Revolve(a) => (a.out.clone(), a.report.clone()),
        Command::Selftest(a) => (None, a.report.clone()),
    };
    let ran: anyhow::Result<(Outcome, Option<SurfaceMesh>)> = match &cli.command {
        Command::Catalog(_) => unreachable!("handled above"),
        Command::Check(a) => commands::check_cmd(a, exec).map(|o| (o, None)),
        Command::Embed(a) => commands::embed_cmd(a, exec).map(|(o, m)| (o, Some(m))),
        Command::Cauchy(a) => commands::cauchy_cmd(a, exec).map(|(o, m)| (o, Some(m))),
        Command::Revolve(a) => commands::revolve_cmd(a, exec).map(|(o, m)| (o, Some(m))),
        Command::Selftest(a) => selftest::run(a).map(|o| (o, None)),
    };
    let (outcome, mesh) = match ran {
        Ok(r) => r,
        Err(e) => (commands::Outcome::failure(&e.downcast::<commands::Failed>()?), None),
    };

    let errata = errata_report();
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    let verdict = outcome.checks.iter().all(|c| c.pass);
    println!("verdict: {}", if verdict { "pass" } else { "fail" });

    if let (Some(m), Some(p)) = (&mesh, &mesh_path) {
        write_mesh(p, m)?;
    }
    if let Some(p) = report_path {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            command: CommandEcho {
                name,
                args: std::env::args().skip(1).collect(),
                exec: match exec {
                    Exec::Sequential => "sequential",
                    Exec::Parallel => "parallel",
                },
            },
            tolerances: outcome.tolerances,
            verdict,
            checks: outcome.checks,
            result: outcome.result,
            errata,
            timing: Timing {
                seconds: start.elapsed().as_secs_f64(),
            },
        };
        write_json(&p, &report)?;
    }
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
