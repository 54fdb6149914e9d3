//! `lsi` command-line front end.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage or configuration
//! error, 3 numerical budget exceeded (partial results are still written and
//! flagged). `LSI_THREADS` sets the worker-thread count.

mod args;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, CliCommand, Estimator, Format};
pub use commands::{execute, growth_fit, GrowthFit, HOLD_TOL};
pub use config::{parse_grid, read_config, resolve, Command, FamilySpec, RunConfig, Spacing};
pub use output::{format_f64, render, Cell, Outcome};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

fn configure_threads() {
    if let Some(n) = std::env::var("LSI_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `argv`, runs the command and writes its output. Returns the process
/// exit code; diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();

    let cfg = match &cli.command {
        CliCommand::Replay(r) => read_config(&r.file).map(|mut c| {
            if let Some(f) = cli.format {
                c.format = f;
            }
            c
        }),
        cmd => resolve(cmd, cli.format.unwrap_or(Format::Json)).map(|c| c.expect("not a replay")),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("lsi: {e}");
            return EXIT_USAGE;
        }
    };

    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("lsi {}: {e}", cfg.name());
            return if matches!(e, Error::InvalidArgument(_)) { EXIT_USAGE } else { EXIT_FAILURE };
        }
    };
    let written = render(&cfg, &outcome).and_then(|bytes| match &cli.out {
        Some(path) => std::fs::write(path, bytes).map_err(Error::from),
        None => std::io::stdout().lock().write_all(&bytes).map_err(Error::from),
    });
    if let Err(e) = written {
        eprintln!("lsi: cannot write output: {e}");
        return EXIT_FAILURE;
    }
    if outcome.partial {
        eprintln!("lsi {}: numerical budget exceeded; results flagged as partial", cfg.name());
        return EXIT_BUDGET;
    }
    EXIT_OK
}
