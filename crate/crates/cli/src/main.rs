use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod output;

use commands::Rendered;
use config::RunConfig;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_NUMERIC });
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let written = match &outcome.rendered {
        Rendered::Table(t) => t.write(cfg.output, &mut out),
        Rendered::Lines(lines) => lines.iter().try_for_each(|l| writeln!(out, "{l}")),
    }
    .and_then(|_| out.flush());
    if let Err(e) = written {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    }
    if outcome.failed {
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}
