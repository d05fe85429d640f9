//! `theta-norms` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 solver divergence.
//! Errors print one line `error[usage|data|divergence]: message` on stderr.

mod args;
mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use theta_norms::ErrorKind;

use args::{Cli, Command};
use commands::Failure;

fn exit(kind: ErrorKind) -> ExitCode {
    ExitCode::from(match kind {
        ErrorKind::Usage => 2,
        ErrorKind::Data => 3,
        ErrorKind::Divergence => 4,
    })
}

fn tag(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Usage => "usage",
        ErrorKind::Data => "data",
        ErrorKind::Divergence => "divergence",
    }
}

fn report(f: &Failure) -> ExitCode {
    let message = f.message.replace('\n', " ");
    eprintln!("error[{}]: {message}", tag(f.kind));
    exit(f.kind)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure {
                kind: ErrorKind::Usage,
                message: "--threads must be at least 1".into(),
            });
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                kind: ErrorKind::Usage,
                message: format!("cannot size thread pool: {e}"),
            })?;
    }
    match &cli.command {
        Command::Norm(a) => commands::norm_cmd(a, false),
        Command::Dual(a) => commands::norm_cmd(a, true),
        Command::Prox(a) => commands::prox_cmd(a),
        Command::SpectralNorm(a) => commands::spectral_cmd(a),
        Command::Complete(a) => commands::complete_cmd(a),
        Command::Mtl(a) => commands::mtl_cmd(a),
        Command::Bench(a) => commands::bench_cmd(a),
        Command::Synth(a) => commands::synth_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // First line carries the code; clap's usage text follows.
            let rendered = e.render().to_string();
            let mut lines = rendered.lines();
            let first = lines.next().unwrap_or("invalid arguments");
            eprintln!(
                "error[usage]: {}",
                first.strip_prefix("error: ").unwrap_or(first)
            );
            for line in lines {
                eprintln!("{line}");
            }
            return exit(ErrorKind::Usage);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(&f),
    }
}
