use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use spectral_topos::scenario::{self, CheckKind, Command, RunOptions, Status};
use spectral_topos::spectrum::DEFAULT_SEARCH_BUDGET;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Contexts,
    Daseinise,
    Evolve,
    Check,
    Ks,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Check {
    Compat,
    Covariance,
    Axioms,
    FlowIdentity,
}

/// Spectral presheaf computations on scenario files.
#[derive(Debug, Parser)]
#[command(name = "spectral-topos", version)]
struct Args {
    command: Cmd,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for CSV, DOT and report files; tables go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "SPECTRAL_TOPOS_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Node budget for the global-section search.
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Check::Compat)]
    check: Check,
    /// Restrict to one named proposition.
    #[arg(long)]
    proposition: Option<String>,
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(tmp, dir.join(name))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Contexts => Command::Contexts,
        Cmd::Daseinise => Command::Daseinise,
        Cmd::Evolve => Command::Evolve,
        Cmd::Check => Command::Check,
        Cmd::Ks => Command::Ks,
    };
    let check = match args.check {
        Check::Compat => CheckKind::Compat,
        Check::Covariance => CheckKind::Covariance,
        Check::Axioms => CheckKind::Axioms,
        Check::FlowIdentity => CheckKind::FlowIdentity,
    };
    if !(args.tol >= 0.0 && args.tol.is_finite()) {
        eprintln!("error: --tol must be a finite non-negative number");
        return ExitCode::from(Status::InputError.code() as u8);
    }
    let text = match fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(Status::InputError.code() as u8);
        }
    };
    let opts = RunOptions { tol: args.tol, budget: args.budget, check, proposition: args.proposition };
    let output = match scenario::run(command, &text, &opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(Status::InputError.code() as u8);
        }
    };

    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(output.stdout.as_bytes());
    match &args.out {
        Some(dir) => {
            let written = fs::create_dir_all(dir).and_then(|_| {
                for f in &output.files {
                    write_atomic(dir, &f.name, &f.contents)?;
                }
                write_atomic(dir, "report.json", &output.report.to_json())
            });
            if let Err(e) = written {
                eprintln!("error: writing to {}: {e}", dir.display());
                return ExitCode::from(Status::InputError.code() as u8);
            }
        }
        None => {
            for f in &output.files {
                let _ = writeln!(stdout, "# {}", f.name);
                let _ = stdout.write_all(f.contents.as_bytes());
            }
        }
    }
    ExitCode::from(output.status.code() as u8)
}
