use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use orlicz_ergodic::cli::{self, Command};
use orlicz_ergodic::config::Config;
use orlicz_ergodic::Error;

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Conjugate,
    Norms,
    Verify,
    Converge,
    Suite,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Conjugate => Command::Conjugate,
            Cmd::Norms => Command::Norms,
            Cmd::Verify => Command::Verify,
            Cmd::Converge => Command::Converge,
            Cmd::Suite => Command::Suite,
        }
    }
}

/// Orlicz-space norms, positive contractions and weighted ergodic averages
/// on finite bundles.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Config file; relative paths inside it resolve against its directory.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (mut cfg, base_dir) = match &args.config {
        Some(path) => match Config::read(path) {
            Ok(c) => (c, path.parent().map(Path::to_path_buf).unwrap_or_default()),
            Err(Error::Parse { line, message }) => {
                eprintln!("{}:{line}: {message}", path.display());
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => (Config::default(), PathBuf::from(".")),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let out = args.out.clone().unwrap_or_else(|| base_dir.join(&cfg.out));
    let command = Command::from(args.command);
    match cli::run_command(command, &cfg, &base_dir, &out) {
        Ok(outcome) => {
            if !args.quiet {
                for line in &outcome.report {
                    println!("{line}");
                }
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Error::Parse { line, message }) => {
            eprintln!("{command}: line {line} of {message}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{command}: {e}");
            ExitCode::from(1)
        }
    }
}
