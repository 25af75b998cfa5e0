use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conjint::commands::{self, Outcome, RunOptions, EXIT_PARSE};
use conjint::format::ToleranceOverrides;

#[derive(Parser)]
#[command(name = "conjint", version, about = "Conjugation interpolation for normal matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Eigenvalue clustering radius.
    #[arg(long)]
    cluster: Option<f64>,
    /// Seed for randomized subroutines.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check structural preconditions of a problem file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decide a symmetric or skew problem and write a certificate.
    Interpolate {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check a certificate against its problem.
    Verify {
        problem: PathBuf,
        certificate: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a ufield or sufield problem and write the field.
    Field {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether a subspace is hyperinvariant.
    Hyperinvariant {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            tolerance: ToleranceOverrides {
                residual: self.tol,
                cluster: self.cluster,
                rank: None,
            },
            seed: self.seed,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, ExitCode> {
    fs::read(path).map_err(|e| {
        eprintln!("cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn finish(outcome: Outcome, out: Option<&Path>) -> ExitCode {
    print!("{}", outcome.report);
    if let (Some(path), Some(bytes)) = (out, &outcome.certificate) {
        if let Err(e) = write_atomic(path, bytes) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(commands::EXIT_INVARIANT);
        }
    }
    ExitCode::from(outcome.code)
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    Ok(match cli.command {
        Command::Check { file, common } => finish(commands::cmd_check(&read(&file)?, &common.options()), None),
        Command::Interpolate { file, out, common } => finish(
            commands::cmd_interpolate(&read(&file)?, &common.options()),
            out.as_deref(),
        ),
        Command::Verify {
            problem,
            certificate,
            common,
        } => finish(
            commands::cmd_verify(&read(&problem)?, &read(&certificate)?, &common.options()),
            None,
        ),
        Command::Field { file, out, common } => {
            finish(commands::cmd_field(&read(&file)?, &common.options()), out.as_deref())
        }
        Command::Hyperinvariant { file, out, common } => finish(
            commands::cmd_hyperinvariant(&read(&file)?, &common.options()),
            out.as_deref(),
        ),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    run(cli).unwrap_or_else(|code| code)
}
