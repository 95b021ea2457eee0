//! `framelab` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or input
//! parse error, 3 numerical, shape or precondition error, 4 subset cap
//! exceeded, 5 file-system error.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use framelab::FrameError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Frame(FrameError),
    Io(String),
    ChecksFailed(usize),
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        CliError::Frame(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Frame(e) => match e {
                FrameError::Parse(_)
                | FrameError::NonFinite { .. }
                | FrameError::ImaginaryInRealFrame { .. }
                | FrameError::UnknownCheck(_) => 2,
                FrameError::CapExceeded { .. } => 4,
                _ => 3,
            },
            CliError::Io(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage: {s}"),
            CliError::Frame(e) => write!(f, "{e}"),
            CliError::Io(s) => write!(f, "{s}"),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn apply_subset_cap_env() -> CliResult<()> {
    if let Ok(raw) = std::env::var("FRAMELAB_SUBSET_CAP") {
        let cap: usize = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("FRAMELAB_SUBSET_CAP must be a positive integer, got {raw:?}")))?;
        if cap == 0 {
            return Err(CliError::Usage("FRAMELAB_SUBSET_CAP must be positive".into()));
        }
        framelab::frame::set_subset_cap(cap);
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    apply_subset_cap_env()?;
    let det = cli.deterministic;
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a, det),
        Command::Construct(a) => commands::construct(a, det),
        Command::Complement(a) => commands::complement(a, det),
        Command::Optimize(a) => commands::optimize(a, det),
        Command::Verify(a) => commands::verify(a, det),
        Command::Gradcheck(a) => commands::gradcheck(a, det),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(CliError::Usage(format!("cannot start {j} workers: {e}"))),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("framelab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
