use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use beltrami_cli::{run, Command};

/// Beltrami symbol, recovery and field experiments.
#[derive(Parser)]
#[command(name = "beltrami", version)]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Run the command a configuration declares.
    Run { config: PathBuf },
    /// DN factorization and normal-to-tangential symbols.
    Symbols { config: PathBuf },
    /// Boundary jet recovery from a stored symbol.
    Recover { config: PathBuf },
    /// Forward pipeline and recovery, compared with the input jets.
    Roundtrip { config: PathBuf },
    /// Slab solver against the symbol expansion.
    Slab { config: PathBuf },
    /// Current-loop b-fields.
    Bfield { config: PathBuf },
    /// Embedding probe over a sphere-bundle grid.
    Embed { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (path, expect) = match cli.action {
        Action::Run { config } => (config, None),
        Action::Symbols { config } => (config, Some(Command::Symbols)),
        Action::Recover { config } => (config, Some(Command::Recover)),
        Action::Roundtrip { config } => (config, Some(Command::Roundtrip)),
        Action::Slab { config } => (config, Some(Command::Slab)),
        Action::Bfield { config } => (config, Some(Command::Bfield)),
        Action::Embed { config } => (config, Some(Command::Embed)),
    };
    let summary = run(&path, expect);
    for m in &summary.messages {
        eprintln!("{m}");
    }
    if let Some(w) = &summary.written {
        println!("{}", w.report.display());
    }
    ExitCode::from(summary.exit_code as u8)
}
