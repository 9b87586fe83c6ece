use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use index_lab::{config, run, ExperimentConfig};

#[derive(Parser)]
#[command(name = "index-lab", version, about = "Charge-transport indices on small tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides the one in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        verbose: bool,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// Print the JSON schema of the config.
    Schema,
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(line: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, out, threads, verbose } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = run(&cfg, threads, verbose)?;
            let dir = out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
            result.write(&dir, &cfg)?;
            for a in &result.assertions {
                if verbose || (a.hard && !a.passed) {
                    let size = a.size.map(|s| format!(" {}x{}", s[0], s[1])).unwrap_or_default();
                    let tag = if a.passed { "ok" } else if a.hard { "FAIL" } else { "warn" };
                    eprintln!("{tag}{size} {}: {:.3e} (<= {:.3e})", a.name, a.value, a.threshold);
                }
            }
            emit(&dir.join("summary.json").display().to_string())?;
            Ok(result.passed)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            cfg.validate()?;
            emit("ok")?;
            Ok(true)
        }
        Command::Schema => {
            emit(&serde_json::to_string_pretty(&config::schema())?)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
