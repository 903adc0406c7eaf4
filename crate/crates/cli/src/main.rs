mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ssql_core::rerank::{DEFAULT_ALPHA, DEFAULT_DELTA, DEFAULT_D_FLOOR};

#[derive(Parser)]
#[command(
    name = "ssql",
    version,
    about = "SQL <-> SSQL transpiler, join recovery and beam reranking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower SQL to SSQL (one query, or every entry of --corpus).
    Lower {
        #[command(flatten)]
        input: QueryInput,
        #[command(flatten)]
        config: CliConfig,
    },
    /// Lift SSQL back to SQL by restoring joins.
    Lift {
        #[command(flatten)]
        input: QueryInput,
        #[command(flatten)]
        config: CliConfig,
    },
    /// Lower and lift every corpus query and report how many come back intact.
    Roundtrip {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        config: CliConfig,
    },
    /// Re-rank labelled beams and compare top-1 accuracy under each ordering.
    Rerank {
        #[arg(long)]
        beams: PathBuf,
        #[command(flatten)]
        config: CliConfig,
    },
    /// Write soft training targets for labelled beams.
    Label {
        #[arg(long)]
        beams: PathBuf,
        /// Write targets here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        config: CliConfig,
    },
    /// Plan the joins connecting a set of tables and columns.
    Steiner {
        /// Comma-separated `table` or `table.column` names.
        #[arg(long, value_delimiter = ',', required = true)]
        terminals: Vec<String>,
        #[command(flatten)]
        config: CliConfig,
    },
    /// Print the effective configuration.
    Config {
        #[command(flatten)]
        config: CliConfig,
    },
}

#[derive(Args)]
struct QueryInput {
    /// Query text; read from stdin when absent and --corpus is not given.
    text: Option<String>,
    /// Process every entry of a JSONL or JSON-array corpus.
    #[arg(long, conflicts_with = "text")]
    corpus: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CliConfig {
    /// Spider-style tables.json.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    db_id: Option<String>,
    /// Weight of the generator probability in the combined score.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Soft target of a correct top beam.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_D_FLOOR)]
    d_floor: f64,
    /// Compare literals as placeholders when matching queries.
    #[arg(long)]
    ignore_values: bool,
    /// `baseline`, `oracle` (uses the beam labels) or a shell command
    /// speaking the line protocol.
    #[arg(long, default_value = "baseline")]
    scorer: String,
    /// Emit machine-readable JSON.
    #[arg(long)]
    #[serde(skip)]
    json: bool,
}

/// Bad invocation or input shape, as opposed to a failure in the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
