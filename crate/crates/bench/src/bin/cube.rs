use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cube_core::query::execute;
use cube_core::{CubeError, ErrorDocument};

/// Runs cube query documents against a schema and fact table.
#[derive(Parser)]
#[command(name = "cube", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a query document and write the result (or error) document.
    Query {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        facts: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<Vec<u8>, Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        let err = CubeError::Query(format!("cannot read {}: {e}", path.display()));
        ErrorDocument::from(&err).to_json()
    })
}

fn main() -> ExitCode {
    let Command::Query { schema, facts, query, out } = Cli::parse().command;
    let result = (|| execute(&read(&schema)?, &read(&facts)?, &read(&query)?))();
    let (bytes, code) = match result {
        Ok(b) => (b, ExitCode::SUCCESS),
        Err(b) => (b, ExitCode::FAILURE),
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    code
}
