use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::run::ResultTable;
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

pub const COLUMNS: [&str; 9] = [
    "experiment",
    "mode",
    "sweep_param",
    "sweep_value",
    "kappa",
    "tau_db",
    "metric",
    "value",
    "std_error",
];

/// Writes every row in table order.
pub fn write_results<W: Write>(table: &ResultTable, out: W, format: OutputFormat) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(COLUMNS)?;
            for row in &table.rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        OutputFormat::Jsonl => {
            let mut out = BufWriter::new(out);
            for row in &table.rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

pub fn emit_results(table: &ResultTable, path: &Path, format: OutputFormat) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let file = File::create(path).map_err(io)?;
    write_results(table, BufWriter::new(file), format).map_err(io)
}
