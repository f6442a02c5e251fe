use std::fs;
use std::io::Write;
use std::path::Path;

use coherence_core::experiments::{ProportionReport, SweepRow};
use coherence_core::io::format_float;

use crate::Failure;

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Failure::new(crate::EXIT_PARSE, e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::new(crate::EXIT_PARSE, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

pub const SWEEP_HEADER: [&str; 8] = ["n", "k", "samples", "hits", "estimate", "ci_halfwidth", "exact", "seed"];

fn report_row(r: &ProportionReport) -> Vec<String> {
    vec![
        r.dim.to_string(),
        r.rank.to_string(),
        r.samples.to_string(),
        r.hits.to_string(),
        format_float(r.estimate),
        format_float(r.ci_halfwidth),
        r.exact.map(format_float).unwrap_or_default(),
        r.seed.to_string(),
    ]
}

/// Sweep CSV. Infeasible `(n, k)` pairs become rows with zero samples and
/// blank statistics; a warning for each goes to stderr, as do exclusion
/// counts and estimates that disagree with the exact value.
pub fn sweep_csv(rows: &[SweepRow], seed: u64) -> Result<String, Failure> {
    let mut table = Vec::with_capacity(rows.len());
    for row in rows {
        match row {
            SweepRow::Report(r) => {
                if r.excluded > 0 {
                    eprintln!(
                        "note: n = {}, k = {}: {} samples excluded (solver could not classify them)",
                        r.dim, r.rank, r.excluded
                    );
                }
                if r.flagged() {
                    eprintln!(
                        "warning: n = {}, k = {}: estimate {} is more than 5 half-widths from {}",
                        r.dim,
                        r.rank,
                        format_float(r.estimate),
                        format_float(r.exact.unwrap_or(f64::NAN))
                    );
                }
                table.push(report_row(r));
            }
            SweepRow::Skipped { dim, rank } => {
                eprintln!("warning: skipping n = {dim}, k = {rank}: rank exceeds dimension");
                table.push(vec![
                    dim.to_string(),
                    rank.to_string(),
                    "0".into(),
                    "0".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    seed.to_string(),
                ]);
            }
        }
    }
    csv_table(&SWEEP_HEADER, table)
}
