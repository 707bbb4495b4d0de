//! `monthly.csv`: one row per month, one column per component in registry
//! order, empty cells for absent values.

use std::path::Path;

use repoecg_core::{Component, Month, MonthlyRow};

use crate::error::{Error, Result};
use crate::ingest::dump::write_atomic;

pub const MONTH_COLUMN: &str = "month";

fn header() -> Vec<&'static str> {
    std::iter::once(MONTH_COLUMN)
        .chain(Component::ALL.iter().map(|c| c.id()))
        .collect()
}

/// Values print in Rust's shortest round-trip form, which is the same on
/// every platform.
pub fn monthly_csv(rows: &[MonthlyRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header()).expect("in-memory write");
    for row in rows {
        let mut rec = vec![row.month.to_string()];
        rec.extend(
            row.values()
                .iter()
                .map(|v| v.map_or_else(String::new, |x| x.to_string())),
        );
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn write_monthly(path: &Path, rows: &[MonthlyRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    write_atomic(path, monthly_csv(rows).as_bytes())
}

pub fn parse_monthly(text: &str, repo_slug: &str) -> Result<Vec<MonthlyRow>> {
    let bad = |msg: String| Error::Schema(format!("monthly.csv: {msg}"));
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let head = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if head.iter().ne(header()) {
        return Err(bad("columns do not match the component registry".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let month: Month = rec[0]
            .parse()
            .map_err(|_| bad(format!("row {}: bad month {:?}", i + 1, &rec[0])))?;
        let mut row = MonthlyRow::new(repo_slug, month);
        for (c, cell) in Component::ALL.iter().zip(rec.iter().skip(1)) {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| bad(format!("row {}: bad {} value {cell:?}", i + 1, c.id())))?;
            row.set(*c, Some(v));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Read `monthly.csv`; a missing file is [`Error::MissingMetrics`].
pub fn read_monthly(path: &Path, repo_slug: &str) -> Result<Vec<MonthlyRow>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingMetrics(format!(
                "{} does not exist; run `repoecg metrics` first",
                path.display()
            )))
        }
        Err(e) => return Err(Error::io(path)(e)),
    };
    parse_monthly(&text, repo_slug)
}
