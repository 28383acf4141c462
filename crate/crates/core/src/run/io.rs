//! Fixed-column CSV files of a run directory.
//!
//! * `records.csv`: `episode, c_0.., x_0.., f_0.., w_0.., failed`
//! * `hv.csv`: `episode, hv_avg`
//! * `fronts.csv`: `cell, c_lo_0.., c_hi_0.., x_0.., f_0.., episode`
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! reading a file back yields bit-identical values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::EvaluationRecord;

/// Column counts of a records file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordLayout {
    pub conditions: usize,
    pub decisions: usize,
    pub objectives: usize,
}

impl RecordLayout {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["episode".to_string()];
        h.extend(numbered("c", self.conditions));
        h.extend(numbered("x", self.decisions));
        h.extend(numbered("f", self.objectives));
        h.extend(numbered("w", self.objectives));
        h.push("failed".into());
        h
    }

    fn width(&self) -> usize {
        2 + self.conditions + self.decisions + 2 * self.objectives
    }
}

pub(crate) fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}_{i}"))
}

fn csv_write_error(path: &Path, e: csv::Error) -> Error {
    Error::io(format!("writing {}", path.display()), e.into())
}

pub(crate) fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file =
        File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub(crate) fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(header)
        .map_err(|e| csv_write_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_write_error(path, e))?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn write_records(
    path: &Path,
    layout: RecordLayout,
    records: &[EvaluationRecord],
) -> Result<()> {
    for r in records {
        let lens = [
            r.condition.len(),
            r.decision.len(),
            r.objectives.len(),
            r.weight.len(),
        ];
        let want = [
            layout.conditions,
            layout.decisions,
            layout.objectives,
            layout.objectives,
        ];
        if lens != want {
            return Err(Error::DimensionMismatch {
                expected: layout.width(),
                actual: lens.iter().sum::<usize>() + 2,
            });
        }
    }
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            let mut row = vec![r.episode.to_string()];
            for v in r
                .condition
                .iter()
                .chain(&r.decision)
                .chain(&r.objectives)
                .chain(&r.weight)
            {
                row.push(v.to_string());
            }
            row.push(u8::from(r.failed).to_string());
            row
        })
        .collect();
    write_rows(path, &layout.header(), &rows)
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(csv::ReaderBuilder::new().flexible(true).from_reader(file))
}

fn parse_error(path: &Path, line: u64, detail: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        detail: detail.into(),
    }
}

/// Reads every row, checking the header and the column count of each line.
fn read_table(path: &Path, header: &[String]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut reader = open_reader(path)?;
    let found = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().map(String::as_str)) {
        return Err(parse_error(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != header.len() {
            return Err(parse_error(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), row.len()),
            ));
        }
        rows.push((line, row));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    row: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    row[i]
        .trim()
        .parse()
        .map_err(|e| parse_error(path, line, format!("column {name}: `{}`: {e}", &row[i])))
}

pub fn read_records(path: &Path, layout: RecordLayout) -> Result<Vec<EvaluationRecord>> {
    let header = layout.header();
    let mut out = Vec::new();
    for (line, row) in read_table(path, &header)? {
        let floats = |from: usize, n: usize| -> Result<Vec<f64>> {
            (from..from + n)
                .map(|i| field::<f64>(path, line, &row, i, &header[i]))
                .collect()
        };
        let mut at = 1;
        let condition = floats(at, layout.conditions)?;
        at += layout.conditions;
        let decision = floats(at, layout.decisions)?;
        at += layout.decisions;
        let objectives = floats(at, layout.objectives)?;
        at += layout.objectives;
        let weight = floats(at, layout.objectives)?;
        at += layout.objectives;
        let failed = match row[at].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(parse_error(
                    path,
                    line,
                    format!("column failed: `{other}` is not 0 or 1"),
                ))
            }
        };
        out.push(EvaluationRecord {
            episode: field(path, line, &row, 0, "episode")?,
            condition,
            decision,
            objectives,
            weight,
            failed,
        });
    }
    Ok(out)
}

pub fn write_hv_history(path: &Path, history: &[(u64, f64)]) -> Result<()> {
    let rows: Vec<Vec<String>> = history
        .iter()
        .map(|(e, h)| vec![e.to_string(), h.to_string()])
        .collect();
    write_rows(path, &["episode".into(), "hv_avg".into()], &rows)
}

pub fn read_hv_history(path: &Path) -> Result<Vec<(u64, f64)>> {
    read_table(path, &["episode".into(), "hv_avg".into()])?
        .into_iter()
        .map(|(line, row)| {
            Ok((
                field(path, line, &row, 0, "episode")?,
                field(path, line, &row, 1, "hv_avg")?,
            ))
        })
        .collect()
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file =
        File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        context: format!("serializing {}", path.display()),
        source,
    })?;
    write_text(path, &(text + "\n"))
}
