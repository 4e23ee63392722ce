use std::io::Write;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{DsvError, Error, Result};

/// Which column, if any, carries categorical labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// Column selected by its header name (requires `header`).
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsvOptions {
    pub delimiter: u8,
    pub header: bool,
    pub label_column: Option<LabelColumn>,
}

impl Default for DsvOptions {
    fn default() -> Self {
        DsvOptions {
            delimiter: b',',
            header: false,
            label_column: None,
        }
    }
}

pub fn load_dsv(path: impl AsRef<Path>, options: &DsvOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dsv(&text, options)
}

/// Parses delimiter-separated text. Row and column numbers in errors are
/// one-based and refer to lines of the input.
pub fn parse_dsv(text: &str, options: &DsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DsvError::Malformed(e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        // blank lines are skipped
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(DsvError::Empty.into());
    }

    let columns = records[0].1.len();
    let header: Option<Vec<String>> = if options.header {
        let (_, h) = records.remove(0);
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    if records.is_empty() {
        return Err(DsvError::Empty.into());
    }

    let label_idx = match &options.label_column {
        None => None,
        Some(LabelColumn::Index(i)) => {
            if *i >= columns {
                return Err(DsvError::LabelColumnOutOfRange {
                    index: *i,
                    columns,
                }
                .into());
            }
            Some(*i)
        }
        Some(LabelColumn::Name(name)) => {
            let h = header
                .as_ref()
                .ok_or_else(|| DsvError::UnknownLabelColumn(name.clone()))?;
            Some(
                h.iter()
                    .position(|c| c == name)
                    .ok_or_else(|| DsvError::UnknownLabelColumn(name.clone()))?,
            )
        }
    };
    if label_idx.is_some() && columns < 2 {
        return Err(DsvError::Malformed("no feature columns besides the label".into()).into());
    }

    let mut points = Vec::with_capacity(records.len());
    let mut labels = Vec::new();
    for (line, rec) in &records {
        if rec.len() != columns {
            return Err(DsvError::Ragged {
                row: *line,
                expected: columns,
                found: rec.len(),
            }
            .into());
        }
        let mut p = Vec::with_capacity(columns);
        for (c, cell) in rec.iter().enumerate() {
            if Some(c) == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                return Err(DsvError::Missing {
                    row: *line,
                    column: c + 1,
                }
                .into());
            }
            let v: f64 = cell.parse().map_err(|_| DsvError::NonNumeric {
                row: *line,
                column: c + 1,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DsvError::NonNumeric {
                    row: *line,
                    column: c + 1,
                    cell: cell.to_string(),
                }
                .into());
            }
            p.push(v);
        }
        points.push(p);
    }

    let mut d = Dataset::new(points)?;
    if label_idx.is_some() {
        d = d.with_labels(labels)?;
    }
    if let Some(h) = header {
        let names: Vec<String> = h
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, n)| n)
            .collect();
        d = d.with_feature_names(names)?;
    }
    Ok(d)
}

/// Writes a dataset so that `parse_dsv` with a header and a trailing
/// `label` column (when labels exist) reads it back exactly.
pub fn write_dsv<W: Write>(data: &Dataset, delimiter: u8, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(out);
    let m = data.dim();
    let mut header: Vec<String> = match data.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..m).map(|j| format!("x{}", j + 1)).collect(),
    };
    if data.labels().is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.point(i).iter().map(|v| format!("{v}")).collect();
        if let Some(l) = data.labels() {
            row.push(l[i].clone());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}
