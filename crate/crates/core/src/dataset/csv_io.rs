use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GappedDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    /// Cell text meaning "missing", in addition to the empty string.
    pub missing_token: String,
    pub label_column: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            missing_token: "NA".into(),
            label_column: "label".into(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<GappedDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts)
}

/// Parses a header row of feature names plus one label column, followed by
/// one record per sample.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<GappedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let label_pos = header
        .iter()
        .position(|h| h == opts.label_column)
        .ok_or_else(|| {
            Error::invalid(format!(
                "label column '{}' not found in header",
                opts.label_column
            ))
        })?;
    if header.iter().filter(|h| *h == opts.label_column).count() > 1 {
        return Err(Error::invalid(format!(
            "label column '{}' appears more than once",
            opts.label_column
        )));
    }
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&i| i != label_pos).collect();
    let names: Vec<String> = feature_cols
        .iter()
        .map(|&i| header[i].to_string())
        .collect();
    if let Some(empty) = names.iter().position(String::is_empty) {
        return Err(Error::invalid(format!(
            "feature column {} has an empty name",
            empty + 1
        )));
    }

    let mut values = Vec::new();
    let mut present = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let label_text = &record[label_pos];
        if label_text.is_empty() || label_text == opts.missing_token {
            return Err(Error::Cell {
                row,
                column: opts.label_column.clone(),
                message: "missing label".into(),
            });
        }
        labels.push(parse_label(label_text).ok_or_else(|| Error::Cell {
            row,
            column: opts.label_column.clone(),
            message: format!("label '{label_text}' is not 0 or 1"),
        })?);
        for (&c, name) in feature_cols.iter().zip(&names) {
            let text = &record[c];
            if text.is_empty() || text == opts.missing_token {
                values.push(f64::NAN);
                present.push(false);
                continue;
            }
            let v: f64 = text.parse().map_err(|_| Error::Cell {
                row,
                column: name.clone(),
                message: format!("cannot parse '{text}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell {
                    row,
                    column: name.clone(),
                    message: format!("'{text}' is not finite"),
                });
            }
            values.push(v);
            present.push(true);
        }
    }
    GappedDataset::new(names, values, present, labels)
}

fn parse_label(text: &str) -> Option<u8> {
    match text {
        "0" => Some(0),
        "1" => Some(1),
        other => match other.parse::<f64>() {
            Ok(0.0) => Some(0),
            Ok(1.0) => Some(1),
            _ => None,
        },
    }
}

pub fn save_csv(ds: &GappedDataset, path: impl AsRef<Path>, opts: &CsvOptions) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv(ds, &mut w, opts)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes features in order followed by the label column. Missing cells are
/// written as empty fields; numbers use the shortest exact decimal form.
pub fn write_csv<W: Write>(ds: &GappedDataset, writer: W, opts: &CsvOptions) -> Result<()> {
    if ds.feature_index(&opts.label_column).is_some() {
        return Err(Error::invalid(format!(
            "a feature is named like the label column '{}'",
            opts.label_column
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(&opts.label_column);
    w.write_record(&header)?;
    let mut fields = Vec::with_capacity(header.len());
    for r in 0..ds.n_rows() {
        fields.clear();
        for c in 0..ds.n_features() {
            fields.push(ds.get(r, c).map(|v| format!("{v}")).unwrap_or_default());
        }
        fields.push(ds.label(r).to_string());
        w.write_record(&fields)?;
    }
    w.flush()
        .map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
    Ok(())
}
