use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Dataset;

/// Layout of a labelled CSV file. Every column other than the label column
/// is a numeric feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    /// Header name of the label column; without a header, `label_index` is
    /// used instead.
    pub label_column: String,
    pub label_index: Option<usize>,
    pub has_header: bool,
    /// Class count; inferred as the largest label when absent.
    pub k: Option<usize>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: "label".to_string(),
            label_index: None,
            has_header: true,
            k: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let headers: Option<Vec<String>> = if schema.has_header {
        let h = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let label_col = match (&headers, schema.label_index) {
        (_, Some(i)) => i,
        (Some(h), None) => h
            .iter()
            .position(|c| c == &schema.label_column)
            .ok_or_else(|| {
                parse_err(
                    1,
                    format!("no column named '{}' in header", schema.label_column),
                )
            })?,
        (None, None) => {
            return Err(Error::invalid(
                "CSV without a header needs label_index in the schema",
            ))
        }
    };

    let mut x = Vec::new();
    let mut y_raw: Vec<(usize, i64)> = Vec::new();
    let mut width: Option<usize> = headers.as_ref().map(Vec::len);
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                line,
                format!("expected {w} fields, found {}", record.len()),
            ));
        }
        if label_col >= w {
            return Err(parse_err(
                line,
                format!("label column {label_col} out of range"),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            if c == label_col {
                let l: i64 = field
                    .parse()
                    .map_err(|_| parse_err(line, format!("label '{field}' is not an integer")))?;
                y_raw.push((line, l));
            } else {
                let v: f64 = field.parse().map_err(|_| {
                    parse_err(line, format!("field {} ('{field}') is not a number", c + 1))
                })?;
                if !v.is_finite() {
                    return Err(parse_err(line, format!("field {} is not finite", c + 1)));
                }
                x.push(v);
            }
        }
    }
    if y_raw.is_empty() {
        return Err(Error::data(format!("{}: no data rows", path.display())));
    }
    let k = schema.k.unwrap_or_else(|| {
        y_raw
            .iter()
            .map(|&(_, l)| l.max(0) as usize)
            .max()
            .unwrap_or(0)
    });
    let mut bad: Vec<i64> = y_raw
        .iter()
        .map(|&(_, l)| l)
        .filter(|&l| l < 1 || l as usize > k)
        .collect();
    if !bad.is_empty() {
        bad.sort_unstable();
        bad.dedup();
        let first = y_raw
            .iter()
            .find(|&&(_, l)| l < 1 || l as usize > k)
            .map_or(0, |&(line, _)| line);
        return Err(parse_err(
            first,
            format!("unknown labels {bad:?} (expected integers in 1..={k})"),
        ));
    }
    let p = width.unwrap_or(1) - 1;
    let y = y_raw.into_iter().map(|(_, l)| l as usize).collect();
    let data = Dataset::new(x, p, y, k)?;
    match headers {
        Some(h) => data.with_feature_names(
            h.into_iter()
                .enumerate()
                .filter(|&(c, _)| c != label_col)
                .map(|(_, n)| n)
                .collect(),
        ),
        None => Ok(data),
    }
}

/// Reads the feature columns of a CSV file whose label column may be
/// absent. Returns row-major features and the feature count.
pub fn load_features(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<(Vec<f64>, usize)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut skip = schema.label_index;
    let mut width = None;
    if schema.has_header {
        let h = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if skip.is_none() {
            skip = h.iter().position(|c| c == schema.label_column);
        }
        width = Some(h.len());
    }
    let mut x = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                line,
                format!("expected {w} fields, found {}", record.len()),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            if Some(c) == skip {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                parse_err(line, format!("field {} ('{field}') is not a number", c + 1))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("field {} is not finite", c + 1)));
            }
            x.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::data(format!("{}: no data rows", path.display())));
    }
    let p = x.len() / rows;
    Ok((x, p))
}

/// Writes features followed by a `label` column, with a header.
pub fn save_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_to_io(path, e))?;
    let names: Vec<String> = match data.feature_names() {
        Some(n) => n.to_vec(),
        None => (1..=data.p()).map(|j| format!("x{j}")).collect(),
    };
    let mut header = names;
    header.push("label".to_string());
    w.write_record(&header).map_err(|e| csv_to_io(path, e))?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| format!("{v:e}")).collect();
        rec.push(data.label(i).to_string());
        w.write_record(&rec).map_err(|e| csv_to_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_to_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}
