//! Dataset file format: comma-separated, UTF-8, LF line endings, header
//! `f01,...,f21,label,attack_class`. `label` is 0/1 or empty, `attack_class`
//! is one of BP, DoS, DoS_gas, OaU, FoT and empty for normal rows.
//!
//! Features are written with the shortest representation that round-trips
//! the underlying 64-bit float, so write → load is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{AttackClass, Dataset, FeatureRecord, Label, FEATURE_DIM};
use crate::error::{Error, Result};

fn feature_name(i: usize) -> String {
    format!("f{:02}", i + 1)
}

/// Header layout accepted by the loader.
#[derive(Debug, Clone, Copy, PartialEq)]
enum HeaderShape {
    FeaturesOnly,
    WithLabel,
    WithLabelAndClass,
}

fn parse_header(line: &str) -> Result<HeaderShape> {
    let cols: Vec<&str> = line.split(',').collect();
    for i in 0..FEATURE_DIM {
        let expected = feature_name(i);
        match cols.get(i) {
            Some(&got) if got == expected => {}
            Some(&got) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected column {expected}, found '{got}'"),
                })
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("missing column {expected}"),
                })
            }
        }
    }
    match cols.len() - FEATURE_DIM {
        0 => Ok(HeaderShape::FeaturesOnly),
        1 if cols[FEATURE_DIM] == "label" => Ok(HeaderShape::WithLabel),
        2 if cols[FEATURE_DIM] == "label" && cols[FEATURE_DIM + 1] == "attack_class" => {
            Ok(HeaderShape::WithLabelAndClass)
        }
        _ => Err(Error::Parse {
            line: 1,
            message: format!(
                "trailing columns must be 'label[,attack_class]', found '{}'",
                cols[FEATURE_DIM..].join(",")
            ),
        }),
    }
}

/// Parses the feature prefix of one data row, ignoring any label columns.
/// Used by streaming detection, where inputs may or may not be labeled.
pub fn parse_feature_fields(line: &str, line_no: usize) -> Result<[f64; FEATURE_DIM]> {
    let mut out = [0.0; FEATURE_DIM];
    let mut fields = line.split(',');
    for (i, slot) in out.iter_mut().enumerate() {
        let raw = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("missing column {}", feature_name(i)),
        })?;
        let value: f64 = raw.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("column {}: invalid number '{raw}'", feature_name(i)),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("column {}: non-finite value", feature_name(i)),
            });
        }
        *slot = value;
    }
    Ok(out)
}

fn parse_row(line: &str, line_no: usize, shape: HeaderShape) -> Result<FeatureRecord> {
    let expected_cols = FEATURE_DIM
        + match shape {
            HeaderShape::FeaturesOnly => 0,
            HeaderShape::WithLabel => 1,
            HeaderShape::WithLabelAndClass => 2,
        };
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != expected_cols {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected {expected_cols} columns, got {}", cols.len()),
        });
    }
    let features = parse_feature_fields(line, line_no)?;

    let label = if shape == HeaderShape::FeaturesOnly {
        None
    } else {
        match cols[FEATURE_DIM].trim() {
            "" => None,
            "0" => Some(Label::Normal),
            "1" => Some(Label::Anomaly),
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("column label: expected 0, 1 or empty, got '{other}'"),
                })
            }
        }
    };
    let attack_class = if shape == HeaderShape::WithLabelAndClass {
        match cols[FEATURE_DIM + 1].trim() {
            "" => None,
            name => Some(AttackClass::parse(name).map_err(|e| Error::Parse {
                line: line_no,
                message: format!("column attack_class: {e}"),
            })?),
        }
    } else {
        None
    };

    FeatureRecord::new(features, label, attack_class).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })
}

/// Loads a dataset file. Errors carry the 1-based line number (header is
/// line 1).
pub fn load_records(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path)?;
    read_records(BufReader::new(file))
}

pub fn read_records<R: Read>(reader: R) -> Result<Dataset> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file, expected a header row".to_owned(),
            })
        }
    };
    let shape = parse_header(header.trim_end_matches('\r'))?;

    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.is_empty() {
            continue;
        }
        records.push(parse_row(trimmed, idx + 2, shape)?);
    }
    Ok(Dataset::new(records))
}

/// Writes the canonical 23-column layout.
pub fn write_records<W: Write>(ds: &Dataset, writer: &mut W) -> Result<()> {
    let header: Vec<String> = (0..FEATURE_DIM)
        .map(feature_name)
        .chain(["label".to_owned(), "attack_class".to_owned()])
        .collect();
    writeln!(writer, "{}", header.join(","))?;
    let mut line = String::new();
    for rec in ds.records() {
        line.clear();
        for (i, v) in rec.features().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v}"));
        }
        line.push(',');
        if let Some(label) = rec.label() {
            line.push_str(if label == Label::Anomaly { "1" } else { "0" });
        }
        line.push(',');
        if let Some(class) = rec.attack_class() {
            line.push_str(class.as_str());
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn save_records(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    write_records(ds, &mut writer)?;
    writer.flush()?;
    Ok(())
}
