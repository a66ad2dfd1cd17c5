//! Delimited-text ingestion driven by a plain-text preparation descriptor.
//!
//! Raw categorical values are mapped to dense integer codes in first-appearance
//! order over the whole file (before any split), and the code tables are kept
//! in the schema's value names. Rows containing the missing-value sentinel in
//! any retained column are dropped.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use crate::data::{CategoricalDataset, FeatureSchema, Instance, ValueNames};
use crate::error::{Error, Result};

/// How the class label is derived from the class column(s).
#[derive(Debug, Clone, PartialEq)]
pub enum TargetTransform {
    /// The single class column is itself the categorical label.
    Direct,
    /// Binary label: 1 iff any of the (numeric count) class columns is > 0.
    /// Descriptor syntax: `transform = solar-flare-any`.
    AnyCountPositive,
    /// Binary label: 1 (pass) iff the numeric class column is >= threshold.
    /// Descriptor syntax: `transform = pass-fail:<threshold>`.
    PassFail { threshold: f64 },
}

/// Dataset-preparation descriptor: a `key = value` plain-text config naming
/// the class column(s), dropped columns, missing sentinel and an optional
/// target transformation.
///
/// Recognized keys: `delimiter`, `header`, `missing`, `class_column`,
/// `drop_columns`, `transform`. Columns are referenced by header name when the
/// file has a header, otherwise by 0-based index (an index is also accepted
/// with a header present).
#[derive(Debug, Clone, PartialEq)]
pub struct PrepDescriptor {
    pub delimiter: u8,
    pub has_header: bool,
    pub missing: String,
    pub class_columns: Vec<String>,
    pub drop_columns: Vec<String>,
    pub transform: TargetTransform,
}

impl Default for PrepDescriptor {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            missing: "?".to_string(),
            class_columns: vec!["class".to_string()],
            drop_columns: Vec::new(),
            transform: TargetTransform::Direct,
        }
    }
}

impl PrepDescriptor {
    /// Parse a descriptor from `key = value` text. Lines starting with `#`
    /// and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut desc = Self::default();
        let mut saw_class = false;
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Descriptor(format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "delimiter" => {
                    let bytes = match value {
                        "\\t" | "tab" => b"\t".to_vec(),
                        "space" => b" ".to_vec(),
                        other => other.as_bytes().to_vec(),
                    };
                    if bytes.len() != 1 {
                        return Err(Error::Descriptor(format!(
                            "delimiter must be one byte, got {value:?}"
                        )));
                    }
                    desc.delimiter = bytes[0];
                }
                "header" => {
                    desc.has_header = value.parse().map_err(|_| {
                        Error::Descriptor(format!("header must be true or false, got {value:?}"))
                    })?;
                }
                "missing" => desc.missing = value.to_string(),
                "class_column" => {
                    desc.class_columns =
                        value.split(',').map(|s| s.trim().to_string()).collect();
                    saw_class = true;
                }
                "drop_columns" => {
                    desc.drop_columns = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                }
                "transform" => {
                    desc.transform = match value {
                        "direct" | "" => TargetTransform::Direct,
                        "solar-flare-any" => TargetTransform::AnyCountPositive,
                        other => match other.strip_prefix("pass-fail:") {
                            Some(t) => TargetTransform::PassFail {
                                threshold: t.trim().parse().map_err(|_| {
                                    Error::Descriptor(format!(
                                        "pass-fail threshold is not a number: {t:?}"
                                    ))
                                })?,
                            },
                            None => {
                                return Err(Error::Descriptor(format!(
                                    "unknown transform {other:?}"
                                )))
                            }
                        },
                    };
                }
                other => {
                    return Err(Error::Descriptor(format!("unknown key {other:?}")));
                }
            }
        }
        if !saw_class {
            return Err(Error::Descriptor("class_column is required".into()));
        }
        if desc.class_columns.is_empty() {
            return Err(Error::Descriptor("class_column must name a column".into()));
        }
        if desc.transform != TargetTransform::AnyCountPositive && desc.class_columns.len() != 1 {
            return Err(Error::Descriptor(
                "multiple class columns are only valid with transform = solar-flare-any".into(),
            ));
        }
        Ok(desc)
    }

    /// Read a descriptor file.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Load a delimited-text dataset file.
pub fn load_dataset(path: impl AsRef<Path>, desc: &PrepDescriptor) -> Result<CategoricalDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_dataset_from(file, desc, &path.display().to_string())
}

/// Load a dataset from any reader; `origin` is used in error messages.
pub fn load_dataset_from(
    reader: impl Read,
    desc: &PrepDescriptor,
    origin: &str,
) -> Result<CategoricalDataset> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(desc.delimiter)
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = csv_reader.records();
    let header: Option<Vec<String>> = if desc.has_header {
        match records.next() {
            Some(rec) => Some(
                rec.map_err(|e| parse_error(origin, 0, e))?
                    .iter()
                    .map(str::to_string)
                    .collect(),
            ),
            None => return Err(Error::EmptyDataset),
        }
    } else {
        None
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (number, rec) in records.enumerate() {
        let rec = rec.map_err(|e| parse_error(origin, number + 1, e))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let width = rows[0].len();
    if let Some(h) = &header {
        if h.len() != width {
            return Err(Error::Parse {
                origin: origin.to_string(),
                record: 1,
                message: format!("header has {} columns, rows have {width}", h.len()),
            });
        }
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Parse {
            origin: origin.to_string(),
            record: bad + 1,
            message: format!("expected {width} columns, found {}", rows[bad].len()),
        });
    }

    let resolve = |spec: &str| -> Result<usize> {
        if let Some(h) = &header {
            if let Some(idx) = h.iter().position(|name| name == spec) {
                return Ok(idx);
            }
        }
        match spec.parse::<usize>() {
            Ok(idx) if idx < width => Ok(idx),
            _ => Err(Error::Descriptor(format!(
                "column {spec:?} not found (file has {width} columns)"
            ))),
        }
    };

    let class_idx: Vec<usize> = desc
        .class_columns
        .iter()
        .map(|s| resolve(s))
        .collect::<Result<_>>()?;
    let dropped: Vec<usize> = desc
        .drop_columns
        .iter()
        .map(|s| resolve(s))
        .collect::<Result<_>>()?;
    if class_idx.iter().any(|c| dropped.contains(c)) {
        return Err(Error::Descriptor("class column cannot be dropped".into()));
    }
    let feature_idx: Vec<usize> = (0..width)
        .filter(|i| !class_idx.contains(i) && !dropped.contains(i))
        .collect();

    // Dense codes by first appearance over the whole file.
    let mut feature_codes: Vec<HashMap<String, usize>> =
        vec![HashMap::new(); feature_idx.len()];
    let mut feature_values: Vec<Vec<String>> = vec![Vec::new(); feature_idx.len()];
    let mut class_codes: HashMap<String, usize> = HashMap::new();
    let mut class_names: Vec<String> = Vec::new();

    let mut instances = Vec::new();
    for (number, row) in rows.iter().enumerate() {
        let retained_missing = feature_idx
            .iter()
            .chain(&class_idx)
            .any(|&i| row[i] == desc.missing);
        if retained_missing {
            continue;
        }

        let label = match &desc.transform {
            TargetTransform::Direct => {
                let raw = &row[class_idx[0]];
                *class_codes.entry(raw.clone()).or_insert_with(|| {
                    class_names.push(raw.clone());
                    class_names.len() - 1
                })
            }
            TargetTransform::AnyCountPositive => {
                let mut any = false;
                for &i in &class_idx {
                    let count: f64 = row[i].parse().map_err(|_| Error::Parse {
                        origin: origin.to_string(),
                        record: number + 1,
                        message: format!("class column value {:?} is not numeric", row[i]),
                    })?;
                    any |= count > 0.0;
                }
                usize::from(any)
            }
            TargetTransform::PassFail { threshold } => {
                let grade: f64 = row[class_idx[0]].parse().map_err(|_| Error::Parse {
                    origin: origin.to_string(),
                    record: number + 1,
                    message: format!("class column value {:?} is not numeric", row[class_idx[0]]),
                })?;
                usize::from(grade >= *threshold)
            }
        };

        let features: Vec<usize> = feature_idx
            .iter()
            .enumerate()
            .map(|(slot, &col)| {
                let raw = &row[col];
                *feature_codes[slot].entry(raw.clone()).or_insert_with(|| {
                    feature_values[slot].push(raw.clone());
                    feature_values[slot].len() - 1
                })
            })
            .collect();

        instances.push(Instance { features, label });
    }

    if instances.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let classes = match &desc.transform {
        TargetTransform::Direct => class_names,
        TargetTransform::AnyCountPositive => vec!["negative".into(), "positive".into()],
        TargetTransform::PassFail { .. } => vec!["fail".into(), "pass".into()],
    };
    let distinct_labels = {
        let mut seen = vec![false; classes.len().max(2)];
        for inst in &instances {
            seen[inst.label] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if distinct_labels < 2 {
        return Err(Error::TooFewClasses {
            found: distinct_labels,
        });
    }

    let feature_names: Vec<String> = feature_idx
        .iter()
        .map(|&i| match &header {
            Some(h) => h[i].clone(),
            None => format!("col{i}"),
        })
        .collect();
    let cardinalities: Vec<usize> = feature_values.iter().map(Vec::len).collect();
    let schema = FeatureSchema::with_names(
        cardinalities,
        classes.len(),
        Some(ValueNames {
            feature_names,
            feature_values,
            classes,
        }),
    )?;
    CategoricalDataset::new(Arc::new(schema), instances)
}

fn parse_error(origin: &str, record: usize, err: csv::Error) -> Error {
    Error::Parse {
        origin: origin.to_string(),
        record,
        message: err.to_string(),
    }
}
