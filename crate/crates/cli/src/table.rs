//! `sample_id,label,x1,...,xd` input tables.

use std::io::Read;

use rdwd_core::{normalize_counts, DataError, Label, Normalized, Scorer, TrainingSet};

use crate::CliError;

/// Label cell of one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowLabel {
    Known(Label),
    Unknown,
}

impl RowLabel {
    pub fn parse(token: &str) -> Option<Self> {
        match token {
            "+1" => Some(RowLabel::Known(Label::Positive)),
            "-1" => Some(RowLabel::Known(Label::Negative)),
            "unknown" => Some(RowLabel::Unknown),
            _ => None,
        }
    }

    pub fn known(self) -> Option<Label> {
        match self {
            RowLabel::Known(l) => Some(l),
            RowLabel::Unknown => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RowLabel::Known(l) => l.token(),
            RowLabel::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub sample_id: String,
    /// `None` when the table has no label column.
    pub label: Option<RowLabel>,
    pub features: Vec<f64>,
    /// 1-based line in the input file.
    pub line: u64,
}

/// Samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageTable {
    pub rows: Vec<CoverageRow>,
    pub dim: usize,
    pub labeled: bool,
}

impl CoverageTable {
    /// Reads a CSV whose header starts with `sample_id`, optionally followed
    /// by `label`; every remaining column is a feature.
    pub fn read<R: Read>(input: R) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(input);
        let header = reader
            .headers()
            .map_err(|e| CliError::Parse(format!("cannot read header: {e}")))?
            .clone();
        if header.get(0).map(str::trim) != Some("sample_id") {
            return Err(CliError::Parse(
                "row 1: header must start with `sample_id`".into(),
            ));
        }
        let labeled = header.get(1).map(str::trim) == Some("label");
        let first_feature = if labeled { 2 } else { 1 };
        let dim = header.len().saturating_sub(first_feature);
        if dim == 0 {
            return Err(CliError::Parse("row 1: no feature columns".into()));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |msg: String| CliError::Parse(format!("row {line}: {msg}"));
            if record.len() != header.len() {
                return Err(bad(format!(
                    "expected {} fields, found {}",
                    header.len(),
                    record.len()
                )));
            }
            let sample_id = record[0].trim().to_string();
            let label = if labeled {
                let token = record[1].trim();
                if token.is_empty() {
                    return Err(bad("missing label".into()));
                }
                Some(RowLabel::parse(token).ok_or_else(|| {
                    bad(format!("label `{token}` is not one of +1, -1, unknown"))
                })?)
            } else {
                None
            };
            let features = record
                .iter()
                .skip(first_feature)
                .map(|v| {
                    let v = v.trim();
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| bad(format!("`{v}` is not a finite number")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(CoverageRow {
                sample_id,
                label,
                features,
                line,
            });
        }
        if rows.is_empty() {
            return Err(CliError::Parse("no samples".into()));
        }
        Ok(Self { rows, dim, labeled })
    }

    /// Rows mapped to the feature space the model lives in. Raw counts are
    /// L1-normalized; with `normalize == false` rows are used as given, except
    /// that all-zero rows still become the zero sentinel.
    pub fn prepared(&self, normalize: bool) -> Result<Vec<Point>, CliError> {
        self.rows
            .iter()
            .map(|row| prepare_row(row, normalize))
            .collect()
    }

    /// Labeled rows as a training set; `unknown` rows are skipped.
    pub fn training_set(&self, normalize: bool) -> Result<TrainingSet, CliError> {
        if !self.labeled {
            return Err(CliError::Parse("input has no label column".into()));
        }
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for row in &self.rows {
            let Some(label) = row.label.and_then(RowLabel::known) else {
                continue;
            };
            match prepare_row(row, normalize)? {
                Point::Zero { .. } => match label {
                    Label::Negative => {}
                    Label::Positive => {
                        return Err(CliError::Fit(format!(
                            "row {}: all-zero sample labeled +1",
                            row.line
                        )))
                    }
                },
                Point::Finite(x) => {
                    points.push(x);
                    labels.push(label);
                }
            }
        }
        TrainingSet::new(points, labels).map_err(|e| match e {
            DataError::EmptyClass(l) => {
                CliError::Fit(format!("no usable training samples with label {l}"))
            }
            other => CliError::Fit(other.to_string()),
        })
    }
}

/// A row in model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    /// All-zero input: distance `-inf`, label −1.
    Zero { dim: usize },
    Finite(Vec<f64>),
}

impl Point {
    pub fn signed_distance(&self, scorer: &dyn Scorer) -> Result<f64, DataError> {
        match self {
            Point::Zero { dim } => scorer.signed_distance_of(&Normalized::Zero { dim: *dim }),
            Point::Finite(x) => scorer.signed_distance(x),
        }
    }
}

fn prepare_row(row: &CoverageRow, normalize: bool) -> Result<Point, CliError> {
    let dim = row.features.len();
    if row.features.iter().all(|&v| v == 0.0) {
        return Ok(Point::Zero { dim });
    }
    if !normalize {
        return Ok(Point::Finite(row.features.clone()));
    }
    match normalize_counts(&row.features) {
        Ok(Normalized::Simplex(v)) => Ok(Point::Finite(v.into_entries())),
        Ok(Normalized::Zero { .. }) => Ok(Point::Zero { dim }),
        Err(e) => Err(CliError::Parse(format!("row {}: {e}", row.line))),
    }
}
