//! In-memory training data and CSV ingestion.

use std::path::Path;

use crate::error::{invalid, Error, Result};

/// Class of a training event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Signal,
    Background,
}

impl Label {
    /// `+1` for signal, `-1` for background.
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Signal => 1.0,
            Label::Background => -1.0,
        }
    }

    pub fn is_signal(self) -> bool {
        self == Label::Signal
    }

    pub fn from_signal(signal: bool) -> Self {
        if signal {
            Label::Signal
        } else {
            Label::Background
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Signal => Label::Background,
            Label::Background => Label::Signal,
        }
    }
}

/// Rectangular labelled dataset stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<Label>,
    weights: Vec<f64>,
}

impl Dataset {
    /// `values` holds `labels.len()` rows of `feature_names.len()` values each.
    pub fn new(
        feature_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<Label>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(invalid("dataset needs at least one feature column"));
        }
        if values.len() != labels.len() * d {
            return Err(invalid(format!(
                "feature matrix has {} values, expected {} rows x {} features",
                values.len(),
                labels.len(),
                d
            )));
        }
        if weights.len() != labels.len() {
            return Err(invalid(format!(
                "{} weights for {} rows",
                weights.len(),
                labels.len()
            )));
        }
        Ok(Self {
            feature_names,
            values,
            labels,
            weights,
        })
    }

    /// Dataset with unit weights and generated feature names `f0, f1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[Label]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(invalid(format!(
                "row {i} has {} values, expected {d}",
                rows[i].len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Self::new(
            default_feature_names(d),
            rows.concat(),
            labels.to_vec(),
            vec![1.0; labels.len()],
        )
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features())
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows().map(|r| r[feature]).collect()
    }

    /// Keeps only the listed feature columns, in the given order.
    pub fn select_features(&self, features: &[usize]) -> Result<Self> {
        if let Some(&f) = features.iter().find(|&&f| f >= self.n_features()) {
            return Err(invalid(format!("feature index {f} out of range")));
        }
        let values = self
            .rows()
            .flat_map(|r| features.iter().map(move |&f| r[f]))
            .collect();
        Self::new(
            features
                .iter()
                .map(|&f| self.feature_names[f].clone())
                .collect(),
            values,
            self.labels.clone(),
            self.weights.clone(),
        )
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            values: rows
                .iter()
                .flat_map(|&i| self.row(i).iter().copied())
                .collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            weights: rows.iter().map(|&i| self.weights[i]).collect(),
        }
    }

    /// Appends a feature column.
    pub fn with_column(&self, name: &str, column: &[f64]) -> Result<Self> {
        if column.len() != self.n_rows() {
            return Err(invalid(format!(
                "column has {} values for {} rows",
                column.len(),
                self.n_rows()
            )));
        }
        let mut names = self.feature_names.clone();
        names.push(name.to_string());
        let values = self
            .rows()
            .zip(column)
            .flat_map(|(r, &v)| r.iter().copied().chain(std::iter::once(v)))
            .collect();
        Self::new(names, values, self.labels.clone(), self.weights.clone())
    }

    /// Applies `f` to every value of one feature column.
    pub fn map_column(&self, feature: usize, f: impl Fn(f64) -> f64) -> Self {
        let d = self.n_features();
        let mut out = self.clone();
        for row in out.values.chunks_exact_mut(d) {
            row[feature] = f(row[feature]);
        }
        out
    }

    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        Self::new(
            self.feature_names.clone(),
            self.values.clone(),
            labels,
            self.weights.clone(),
        )
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(
            self.feature_names.clone(),
            self.values.clone(),
            self.labels.clone(),
            weights,
        )
    }
}

pub fn default_feature_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("f{i}")).collect()
}

/// Parses a numeric cell. `nan`, `inf` and `-inf` are accepted in any case.
pub fn parse_value(cell: &str) -> Option<f64> {
    let t = cell.trim();
    match t.to_ascii_lowercase().as_str() {
        "nan" | "+nan" | "-nan" => Some(f64::NAN),
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        _ => t.parse::<f64>().ok(),
    }
}

/// A CSV file with a header row, held as raw text cells.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    // file line of each data row, for error messages
    lines: Vec<u64>,
}

impl CsvTable {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Data("missing header row".into()));
        }
        let mut rows = Vec::new();
        let mut lines = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Data(format!("malformed csv: {e}")))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(Error::Data(format!(
                    "row at line {line} has {} cells, expected {}",
                    record.len(),
                    header.len()
                )));
            }
            rows.push(record.iter().map(str::to_string).collect());
            lines.push(line);
        }
        Ok(Self {
            header,
            rows,
            lines,
        })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("unknown column `{name}`")))
    }

    fn numeric(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        parse_value(cell).ok_or_else(|| {
            Error::Data(format!(
                "non-numeric value `{cell}` at line {}, column `{}`",
                self.lines[row], self.header[col]
            ))
        })
    }

    /// Row-major matrix of the named columns.
    pub fn matrix(&self, columns: &[String]) -> Result<Vec<f64>> {
        let idx = columns
            .iter()
            .map(|c| self.column_index(c))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(self.n_rows() * idx.len());
        for r in 0..self.n_rows() {
            for &c in &idx {
                out.push(self.numeric(r, c)?);
            }
        }
        Ok(out)
    }

    /// Labelled dataset; every column other than the label and weight columns
    /// is a feature.
    pub fn into_dataset(&self, label_column: &str, weight_column: Option<&str>) -> Result<Dataset> {
        let label_idx = self.column_index(label_column)?;
        let weight_idx = weight_column.map(|w| self.column_index(w)).transpose()?;
        let features: Vec<String> = self
            .header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != label_idx && Some(i) != weight_idx)
            .map(|(_, h)| h.clone())
            .collect();
        if features.is_empty() {
            return Err(Error::Data("no feature columns".into()));
        }
        let mut labels = Vec::with_capacity(self.n_rows());
        let mut weights = Vec::with_capacity(self.n_rows());
        for r in 0..self.n_rows() {
            let y = self.numeric(r, label_idx)?;
            let label = if y == 1.0 {
                Label::Signal
            } else if y == 0.0 || y == -1.0 {
                Label::Background
            } else {
                return Err(Error::Data(format!(
                    "label `{}` at line {} is not one of 0, 1, -1",
                    self.rows[r][label_idx], self.lines[r]
                )));
            };
            labels.push(label);
            weights.push(match weight_idx {
                Some(c) => self.numeric(r, c)?,
                None => 1.0,
            });
        }
        let values = self.matrix(&features)?;
        Dataset::new(features, values, labels, weights)
    }
}

/// Reads a labelled dataset from a CSV file.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    weight_column: Option<&str>,
) -> Result<Dataset> {
    CsvTable::read(path)?.into_dataset(label_column, weight_column)
}
