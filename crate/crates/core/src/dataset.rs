//! Incomplete tabular training data.
//!
//! Missing cells are stored as a NaN sentinel inside a dense matrix together
//! with an explicit mask. The mask is authoritative: code must never read a
//! value at a masked position except through a [`Repair`] or
//! [`RepairBounds`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SENTINEL: f64 = f64::NAN;

pub const DEFAULT_NULL_MARKERS: [&str; 5] = ["", "NA", "null", "?", "nan"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

/// Position of a cell in the feature matrix. Ordered row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// A fully observed design matrix with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteData {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub feature_names: Vec<String>,
}

impl CompleteData {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteDataset {
    values: DMatrix<f64>,
    mask: DMatrix<bool>,
    labels: DVector<f64>,
    feature_names: Vec<String>,
    task: Task,
    /// Missing cells in row-major order, cached from the mask.
    cells: Vec<Cell>,
}

/// Index sets of incomplete examples and incomplete features.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MissingSets {
    pub examples: Vec<usize>,
    pub features: Vec<usize>,
}

impl IncompleteDataset {
    /// Builds a dataset from rows where `None` marks a missing cell.
    pub fn from_rows(rows: &[Vec<Option<f64>>], labels: Vec<f64>, task: Task) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Contract("ragged rows".into()));
        }
        let mut values = DMatrix::from_element(n, d, SENTINEL);
        let mut mask = DMatrix::from_element(n, d, false);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                match v {
                    Some(v) => values[(i, j)] = *v,
                    None => mask[(i, j)] = true,
                }
            }
        }
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::from_parts(values, mask, DVector::from_vec(labels), names, task)
    }

    /// Builds a dataset from a value matrix and a mask. Values at masked
    /// positions are discarded.
    pub fn from_parts(
        mut values: DMatrix<f64>,
        mask: DMatrix<bool>,
        labels: DVector<f64>,
        feature_names: Vec<String>,
        task: Task,
    ) -> Result<Self> {
        let (n, d) = values.shape();
        if n == 0 || d == 0 {
            return Err(Error::Empty(format!("dataset must have n >= 1 and d >= 1, got {n}x{d}")));
        }
        if mask.shape() != (n, d) {
            return Err(Error::Contract("mask shape differs from value shape".into()));
        }
        if labels.len() != n {
            return Err(Error::Contract(format!("{} labels for {n} examples", labels.len())));
        }
        if feature_names.len() != d {
            return Err(Error::Contract("feature name count differs from column count".into()));
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("labels"));
        }
        if task == Task::Classification && labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::Config("classification labels must be -1 or +1".into()));
        }
        let mut cells = Vec::new();
        for i in 0..n {
            for j in 0..d {
                if mask[(i, j)] {
                    values[(i, j)] = SENTINEL;
                    cells.push(Cell::new(i, j));
                } else if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite("observed feature values"));
                }
            }
        }
        Ok(Self {
            values,
            mask,
            labels,
            feature_names,
            task,
            cells,
        })
    }

    /// Same data with every cell observed.
    pub fn complete(x: DMatrix<f64>, y: DVector<f64>, task: Task) -> Result<Self> {
        let (n, d) = x.shape();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::from_parts(x, DMatrix::from_element(n, d, false), y, names, task)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn is_missing(&self, i: usize, j: usize) -> bool {
        self.mask[(i, j)]
    }

    /// Observed value, or `None` for a missing cell.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        (!self.mask[(i, j)]).then(|| self.values[(i, j)])
    }

    /// Missing cells in row-major order. Every repair and bound vector in
    /// this crate is aligned with this order.
    pub fn missing_cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_missing(&self) -> usize {
        self.cells.len()
    }

    /// Position of `(i, j)` in [`Self::missing_cells`].
    pub fn cell_index(&self, i: usize, j: usize) -> Option<usize> {
        self.cells.binary_search(&Cell::new(i, j)).ok()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn missing_sets(&self) -> MissingSets {
        let mut examples: Vec<usize> = self.cells.iter().map(|c| c.row).collect();
        examples.dedup();
        let features: HashSet<usize> = self.cells.iter().map(|c| c.col).collect();
        let mut features: Vec<usize> = features.into_iter().collect();
        features.sort_unstable();
        MissingSets { examples, features }
    }

    /// Fraction of examples with at least one missing value.
    pub fn missing_factor(&self) -> f64 {
        self.missing_sets().examples.len() as f64 / self.n() as f64
    }

    pub fn row_is_complete(&self, i: usize) -> bool {
        (0..self.d()).all(|j| !self.mask[(i, j)])
    }

    pub fn column_is_complete(&self, j: usize) -> bool {
        (0..self.n()).all(|i| !self.mask[(i, j)])
    }

    /// Observed entries of column `j` as `(row, value)`.
    pub fn observed_in_column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n()).filter(move |&i| !self.mask[(i, j)]).map(move |i| (i, self.values[(i, j)]))
    }

    /// Observed entries of row `i` as `(col, value)`.
    pub fn observed_in_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.d()).filter(move |&j| !self.mask[(i, j)]).map(move |j| (j, self.values[(i, j)]))
    }

    /// Row `i` as options.
    pub fn row(&self, i: usize) -> Vec<Option<f64>> {
        (0..self.d()).map(|j| self.get(i, j)).collect()
    }

    /// Applies a repair given as values aligned with [`Self::missing_cells`].
    /// This is the allocation-light path used by the enumerating routines.
    pub fn repaired_with(&self, values: &[f64]) -> Result<DMatrix<f64>> {
        if values.len() != self.cells.len() {
            return Err(Error::Contract(format!(
                "repair has {} values for {} missing cells",
                values.len(),
                self.cells.len()
            )));
        }
        let mut x = self.values.clone();
        for (c, v) in self.cells.iter().zip(values) {
            x[(c.row, c.col)] = *v;
        }
        Ok(x)
    }

    pub fn apply_repair(&self, repair: &Repair) -> Result<CompleteData> {
        let values = repair.aligned(self)?;
        Ok(CompleteData {
            x: self.repaired_with(&values)?,
            y: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        })
    }

    /// Drops every incomplete column.
    pub fn complete_features(&self) -> (CompleteData, Vec<usize>) {
        let cols: Vec<usize> = (0..self.d()).filter(|&j| self.column_is_complete(j)).collect();
        let x = DMatrix::from_fn(self.n(), cols.len(), |i, k| self.values[(i, cols[k])]);
        let names = cols.iter().map(|&j| self.feature_names[j].clone()).collect();
        (
            CompleteData {
                x,
                y: self.labels.clone(),
                feature_names: names,
            },
            cols,
        )
    }

    /// Drops every incomplete row, keeping the matching labels.
    pub fn complete_examples(&self) -> (CompleteData, Vec<usize>) {
        let rows: Vec<usize> = (0..self.n()).filter(|&i| self.row_is_complete(i)).collect();
        let x = DMatrix::from_fn(rows.len(), self.d(), |k, j| self.values[(rows[k], j)]);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.labels[i]));
        (
            CompleteData {
                x,
                y,
                feature_names: self.feature_names.clone(),
            },
            rows,
        )
    }

    pub fn submatrices(&self) -> Submatrices {
        let (features, feature_index) = self.complete_features();
        let (examples, example_index) = self.complete_examples();
        Submatrices {
            features,
            feature_index,
            examples,
            example_index,
        }
    }

    /// The full matrix when nothing is missing.
    pub fn to_complete(&self) -> Option<CompleteData> {
        self.is_complete().then(|| CompleteData {
            x: self.values.clone(),
            y: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        })
    }

    /// Keeps only the listed rows.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = DMatrix::from_fn(rows.len(), self.d(), |k, j| self.values[(rows[k], j)]);
        let mask = DMatrix::from_fn(rows.len(), self.d(), |k, j| self.mask[(rows[k], j)]);
        let labels = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.labels[i]));
        Self::from_parts(values, mask, labels, self.feature_names.clone(), self.task)
    }

}

/// Complete-feature and complete-example views of a dataset.
#[derive(Debug, Clone)]
pub struct Submatrices {
    pub features: CompleteData,
    /// Original column index of each retained feature.
    pub feature_index: Vec<usize>,
    pub examples: CompleteData,
    /// Original row index of each retained example.
    pub example_index: Vec<usize>,
}

/// An assignment of a value to every missing cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Repair {
    pub assignments: BTreeMap<Cell, f64>,
}

impl Repair {
    /// Repair from values aligned with `ds.missing_cells()`.
    pub fn from_aligned(ds: &IncompleteDataset, values: &[f64]) -> Result<Self> {
        if values.len() != ds.num_missing() {
            return Err(Error::Contract(format!(
                "repair has {} values for {} missing cells",
                values.len(),
                ds.num_missing()
            )));
        }
        Ok(Self {
            assignments: ds.missing_cells().iter().copied().zip(values.iter().copied()).collect(),
        })
    }

    /// Values aligned with `ds.missing_cells()`; fails unless the repair
    /// covers exactly the missing cells.
    pub fn aligned(&self, ds: &IncompleteDataset) -> Result<Vec<f64>> {
        if self.assignments.len() != ds.num_missing() {
            return Err(Error::Contract(format!(
                "repair assigns {} cells but the dataset has {} missing",
                self.assignments.len(),
                ds.num_missing()
            )));
        }
        ds.missing_cells()
            .iter()
            .map(|c| {
                self.assignments.get(c).copied().ok_or_else(|| {
                    Error::Contract(format!("repair does not assign missing cell ({}, {})", c.row, c.col))
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsPolicy {
    ObservedMinMax,
    UserFile,
    Unbounded,
}

/// Per-feature interval overrides, as read from a bounds JSON file.
pub type BoundsOverrides = HashMap<String, [f64; 2]>;

pub fn read_bounds_file(path: &Path) -> Result<BoundsOverrides> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let map: BoundsOverrides = serde_json::from_reader(file)?;
    for (name, [lo, hi]) in &map {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Config(format!("invalid bounds for '{name}': [{lo}, {hi}]")));
        }
    }
    Ok(map)
}

/// Interval of admissible repair values for each missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairBounds {
    /// Aligned with `IncompleteDataset::missing_cells`.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub policy: BoundsPolicy,
}

impl RepairBounds {
    pub fn derive(
        ds: &IncompleteDataset,
        policy: BoundsPolicy,
        overrides: Option<&BoundsOverrides>,
    ) -> Result<Self> {
        if let Some(ov) = overrides {
            if let Some(name) = ov.keys().find(|k| !ds.feature_names().contains(k)) {
                return Err(Error::Config(format!("bounds file names unknown feature '{name}'")));
            }
        }
        let policy = if overrides.is_some_and(|o| !o.is_empty()) {
            BoundsPolicy::UserFile
        } else {
            policy
        };
        let mut per_feature: HashMap<usize, (f64, f64)> = HashMap::new();
        for j in ds.missing_sets().features {
            let name = &ds.feature_names()[j];
            let interval = match overrides.and_then(|o| o.get(name)) {
                Some(&[lo, hi]) => (lo, hi),
                None if policy == BoundsPolicy::Unbounded => (f64::NEG_INFINITY, f64::INFINITY),
                None => observed_range(ds, j).ok_or_else(|| Error::FullyMissingFeature(name.clone()))?,
            };
            per_feature.insert(j, interval);
        }
        let (lo, hi) = ds.missing_cells().iter().map(|c| per_feature[&c.col]).unzip();
        Ok(Self { lo, hi, policy })
    }

    /// The same interval `[lo, hi]` for every missing cell.
    pub fn uniform(ds: &IncompleteDataset, lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Config(format!("invalid interval [{lo}, {hi}]")));
        }
        let m = ds.num_missing();
        Ok(Self {
            lo: vec![lo; m],
            hi: vec![hi; m],
            policy: BoundsPolicy::UserFile,
        })
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.lo[k], self.hi[k])
    }

    pub(crate) fn check_aligned(&self, ds: &IncompleteDataset) -> Result<()> {
        if self.lo.len() != ds.num_missing() || self.hi.len() != ds.num_missing() {
            return Err(Error::Contract("bounds are not aligned with the dataset's missing cells".into()));
        }
        Ok(())
    }

    pub(crate) fn require_finite(&self, ds: &IncompleteDataset) -> Result<()> {
        self.check_aligned(ds)?;
        for (k, c) in ds.missing_cells().iter().enumerate() {
            if !self.lo[k].is_finite() || !self.hi[k].is_finite() {
                return Err(Error::UnboundedCell { row: c.row, col: c.col });
            }
        }
        Ok(())
    }
}

fn observed_range(ds: &IncompleteDataset, j: usize) -> Option<(f64, f64)> {
    ds.observed_in_column(j).map(|(_, v)| v).fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label_column: String,
    pub null_markers: Vec<String>,
    pub task: Task,
    /// Classification only: the label string mapped to +1. Every other
    /// label maps to -1. Without it labels must already read as -1/+1.
    pub positive_label: Option<String>,
}

impl LoadOptions {
    pub fn new(label_column: impl Into<String>, task: Task) -> Self {
        Self {
            label_column: label_column.into(),
            null_markers: DEFAULT_NULL_MARKERS.iter().map(|s| s.to_string()).collect(),
            task,
            positive_label: None,
        }
    }
}

pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<IncompleteDataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path, opts)
}

/// Reads CSV text. `origin` is only used in error messages.
pub fn read_csv<R: Read>(reader: R, origin: &Path, opts: &LoadOptions) -> Result<IncompleteDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let label_idx = headers
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::Config(format!("label column '{}' not found in header", opts.label_column)))?;
    let markers: Vec<String> = opts.null_markers.iter().map(|m| m.to_lowercase()).collect();
    let is_null = |s: &str| markers.iter().any(|m| *m == s.to_lowercase());

    let feature_names: Vec<String> =
        headers.iter().enumerate().filter(|(k, _)| *k != label_idx).map(|(_, h)| h.clone()).collect();
    let d = feature_names.len();
    let mut data: Vec<f64> = Vec::new();
    let mut mask: Vec<bool> = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0usize;

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let line = r + 2;
        let raw_label = record.get(label_idx).unwrap_or("");
        if is_null(raw_label) {
            dropped += 1;
            continue;
        }
        labels.push(parse_label(raw_label, opts, origin, line)?);
        for (k, field) in record.iter().enumerate() {
            if k == label_idx {
                continue;
            }
            if is_null(field) {
                data.push(SENTINEL);
                mask.push(true);
            } else {
                let v = field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Format {
                    path: origin.to_path_buf(),
                    row: line,
                    column: headers[k].clone(),
                    value: field.to_string(),
                })?;
                data.push(v);
                mask.push(false);
            }
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} rows with a missing label");
    }
    if labels.is_empty() {
        return Err(Error::Empty(format!("{} has no rows with an observed label", origin.display())));
    }
    let n = labels.len();
    let values = DMatrix::from_row_slice(n, d, &data);
    let mask = DMatrix::from_row_slice(n, d, &mask);
    IncompleteDataset::from_parts(values, mask, DVector::from_vec(labels), feature_names, opts.task)
}

fn parse_label(raw: &str, opts: &LoadOptions, origin: &Path, line: usize) -> Result<f64> {
    let bad = || Error::Format {
        path: origin.to_path_buf(),
        row: line,
        column: opts.label_column.clone(),
        value: raw.to_string(),
    };
    match (opts.task, &opts.positive_label) {
        (Task::Classification, Some(pos)) => Ok(if raw == pos { 1.0 } else { -1.0 }),
        (Task::Classification, None) => match raw.parse::<f64>() {
            Ok(v) if v == 1.0 || v == -1.0 => Ok(v),
            Ok(_) => Err(Error::Config(format!(
                "label '{raw}' on line {line} is not -1/+1; pass --positive-label"
            ))),
            Err(_) => Err(bad()),
        },
        (Task::Regression, _) => raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad),
    }
}

/// Writes a complete dataset as CSV with the label in the last column.
pub fn write_csv<W: std::io::Write>(data: &CompleteData, label: &str, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = data.feature_names.iter().map(String::as_str).collect();
    header.push(label);
    wtr.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec: Vec<String> = (0..data.d()).map(|j| data.x[(i, j)].to_string()).collect();
        rec.push(data.y[i].to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rain_csv() -> &'static str {
        // Seattle / Chicago example with one missing humidity reading.
        "city,temperature,humidity,rain\nSeattle,65,80,1\nChicago,50,,-1\n"
    }

    fn rain() -> IncompleteDataset {
        IncompleteDataset::from_rows(
            &[vec![Some(65.0), Some(80.0)], vec![Some(50.0), None]],
            vec![1.0, -1.0],
            Task::Classification,
        )
        .unwrap()
    }

    fn parse(text: &str, opts: &LoadOptions) -> Result<IncompleteDataset> {
        read_csv(text.as_bytes(), Path::new("test.csv"), opts)
    }

    #[test]
    fn loads_table_with_one_missing_cell() {
        let text = rain_csv().replace("Seattle,", "").replace("Chicago,", "").replace("city,", "");
        let ds = parse(&text, &LoadOptions::new("rain", Task::Classification)).unwrap();
        assert_eq!((ds.n(), ds.d()), (2, 2));
        assert!(ds.is_missing(1, 1));
        assert_eq!(ds.missing_cells(), &[Cell::new(1, 1)]);
        assert_eq!(ds.get(0, 1), Some(80.0));
        assert_eq!(ds.feature_names(), &["temperature", "humidity"]);
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let err = parse(rain_csv(), &LoadOptions::new("rain", Task::Classification)).unwrap_err();
        match err {
            Error::Format { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "city");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_markers_means_no_mask() {
        let ds = parse("a,b,y\n1,2,3\n4,5,6\n", &LoadOptions::new("y", Task::Regression)).unwrap();
        assert!(ds.is_complete());
        assert_eq!(ds.missing_factor(), 0.0);
    }

    #[test]
    fn markers_are_case_insensitive() {
        let ds = parse("a,b,y\nNaN,2,3\n4,?,6\nNULL,na,1\n", &LoadOptions::new("y", Task::Regression)).unwrap();
        assert_eq!(ds.num_missing(), 4);
    }

    #[test]
    fn all_labels_missing_is_an_error() {
        let err = parse("a,y\n1,NA\n2,NA\n", &LoadOptions::new("y", Task::Regression)).unwrap_err();
        assert!(matches!(err, Error::Empty(_)));
        assert!(err.to_string().contains("no usable examples"));
    }

    #[test]
    fn rows_with_missing_label_are_dropped() {
        let ds = parse("a,y\n1,NA\n2,5\n", &LoadOptions::new("y", Task::Regression)).unwrap();
        assert_eq!(ds.n(), 1);
        assert_eq!(ds.labels()[0], 5.0);
    }

    #[test]
    fn missing_label_column_is_config_error() {
        let err = parse("a,b\n1,2\n", &LoadOptions::new("y", Task::Regression)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn positive_label_maps_to_plus_one() {
        let mut opts = LoadOptions::new("y", Task::Classification);
        opts.positive_label = Some("yes".into());
        let ds = parse("a,y\n1,yes\n2,no\n", &opts).unwrap();
        assert_eq!(ds.labels().as_slice(), &[1.0, -1.0]);
        let err = parse("a,y\n1,yes\n", &LoadOptions::new("y", Task::Classification)).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn missing_sets_examples() {
        let ds = IncompleteDataset::from_rows(
            &[
                vec![Some(1.0), Some(1.0), None],
                vec![Some(1.0), Some(1.0), Some(1.0)],
                vec![Some(1.0), Some(1.0), Some(1.0)],
                vec![Some(1.0), Some(1.0), None],
            ],
            vec![0.0; 4],
            Task::Regression,
        )
        .unwrap();
        let sets = ds.missing_sets();
        assert_eq!(sets.examples, vec![0, 3]);
        assert_eq!(sets.features, vec![2]);
        assert_eq!(ds.missing_factor(), 0.5);
        assert_eq!(rain().missing_sets(), MissingSets { examples: vec![1], features: vec![1] });
    }

    #[test]
    fn missing_factor_of_breast_cancer_profile() {
        // 559 examples at a missing factor of 1.97% is 11 incomplete rows.
        let n = 559;
        let rows: Vec<Vec<Option<f64>>> =
            (0..n).map(|i| vec![Some(1.0), if i < 11 { None } else { Some(2.0) }]).collect();
        let ds = IncompleteDataset::from_rows(&rows, vec![1.0; n], Task::Classification).unwrap();
        assert!((ds.missing_factor() - 0.0197).abs() < 5e-5);
    }

    #[test]
    fn observed_min_max_bounds() {
        let ds = IncompleteDataset::from_rows(
            &[vec![Some(1.0)], vec![None], vec![Some(3.0)]],
            vec![0.0; 3],
            Task::Regression,
        )
        .unwrap();
        let b = RepairBounds::derive(&ds, BoundsPolicy::ObservedMinMax, None).unwrap();
        assert_eq!(b.interval(0), (1.0, 3.0));
        let u = RepairBounds::derive(&ds, BoundsPolicy::Unbounded, None).unwrap();
        assert_eq!(u.interval(0), (f64::NEG_INFINITY, f64::INFINITY));
        assert!(!u.is_finite());
    }

    #[test]
    fn user_bounds_override_feature() {
        let ds = parse("temperature,humidity,rain\n65,80,1\n50,,-1\n", &LoadOptions::new("rain", Task::Classification))
            .unwrap();
        let ov: BoundsOverrides = [("humidity".to_string(), [0.0, 100.0])].into_iter().collect();
        let b = RepairBounds::derive(&ds, BoundsPolicy::ObservedMinMax, Some(&ov)).unwrap();
        assert_eq!(b.interval(0), (0.0, 100.0));
        assert_eq!(b.policy, BoundsPolicy::UserFile);
    }

    #[test]
    fn fully_missing_feature_names_the_feature() {
        let ds = parse("a,b,y\n1,,1\n2,,2\n", &LoadOptions::new("y", Task::Regression)).unwrap();
        let err = RepairBounds::derive(&ds, BoundsPolicy::ObservedMinMax, None).unwrap_err();
        assert!(err.to_string().contains("'b'"));
    }

    #[test]
    fn apply_repair_fills_only_missing_cells() {
        let ds = rain();
        let r = Repair::from_aligned(&ds, &[90.0]).unwrap();
        let full = ds.apply_repair(&r).unwrap();
        assert_eq!(full.x, DMatrix::from_row_slice(2, 2, &[65.0, 80.0, 50.0, 90.0]));

        let err = ds.apply_repair(&Repair::default()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));

        let complete = IncompleteDataset::complete(DMatrix::identity(2, 2), DVector::zeros(2), Task::Regression).unwrap();
        let same = complete.apply_repair(&Repair::default()).unwrap();
        assert_eq!(same.x, DMatrix::identity(2, 2));
    }

    #[test]
    fn submatrices_of_rain_table() {
        let sub = rain().submatrices();
        assert_eq!(sub.features.x, DMatrix::from_row_slice(2, 1, &[65.0, 50.0]));
        assert_eq!(sub.feature_index, vec![0]);
        assert_eq!(sub.examples.x, DMatrix::from_row_slice(1, 2, &[65.0, 80.0]));
        assert_eq!(sub.examples.y.as_slice(), &[1.0]);
    }

    #[test]
    fn every_column_incomplete_gives_empty_feature_view() {
        let ds = IncompleteDataset::from_rows(&[vec![None, Some(1.0)], vec![Some(1.0), None]], vec![0.0; 2], Task::Regression)
            .unwrap();
        let sub = ds.submatrices();
        assert_eq!(sub.features.d(), 0);
        assert_eq!(sub.examples.n(), 0);
    }
}
