//! Labeled tabular datasets, class partitioning, binarization and pair views.
//!
//! A [`Dataset`] is an immutable n×m matrix of finite real values plus one
//! class label per example. Views ([`BinarizedView`], [`PairView`]) relabel or
//! restrict the examples without copying the value matrix, so building all
//! O(L²) pair views stays cheap.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scalar::Scalar;

/// Errors from dataset construction, loading and view extraction.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("cell at row {row}, column {column:?} is not a finite number: {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("missing value at row {row}, column {column:?} (rerun with mean imputation to fill it)")]
    MissingValue { row: usize, column: String },
    #[error("column {column:?} has no observed values to impute from")]
    NothingToImpute { column: String },
    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),
    #[error("empty label at row {row}")]
    EmptyLabel { row: usize },
    #[error("dataset has {found} distinct class(es); at least 2 are required")]
    TooFewClasses { found: usize },
    #[error("duplicate feature identifier {0:?}")]
    DuplicateFeature(String),
    #[error("duplicate example identifier {0:?}")]
    DuplicateExample(String),
    #[error("value at row {row}, feature {feature} is not finite")]
    NonFiniteValue { row: usize, feature: usize },
    #[error("shape mismatch: {n} examples x {m} features needs {expected} values, got {got}")]
    ShapeMismatch {
        n: usize,
        m: usize,
        expected: usize,
        got: usize,
    },
    #[error("dataset must contain at least one example and one feature")]
    Empty,
    #[error("unknown class label {0:?}")]
    UnknownClass(String),
    #[error("pair view requires two distinct classes, got {0:?} twice")]
    IdenticalPairClasses(String),
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum LabelSpec {
    /// Header name of the label column.
    Name(String),
    /// Zero-based column index.
    Index(usize),
    /// The last column (default).
    #[default]
    Last,
}

/// Options for [`Dataset::load_csv`].
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub label: LabelSpec,
    /// Replace missing cells (empty, `na`, `nan`) with the per-feature mean
    /// instead of failing.
    pub impute_mean: bool,
}

/// An immutable labeled dataset: example ids, feature ids, an n×m value
/// matrix (row-major) and one class label per example. Classes are kept in
/// first-occurrence order, which fixes the order of every per-class output
/// downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<S> {
    examples: Vec<String>,
    features: Vec<String>,
    values: Vec<S>,
    label_codes: Vec<u32>,
    classes: Vec<String>,
}

impl<S: Scalar> Dataset<S> {
    /// Build a dataset from explicit parts. `values` is row-major n×m.
    pub fn new(
        examples: Vec<String>,
        features: Vec<String>,
        values: Vec<S>,
        labels: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let n = examples.len();
        let m = features.len();
        if n == 0 || m == 0 {
            return Err(DatasetError::Empty);
        }
        if values.len() != n * m {
            return Err(DatasetError::ShapeMismatch {
                n,
                m,
                expected: n * m,
                got: values.len(),
            });
        }
        if labels.len() != n {
            return Err(DatasetError::ShapeMismatch {
                n,
                m: 1,
                expected: n,
                got: labels.len(),
            });
        }
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.as_str()) {
                return Err(DatasetError::DuplicateFeature(f.clone()));
            }
        }
        let mut seen = HashSet::new();
        for e in &examples {
            if !seen.insert(e.as_str()) {
                return Err(DatasetError::DuplicateExample(e.clone()));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DatasetError::NonFiniteValue {
                    row: i / m,
                    feature: i % m,
                });
            }
        }
        // Class order = first occurrence in the label vector.
        let mut classes: Vec<String> = Vec::new();
        let mut label_codes = Vec::with_capacity(n);
        for (row, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(DatasetError::EmptyLabel { row });
            }
            let code = match classes.iter().position(|c| c == label) {
                Some(idx) => idx as u32,
                None => {
                    classes.push(label.clone());
                    (classes.len() - 1) as u32
                }
            };
            label_codes.push(code);
        }
        Ok(Dataset {
            examples,
            features,
            values,
            label_codes,
            classes,
        })
    }

    /// Convenience constructor: rows of values plus labels, example ids are
    /// the row ordinals.
    pub fn from_rows(
        features: Vec<String>,
        rows: Vec<Vec<S>>,
        labels: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let n = rows.len();
        let m = features.len();
        let examples = (0..n).map(|i| i.to_string()).collect();
        let mut values = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(DatasetError::ShapeMismatch {
                    n,
                    m,
                    expected: m,
                    got: row.len(),
                });
            }
            values.extend(row);
        }
        Self::new(examples, features, values, labels)
    }

    /// Load a labeled dataset from a UTF-8, comma-separated file with one
    /// header row. The label column is selected by `options.label` (default:
    /// last column); every other column must parse as a finite real.
    ///
    /// Missing cells (empty, `na`, `nan`, any case) are an error unless
    /// `options.impute_mean` is set, in which case they are filled with the
    /// per-feature mean of the observed values.
    pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<Self, DatasetError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => DatasetError::Io {
                    path: path.to_path_buf(),
                    source: std::io::Error::other(e.to_string()),
                },
                _ => DatasetError::Csv {
                    path: path.to_path_buf(),
                    source: e,
                },
            })?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| DatasetError::Csv {
                path: path.to_path_buf(),
                source: e,
            })?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if headers.is_empty() {
            return Err(DatasetError::Empty);
        }
        let label_idx = match &options.label {
            LabelSpec::Last => headers.len() - 1,
            LabelSpec::Index(i) => {
                if *i >= headers.len() {
                    return Err(DatasetError::MissingLabelColumn(i.to_string()));
                }
                *i
            }
            LabelSpec::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatasetError::MissingLabelColumn(name.clone()))?,
        };
        let features: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_idx)
            .map(|(_, h)| h.clone())
            .collect();
        if features.is_empty() {
            return Err(DatasetError::Empty);
        }

        // Cells are parsed into Option<S>; None marks a missing value that
        // mean imputation may fill afterwards.
        let mut cells: Vec<Option<S>> = Vec::new();
        let mut labels: Vec<String> = Vec::new();
        for (row_no, record) in reader.records().enumerate() {
            let record = record.map_err(|e| DatasetError::Csv {
                path: path.to_path_buf(),
                source: e,
            })?;
            let mut col_no = 0usize;
            for (i, raw) in record.iter().enumerate() {
                if i == label_idx {
                    let label = raw.trim();
                    if label.is_empty() {
                        return Err(DatasetError::EmptyLabel { row: row_no });
                    }
                    labels.push(label.to_string());
                    continue;
                }
                let column = features
                    .get(col_no)
                    .cloned()
                    .unwrap_or_else(|| format!("#{col_no}"));
                col_no += 1;
                let trimmed = raw.trim();
                if is_missing(trimmed) {
                    if options.impute_mean {
                        cells.push(None);
                        continue;
                    }
                    return Err(DatasetError::MissingValue {
                        row: row_no,
                        column,
                    });
                }
                let parsed: f64 = trimmed.parse().map_err(|_| DatasetError::BadCell {
                    row: row_no,
                    column: column.clone(),
                    value: trimmed.to_string(),
                })?;
                if !parsed.is_finite() {
                    return Err(DatasetError::BadCell {
                        row: row_no,
                        column,
                        value: trimmed.to_string(),
                    });
                }
                cells.push(Some(S::cast(parsed)));
            }
            if labels.len() != row_no + 1 {
                // The row was shorter than the header and never reached the
                // label column.
                return Err(DatasetError::MissingValue {
                    row: row_no,
                    column: headers[label_idx].clone(),
                });
            }
        }
        let n = labels.len();
        let m = features.len();
        if n == 0 {
            return Err(DatasetError::Empty);
        }

        let mut values: Vec<S> = Vec::with_capacity(n * m);
        if options.impute_mean {
            let mut means = vec![S::zero(); m];
            for (j, mean) in means.iter_mut().enumerate() {
                let mut sum = S::zero();
                let mut count = 0usize;
                for row in 0..n {
                    if let Some(v) = cells[row * m + j] {
                        sum = sum + v;
                        count += 1;
                    }
                }
                if count == 0 {
                    return Err(DatasetError::NothingToImpute {
                        column: features[j].clone(),
                    });
                }
                *mean = sum / S::cast_usize(count);
            }
            for (idx, cell) in cells.iter().enumerate() {
                values.push(cell.unwrap_or(means[idx % m]));
            }
        } else {
            values.extend(cells.into_iter().map(|c| c.expect("checked above")));
        }

        let examples = (0..n).map(|i| i.to_string()).collect();
        let dataset = Self::new(examples, features, values, labels)?;
        if dataset.n_classes() < 2 {
            return Err(DatasetError::TooFewClasses {
                found: dataset.n_classes(),
            });
        }
        Ok(dataset)
    }

    pub fn n_examples(&self) -> usize {
        self.examples.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn examples(&self) -> &[String] {
        &self.examples
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    /// Distinct class labels in first-occurrence order.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Per-example class codes (indices into [`Dataset::classes`]).
    pub fn label_codes(&self) -> &[u32] {
        &self.label_codes
    }

    pub fn class_label(&self, code: u32) -> &str {
        &self.classes[code as usize]
    }

    pub fn class_code(&self, label: &str) -> Option<u32> {
        self.classes.iter().position(|c| c == label).map(|i| i as u32)
    }

    pub fn label_of(&self, row: usize) -> &str {
        self.class_label(self.label_codes[row])
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> S {
        self.values[row * self.features.len() + feature]
    }

    /// All feature values of one example, in feature order.
    pub fn row(&self, row: usize) -> &[S] {
        let m = self.features.len();
        &self.values[row * m..(row + 1) * m]
    }

    /// Group example indices by class, preserving dataset order within each
    /// class.
    pub fn partition_by_class(&self) -> ClassPartition {
        let mut members = vec![Vec::new(); self.classes.len()];
        for (row, &code) in self.label_codes.iter().enumerate() {
            members[code as usize].push(row);
        }
        ClassPartition { members }
    }

    /// Relabel all examples as POS (class == `positive`) versus NEG (rest).
    /// A view over the full dataset; values are untouched.
    pub fn binarize(&self, positive: &str) -> Result<BinarizedView<'_, S>, DatasetError> {
        let code = self
            .class_code(positive)
            .ok_or_else(|| DatasetError::UnknownClass(positive.to_string()))?;
        Ok(BinarizedView {
            dataset: self,
            positive: code,
        })
    }

    /// View restricted to the examples of two classes, in dataset order.
    pub fn pair_view(&self, p: &str, q: &str) -> Result<PairView<'_, S>, DatasetError> {
        if p == q {
            return Err(DatasetError::IdenticalPairClasses(p.to_string()));
        }
        let pc = self
            .class_code(p)
            .ok_or_else(|| DatasetError::UnknownClass(p.to_string()))?;
        let qc = self
            .class_code(q)
            .ok_or_else(|| DatasetError::UnknownClass(q.to_string()))?;
        let rows = self
            .label_codes
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == pc || c == qc)
            .map(|(i, _)| i)
            .collect();
        Ok(PairView {
            dataset: self,
            pair: (pc, qc),
            rows,
        })
    }

    /// Copy of the dataset restricted to `rows` (in the given order). The
    /// class list and its order are inherited from the parent even when a
    /// class has no surviving example; callers that need full class coverage
    /// check the resulting counts.
    pub fn subset(&self, rows: &[usize]) -> Dataset<S> {
        let m = self.features.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        let mut label_codes = Vec::with_capacity(rows.len());
        let mut examples = Vec::with_capacity(rows.len());
        for &r in rows {
            values.extend_from_slice(self.row(r));
            label_codes.push(self.label_codes[r]);
            examples.push(self.examples[r].clone());
        }
        Dataset {
            examples,
            features: self.features.clone(),
            values,
            label_codes,
            classes: self.classes.clone(),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

/// Example indices grouped by class code. Lists are disjoint and cover the
/// whole dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    members: Vec<Vec<usize>>,
}

impl ClassPartition {
    pub fn n_classes(&self) -> usize {
        self.members.len()
    }

    /// Example indices of one class, in dataset order.
    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.len()).collect()
    }

    pub fn total(&self) -> usize {
        self.members.iter().map(|m| m.len()).sum()
    }
}

/// A labeled set of examples a relevance measure can be computed on: the
/// full dataset, a binarized relabeling, or a class pair restriction.
///
/// `label_code` returns view-local codes starting at 0; only their identity
/// structure matters to the information measures.
pub trait LabeledView<S: Scalar> {
    fn dataset(&self) -> &Dataset<S>;

    /// Number of examples visible through the view.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parent dataset row of the `pos`-th example in the view.
    fn parent_row(&self, pos: usize) -> usize;

    /// View-local label code of the `pos`-th example.
    fn label_code(&self, pos: usize) -> u32;

    fn value(&self, pos: usize, feature: usize) -> S {
        self.dataset().value(self.parent_row(pos), feature)
    }
}

impl<S: Scalar> LabeledView<S> for Dataset<S> {
    fn dataset(&self) -> &Dataset<S> {
        self
    }

    fn len(&self) -> usize {
        self.n_examples()
    }

    fn parent_row(&self, pos: usize) -> usize {
        pos
    }

    fn label_code(&self, pos: usize) -> u32 {
        self.label_codes[pos]
    }
}

/// One-versus-rest relabeling of a dataset: POS (code 0) for the chosen
/// class, NEG (code 1) for everything else. Covers all n examples.
#[derive(Debug, Clone, Copy)]
pub struct BinarizedView<'a, S> {
    dataset: &'a Dataset<S>,
    positive: u32,
}

impl<'a, S: Scalar> BinarizedView<'a, S> {
    pub fn positive_class(&self) -> &str {
        self.dataset.class_label(self.positive)
    }

    pub fn positive_code(&self) -> u32 {
        self.positive
    }

    pub fn pos_count(&self) -> usize {
        self.dataset
            .label_codes()
            .iter()
            .filter(|&&c| c == self.positive)
            .count()
    }

    pub fn neg_count(&self) -> usize {
        self.dataset.n_examples() - self.pos_count()
    }
}

impl<'a, S: Scalar> LabeledView<S> for BinarizedView<'a, S> {
    fn dataset(&self) -> &Dataset<S> {
        self.dataset
    }

    fn len(&self) -> usize {
        self.dataset.n_examples()
    }

    fn parent_row(&self, pos: usize) -> usize {
        pos
    }

    fn label_code(&self, pos: usize) -> u32 {
        u32::from(self.dataset.label_codes()[pos] != self.positive)
    }
}

/// Restriction of a dataset to the examples of two classes. Holds an index
/// list (dataset order), not a copy of the values.
#[derive(Debug, Clone)]
pub struct PairView<'a, S> {
    dataset: &'a Dataset<S>,
    pair: (u32, u32),
    rows: Vec<usize>,
}

impl<'a, S: Scalar> PairView<'a, S> {
    pub fn pair(&self) -> (&str, &str) {
        (
            self.dataset.class_label(self.pair.0),
            self.dataset.class_label(self.pair.1),
        )
    }

    pub fn pair_codes(&self) -> (u32, u32) {
        self.pair
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }
}

impl<'a, S: Scalar> LabeledView<S> for PairView<'a, S> {
    fn dataset(&self) -> &Dataset<S> {
        self.dataset
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn parent_row(&self, pos: usize) -> usize {
        self.rows[pos]
    }

    fn label_code(&self, pos: usize) -> u32 {
        u32::from(self.dataset.label_codes()[self.rows[pos]] != self.pair.0)
    }
}

impl<S> fmt::Display for Dataset<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Dataset({} examples x {} features, {} classes)",
            self.examples.len(),
            self.features.len(),
            self.classes.len()
        )
    }
}
