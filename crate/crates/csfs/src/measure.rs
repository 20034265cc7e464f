//! Discretization and normalized information-theoretic relevance measures.
//!
//! Every registered measure maps a (feature, labeled view) pair to a score in
//! [0, 1]. Scores are computed from empirical counts in bits (log base 2).
//!
//! Entropy and mutual information accumulate their per-cell terms in sorted
//! order, so the results are invariant, bit for bit, under relabeling of
//! symbols, reordering of rows, and swapping of arguments. That is what makes
//! `su(x, x) == 1` and `mi == 0` on exact product joints hold without any
//! tolerance.

use std::collections::HashMap;
use std::hash::Hash;

use thiserror::Error;

use crate::dataset::{Dataset, LabeledView};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("input vector is empty")]
    EmptyInput,
    #[error("input vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("feature index {feature} out of range (dataset has {count})")]
    FeatureOutOfRange { feature: usize, count: usize },
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),
}

/// How continuous columns are binned before the information measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningMethod {
    EqualWidth,
    EqualFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DiscretizationSpec {
    pub method: BinningMethod,
    pub bins: usize,
}

impl DiscretizationSpec {
    pub fn new(method: BinningMethod, bins: usize) -> Result<Self, MeasureError> {
        let spec = DiscretizationSpec { method, bins };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.bins < 2 {
            return Err(MeasureError::InvalidDiscretization(format!(
                "bin count must be at least 2, got {}",
                self.bins
            )));
        }
        Ok(())
    }
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        DiscretizationSpec {
            method: BinningMethod::EqualFrequency,
            bins: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    SymmetricUncertainty,
    NormalizedInformationGain,
}

/// Full configuration of the `measure` function: which normalized measure to
/// use and how to bin. `global_bins` switches from per-view binning (the
/// default; bin edges reflect the restricted view) to one dataset-wide
/// binning shared by all views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub discretization: DiscretizationSpec,
    pub global_bins: bool,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec {
            kind: MeasureKind::SymmetricUncertainty,
            discretization: DiscretizationSpec::default(),
            global_bins: false,
        }
    }
}

/// Map a column of reals to bin indices in `0..spec.bins`.
///
/// Equal-width splits [min, max] evenly; a constant column lands in bin 0.
/// Equal-frequency assigns by rank (ties keep the bin of their first
/// occurrence, so equal values never split across bins), with the sort key
/// (value, row index) making the assignment deterministic.
pub fn discretize<S: Scalar>(column: &[S], spec: &DiscretizationSpec) -> Vec<u32> {
    let n = column.len();
    if n == 0 {
        return Vec::new();
    }
    let k = spec.bins.max(1);
    match spec.method {
        BinningMethod::EqualWidth => {
            let mut min = column[0];
            let mut max = column[0];
            for &v in column.iter().skip(1) {
                if v < min {
                    min = v;
                }
                if v > max {
                    max = v;
                }
            }
            if min == max {
                return vec![0; n];
            }
            let width = (max - min) / S::cast_usize(k);
            column
                .iter()
                .map(|&v| {
                    let b = ((v - min) / width).to_usize().unwrap_or(0);
                    b.min(k - 1) as u32
                })
                .collect()
        }
        BinningMethod::EqualFrequency => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                column[a]
                    .partial_cmp(&column[b])
                    .expect("dataset values are finite")
                    .then(a.cmp(&b))
            });
            let mut bins = vec![0u32; n];
            let mut prev_bin = 0u32;
            for (rank, &idx) in order.iter().enumerate() {
                let mut bin = (rank * k / n) as u32;
                if rank > 0 && column[idx] == column[order[rank - 1]] {
                    bin = prev_bin;
                }
                bins[idx] = bin;
                prev_bin = bin;
            }
            bins
        }
    }
}

/// Shannon entropy of a symbol vector, in bits.
pub fn entropy<S: Scalar, T: Eq + Hash>(symbols: &[T]) -> Result<S, MeasureError> {
    if symbols.is_empty() {
        return Err(MeasureError::EmptyInput);
    }
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for s in symbols {
        *counts.entry(s).or_insert(0) += 1;
    }
    Ok(entropy_from_counts(counts.values().copied(), symbols.len()))
}

fn entropy_from_counts<S: Scalar>(counts: impl Iterator<Item = usize>, n: usize) -> S {
    let ns = S::cast_usize(n);
    let mut terms: Vec<S> = counts
        .map(|c| {
            let cs = S::cast_usize(c);
            (cs / ns) * (ns / cs).log2()
        })
        .collect();
    sorted_sum(&mut terms)
}

/// Mutual information between two symbol vectors, in bits. Computed cell by
/// cell as p(x,y)·log2(p(x,y) / (p(x)p(y))) with the ratio formed from exact
/// integer count products, so independent (product-form) joints sum to zero
/// with no residual.
pub fn mutual_information<S: Scalar, T: Eq + Hash, U: Eq + Hash>(
    x: &[T],
    y: &[U],
) -> Result<S, MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(MeasureError::EmptyInput);
    }
    let n = x.len();
    let mut joint: HashMap<(&T, &U), usize> = HashMap::new();
    let mut mx: HashMap<&T, usize> = HashMap::new();
    let mut my: HashMap<&U, usize> = HashMap::new();
    for (a, b) in x.iter().zip(y.iter()) {
        *joint.entry((a, b)).or_insert(0) += 1;
        *mx.entry(a).or_insert(0) += 1;
        *my.entry(b).or_insert(0) += 1;
    }
    let ns = S::cast_usize(n);
    let mut terms: Vec<S> = joint
        .iter()
        .map(|(&(a, b), &cxy)| {
            let p = S::cast_usize(cxy) / ns;
            let num = S::cast_usize(cxy * n);
            let den = S::cast_usize(mx[a] * my[b]);
            p * (num / den).log2()
        })
        .collect();
    let mi = sorted_sum(&mut terms);
    Ok(mi.max(S::zero()))
}

/// Symmetric uncertainty: 2·I(x;y) / (H(x) + H(y)), in [0, 1]. Returns 0 when
/// both inputs are constant (zero total entropy).
pub fn symmetric_uncertainty<S: Scalar, T: Eq + Hash, U: Eq + Hash>(
    x: &[T],
    y: &[U],
) -> Result<S, MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let hx: S = entropy(x)?;
    let hy: S = entropy(y)?;
    let denom = hx + hy;
    if denom == S::zero() {
        return Ok(S::zero());
    }
    let mi: S = mutual_information(x, y)?;
    let two = S::one() + S::one();
    Ok(clamp_unit(two * mi / denom))
}

/// Normalized information gain: I(x;y) / H(y), in [0, 1]. `y` is the label
/// side; returns 0 when the labels carry no entropy.
pub fn normalized_information_gain<S: Scalar, T: Eq + Hash, U: Eq + Hash>(
    x: &[T],
    y: &[U],
) -> Result<S, MeasureError> {
    if x.len() != y.len() {
        return Err(MeasureError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let hy: S = entropy(y)?;
    if hy == S::zero() {
        return Ok(S::zero());
    }
    let mi: S = mutual_information(x, y)?;
    Ok(clamp_unit(mi / hy))
}

fn clamp_unit<S: Scalar>(v: S) -> S {
    v.max(S::zero()).min(S::one())
}

/// Sum floats smallest-first so the result depends only on the multiset of
/// terms, never on map iteration or argument order.
fn sorted_sum<S: Scalar>(terms: &mut [S]) -> S {
    terms.sort_by(|a, b| a.partial_cmp(b).expect("information terms are finite"));
    let mut acc = S::zero();
    for &t in terms.iter() {
        acc = acc + t;
    }
    acc
}

/// Score one feature against the labels of a view: bin the column, then apply
/// the configured normalized measure. Deterministic for fixed inputs.
pub fn measure<S: Scalar, V: LabeledView<S>>(
    view: &V,
    feature: usize,
    spec: &MeasureSpec,
) -> Result<S, MeasureError> {
    spec.discretization.validate()?;
    if feature >= view.dataset().n_features() {
        return Err(MeasureError::FeatureOutOfRange {
            feature,
            count: view.dataset().n_features(),
        });
    }
    if view.is_empty() {
        return Err(MeasureError::EmptyInput);
    }
    let bins = if spec.global_bins {
        let parent = view.dataset();
        let column: Vec<S> = (0..parent.n_examples())
            .map(|r| parent.value(r, feature))
            .collect();
        let all = discretize(&column, &spec.discretization);
        (0..view.len()).map(|p| all[view.parent_row(p)]).collect()
    } else {
        let column: Vec<S> = (0..view.len()).map(|p| view.value(p, feature)).collect();
        discretize(&column, &spec.discretization)
    };
    let labels: Vec<u32> = (0..view.len()).map(|p| view.label_code(p)).collect();
    score_binned(&bins, &labels, spec.kind)
}

pub(crate) fn score_binned<S: Scalar>(
    bins: &[u32],
    labels: &[u32],
    kind: MeasureKind,
) -> Result<S, MeasureError> {
    match kind {
        MeasureKind::SymmetricUncertainty => symmetric_uncertainty(bins, labels),
        MeasureKind::NormalizedInformationGain => normalized_information_gain(bins, labels),
    }
}

/// Reusable scorer for one dataset. With `global_bins` set it bins every
/// column once up front and serves all views from that table; otherwise it
/// defers to per-view binning.
pub struct FeatureScorer<'d, S> {
    dataset: &'d Dataset<S>,
    spec: MeasureSpec,
    global: Option<Vec<Vec<u32>>>,
}

impl<'d, S: Scalar> FeatureScorer<'d, S> {
    pub fn new(dataset: &'d Dataset<S>, spec: MeasureSpec) -> Result<Self, MeasureError> {
        spec.discretization.validate()?;
        let global = if spec.global_bins {
            let n = dataset.n_examples();
            let table = (0..dataset.n_features())
                .map(|j| {
                    let column: Vec<S> = (0..n).map(|r| dataset.value(r, j)).collect();
                    discretize(&column, &spec.discretization)
                })
                .collect();
            Some(table)
        } else {
            None
        };
        Ok(FeatureScorer {
            dataset,
            spec,
            global,
        })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn score<V: LabeledView<S>>(&self, view: &V, feature: usize) -> Result<S, MeasureError> {
        if feature >= self.dataset.n_features() {
            return Err(MeasureError::FeatureOutOfRange {
                feature,
                count: self.dataset.n_features(),
            });
        }
        if view.is_empty() {
            return Err(MeasureError::EmptyInput);
        }
        let labels: Vec<u32> = (0..view.len()).map(|p| view.label_code(p)).collect();
        match &self.global {
            Some(table) => {
                let bins: Vec<u32> = (0..view.len())
                    .map(|p| table[feature][view.parent_row(p)])
                    .collect();
                score_binned(&bins, &labels, self.spec.kind)
            }
            None => {
                let column: Vec<S> = (0..view.len()).map(|p| view.value(p, feature)).collect();
                let bins = discretize(&column, &self.spec.discretization);
                score_binned(&bins, &labels, self.spec.kind)
            }
        }
    }
}
