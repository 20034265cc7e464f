//! Feature ranking strategies: traditional (global), one-versus-all,
//! one-versus-each, and deep one-versus-each, plus pairwise aggregation and
//! threshold extraction of relevant feature subsets.
//!
//! Strategy loops parallelize over features; every invocation of the
//! relevance measure is counted through an [`Instrumentation`] handle so the
//! call-count contracts (`ova`: m·L, `dove`: m·L(L−1)/2) can be verified
//! exactly.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, LabeledView};
use crate::measure::{FeatureScorer, MeasureError, MeasureSpec};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("selection requires at least 2 classes, dataset has {found}")]
    TooFewClasses { found: usize },
    #[error("relevance threshold must lie in [0, 1), got {0}")]
    ThresholdOutOfRange(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("malformed pairwise table: {0}")]
    MalformedTable(String),
}

/// Ranking strategy identifiers, also used in the JSON output schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Global,
    Ova,
    Ove,
    Dove,
}

/// Reduction of a class's pairwise scores into a single per-class value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    Mean,
    Min,
    Max,
}

impl Aggregate {
    fn apply<S: Scalar>(self, values: &[S]) -> S {
        match self {
            Aggregate::Mean => {
                let mut sum = S::zero();
                for &v in values {
                    sum = sum + v;
                }
                sum / S::cast_usize(values.len())
            }
            Aggregate::Min => values.iter().copied().fold(S::one(), S::min),
            Aggregate::Max => values.iter().copied().fold(S::zero(), S::max),
        }
    }
}

/// Relevance cutoff: a feature counts as relevant when its score is
/// strictly greater than `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceThreshold<S> {
    tau: S,
}

impl<S: Scalar> RelevanceThreshold<S> {
    pub fn new(tau: S) -> Result<Self, SelectionError> {
        if tau < S::zero() || tau >= S::one() {
            return Err(SelectionError::ThresholdOutOfRange(format!("{tau}")));
        }
        Ok(RelevanceThreshold { tau })
    }

    pub fn tau(&self) -> S {
        self.tau
    }

    #[inline]
    pub fn is_relevant(&self, score: S) -> bool {
        score > self.tau
    }
}

impl<S: Scalar> Default for RelevanceThreshold<S> {
    fn default() -> Self {
        RelevanceThreshold { tau: S::cast(0.5) }
    }
}

/// Thread-safe counter of relevance-measure invocations and the number of
/// examples each one touched.
#[derive(Debug, Default)]
pub struct Instrumentation {
    calls: AtomicU64,
    examples: AtomicU64,
}

impl Instrumentation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, examples: usize) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.examples.fetch_add(examples as u64, Ordering::Relaxed);
    }

    pub fn measure_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn examples_touched(&self) -> u64 {
        self.examples.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
        self.examples.store(0, Ordering::Relaxed);
    }
}

/// One score per feature, computed over the full dataset with its original
/// labels: the output shape of a traditional (class-independent) ranker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRanking<S> {
    pub classes: Vec<String>,
    pub features: Vec<String>,
    pub strategy: Strategy,
    pub scores: Vec<Vec<S>>,
}

impl<S: Scalar> GlobalRanking<S> {
    pub fn new(classes: Vec<String>, features: Vec<String>, scores: Vec<S>) -> Self {
        GlobalRanking {
            classes,
            features,
            strategy: Strategy::Global,
            scores: vec![scores],
        }
    }

    pub fn scores(&self) -> &[S] {
        &self.scores[0]
    }

    /// Indices of features whose score strictly exceeds the threshold, in
    /// feature order.
    pub fn relevant_features(&self, th: &RelevanceThreshold<S>) -> Vec<usize> {
        relevant_in_row(self.scores(), th)
    }
}

/// L×m matrix of per-class, per-feature relevance scores (the aggregated
/// class-specific result of the OvA and OvE strategies).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpecificRanking<S> {
    pub classes: Vec<String>,
    pub features: Vec<String>,
    pub strategy: Strategy,
    pub scores: Vec<Vec<S>>,
}

impl<S: Scalar> ClassSpecificRanking<S> {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_row(&self, class: usize) -> &[S] {
        &self.scores[class]
    }

    pub fn score(&self, class: usize, feature: usize) -> S {
        self.scores[class][feature]
    }

    /// Per-class relevant feature subsets (strict threshold), in class order.
    pub fn relevant_features(&self, th: &RelevanceThreshold<S>) -> Vec<Vec<usize>> {
        self.scores
            .iter()
            .map(|row| relevant_in_row(row, th))
            .collect()
    }

    /// Collapse the per-class rows into a single class-independent ranking.
    pub fn collapse(&self, agg: Aggregate) -> GlobalRanking<S> {
        let m = self.features.len();
        let scores = (0..m)
            .map(|j| {
                let column: Vec<S> = self.scores.iter().map(|row| row[j]).collect();
                agg.apply(&column)
            })
            .collect();
        GlobalRanking::new(self.classes.clone(), self.features.clone(), scores)
    }
}

/// One row of per-feature scores for every unordered class pair, in
/// lexicographic pair order by class position (AB, AC, AD, BC, BD, CD for
/// four classes). The un-aggregated output of deep one-versus-each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TableWire<S>", try_from = "TableWire<S>")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct PairwiseRelevanceTable<S: Scalar> {
    classes: Vec<String>,
    features: Vec<String>,
    pairs: Vec<(usize, usize)>,
    scores: Vec<Vec<S>>,
}

impl<S: Scalar> PairwiseRelevanceTable<S> {
    pub fn new(
        classes: Vec<String>,
        features: Vec<String>,
        scores: Vec<Vec<S>>,
    ) -> Result<Self, SelectionError> {
        let l = classes.len();
        if l < 2 {
            return Err(SelectionError::TooFewClasses { found: l });
        }
        let pairs = unordered_pairs(l);
        if scores.len() != pairs.len() {
            return Err(SelectionError::MalformedTable(format!(
                "{} classes need {} pair rows, got {}",
                l,
                pairs.len(),
                scores.len()
            )));
        }
        for row in &scores {
            if row.len() != features.len() {
                return Err(SelectionError::MalformedTable(format!(
                    "row has {} scores for {} features",
                    row.len(),
                    features.len()
                )));
            }
        }
        Ok(PairwiseRelevanceTable {
            classes,
            features,
            pairs,
            scores,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    /// Unordered class-index pairs in row order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn row(&self, index: usize) -> &[S] {
        &self.scores[index]
    }

    /// Row for the unordered pair {p, q}; the argument order is irrelevant.
    pub fn pair_row(&self, p: usize, q: usize) -> Option<&[S]> {
        let key = (p.min(q), p.max(q));
        self.pairs
            .iter()
            .position(|&pr| pr == key)
            .map(|i| self.scores[i].as_slice())
    }

    /// Row indices of all pairs involving the given class, in row order.
    pub fn rows_involving(&self, class: usize) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, &(p, q))| p == class || q == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Per-pair relevant feature subsets (strict threshold), in row order.
    pub fn relevant_features(&self, th: &RelevanceThreshold<S>) -> Vec<Vec<usize>> {
        self.scores
            .iter()
            .map(|row| relevant_in_row(row, th))
            .collect()
    }
}

/// Wire format of the pairwise table: pairs spelled out as label pairs.
#[derive(Serialize, Deserialize)]
struct TableWire<S> {
    classes: Vec<String>,
    features: Vec<String>,
    strategy: Strategy,
    pairs: Vec<[String; 2]>,
    scores: Vec<Vec<S>>,
}

impl<S: Scalar> From<PairwiseRelevanceTable<S>> for TableWire<S> {
    fn from(t: PairwiseRelevanceTable<S>) -> Self {
        let pairs = t
            .pairs
            .iter()
            .map(|&(p, q)| [t.classes[p].clone(), t.classes[q].clone()])
            .collect();
        TableWire {
            classes: t.classes,
            features: t.features,
            strategy: Strategy::Dove,
            pairs,
            scores: t.scores,
        }
    }
}

impl<S: Scalar> TryFrom<TableWire<S>> for PairwiseRelevanceTable<S> {
    type Error = String;

    fn try_from(w: TableWire<S>) -> Result<Self, String> {
        let table = PairwiseRelevanceTable::new(w.classes, w.features, w.scores)
            .map_err(|e| e.to_string())?;
        // The pair labels are redundant with the class order; verify them.
        for (i, pair) in w.pairs.iter().enumerate() {
            let (p, q) = table.pairs[i];
            if table.classes[p] != pair[0] || table.classes[q] != pair[1] {
                return Err(format!(
                    "pair row {i} is [{}, {}] but class order implies [{}, {}]",
                    pair[0], pair[1], table.classes[p], table.classes[q]
                ));
            }
        }
        Ok(table)
    }
}

fn relevant_in_row<S: Scalar>(row: &[S], th: &RelevanceThreshold<S>) -> Vec<usize> {
    row.iter()
        .enumerate()
        .filter(|(_, &s)| th.is_relevant(s))
        .map(|(j, _)| j)
        .collect()
}

/// All unordered index pairs (p < q) in lexicographic order.
pub fn unordered_pairs(l: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(l * (l - 1) / 2);
    for p in 0..l {
        for q in (p + 1)..l {
            pairs.push((p, q));
        }
    }
    pairs
}

fn require_multiclass<S: Scalar>(d: &Dataset<S>) -> Result<(), SelectionError> {
    if d.n_classes() < 2 {
        return Err(SelectionError::TooFewClasses {
            found: d.n_classes(),
        });
    }
    Ok(())
}

/// Traditional class-independent ranking: one measure call per feature over
/// the full dataset with its original L-class labels.
pub fn rank_global<S: Scalar>(
    d: &Dataset<S>,
    spec: &MeasureSpec,
    instr: &Instrumentation,
) -> Result<GlobalRanking<S>, SelectionError> {
    require_multiclass(d)?;
    let scorer = FeatureScorer::new(d, *spec)?;
    let n = d.n_examples();
    let scores: Vec<S> = (0..d.n_features())
        .into_par_iter()
        .map(|j| {
            instr.record(n);
            scorer.score(d, j)
        })
        .collect::<Result<_, _>>()?;
    Ok(GlobalRanking::new(
        d.classes().to_vec(),
        d.features().to_vec(),
        scores,
    ))
}

/// One-versus-all: for each class p, score every feature on the dataset
/// relabeled as p versus the merged rest. Exactly m·L measure calls.
pub fn ova<S: Scalar>(
    d: &Dataset<S>,
    spec: &MeasureSpec,
    instr: &Instrumentation,
) -> Result<ClassSpecificRanking<S>, SelectionError> {
    require_multiclass(d)?;
    let scorer = FeatureScorer::new(d, *spec)?;
    let n = d.n_examples();
    let mut rows = Vec::with_capacity(d.n_classes());
    for p in d.classes() {
        let view = d.binarize(p).expect("class label comes from the dataset");
        let row: Vec<S> = (0..d.n_features())
            .into_par_iter()
            .map(|j| {
                instr.record(n);
                scorer.score(&view, j)
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok(ClassSpecificRanking {
        classes: d.classes().to_vec(),
        features: d.features().to_vec(),
        strategy: Strategy::Ova,
        scores: rows,
    })
}

/// Deep one-versus-each: keep the full per-pair score table instead of
/// aggregating. Each unordered pair is computed once, so exactly
/// m·L(L−1)/2 measure calls.
pub fn dove<S: Scalar>(
    d: &Dataset<S>,
    spec: &MeasureSpec,
    instr: &Instrumentation,
) -> Result<PairwiseRelevanceTable<S>, SelectionError> {
    require_multiclass(d)?;
    let scorer = FeatureScorer::new(d, *spec)?;
    let classes = d.classes();
    let mut rows = Vec::new();
    for (p, q) in unordered_pairs(classes.len()) {
        let view = d
            .pair_view(&classes[p], &classes[q])
            .expect("class labels come from the dataset");
        let pair_n = view.len();
        let row: Vec<S> = (0..d.n_features())
            .into_par_iter()
            .map(|j| {
                instr.record(pair_n);
                scorer.score(&view, j)
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    PairwiseRelevanceTable::new(classes.to_vec(), d.features().to_vec(), rows)
}

/// Fold the pairwise table into an L×m class-specific ranking: the score of
/// (class p, feature j) aggregates the rows of all pairs involving p.
pub fn aggregate_pairwise<S: Scalar>(
    t: &PairwiseRelevanceTable<S>,
    agg: Aggregate,
) -> ClassSpecificRanking<S> {
    let m = t.features().len();
    let scores = (0..t.classes().len())
        .map(|p| {
            let rows = t.rows_involving(p);
            (0..m)
                .map(|j| {
                    let values: Vec<S> = rows.iter().map(|&r| t.row(r)[j]).collect();
                    agg.apply(&values)
                })
                .collect()
        })
        .collect();
    ClassSpecificRanking {
        classes: t.classes().to_vec(),
        features: t.features().to_vec(),
        strategy: Strategy::Ove,
        scores,
    }
}

/// One-versus-each: pairwise scores aggregated per class. By construction
/// identical to `aggregate_pairwise(dove(..), agg)`.
pub fn ove<S: Scalar>(
    d: &Dataset<S>,
    spec: &MeasureSpec,
    agg: Aggregate,
    instr: &Instrumentation,
) -> Result<ClassSpecificRanking<S>, SelectionError> {
    let table = dove(d, spec, instr)?;
    Ok(aggregate_pairwise(&table, agg))
}
