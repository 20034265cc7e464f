//! The class-specific relevance matrix: an upper-triangular L×L grid of
//! feature sets factorizing a pairwise relevance table at a threshold.
//!
//! Diagonal cell p holds the features relevant for p against every other
//! class; off-diagonal cell (p, q) holds the pair-specific extras beyond the
//! two diagonals. Empty cells are kept (and serialized as empty arrays) so
//! schemes can tell "no discriminative feature" apart from "no such pair".

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::selection::{unordered_pairs, PairwiseRelevanceTable, RelevanceThreshold};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("unknown class label {0:?}")]
    UnknownClass(String),
    #[error("a pair needs two distinct classes, got {0:?} twice")]
    IdenticalPair(String),
    #[error("malformed relevance matrix: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixWire<S>", try_from = "MatrixWire<S>")]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ClassSpecificRelevanceMatrix<S: Scalar> {
    classes: Vec<String>,
    features: Vec<String>,
    tau: S,
    /// Per-class feature indices, sorted ascending.
    diagonal: Vec<Vec<usize>>,
    /// Per unordered pair (p < q, lexicographic by class position), sorted
    /// feature indices that are pair-relevant beyond the two diagonals.
    offdiag: Vec<Vec<usize>>,
}

/// Build the relevance matrix from a pairwise table: diag(p) collects the
/// features above the threshold in every pair involving p; cell (p, q) keeps
/// whatever else is above the threshold in that one pair.
pub fn build_matrix<S: Scalar>(
    t: &PairwiseRelevanceTable<S>,
    th: &RelevanceThreshold<S>,
) -> ClassSpecificRelevanceMatrix<S> {
    let l = t.classes().len();
    let relevant = t.relevant_features(th);
    let pairs = t.pairs();

    let diagonal: Vec<Vec<usize>> = (0..l)
        .map(|p| {
            let rows = t.rows_involving(p);
            let mut iter = rows.iter();
            let first = match iter.next() {
                Some(&r) => relevant[r].clone(),
                None => Vec::new(),
            };
            iter.fold(first, |acc, &r| {
                acc.into_iter()
                    .filter(|j| relevant[r].contains(j))
                    .collect()
            })
        })
        .collect();

    let offdiag: Vec<Vec<usize>> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(p, q))| {
            relevant[i]
                .iter()
                .copied()
                .filter(|j| !diagonal[p].contains(j) && !diagonal[q].contains(j))
                .collect()
        })
        .collect();

    ClassSpecificRelevanceMatrix {
        classes: t.classes().to_vec(),
        features: t.features().to_vec(),
        tau: th.tau(),
        diagonal,
        offdiag,
    }
}

impl<S: Scalar> ClassSpecificRelevanceMatrix<S> {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn tau(&self) -> S {
        self.tau
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Always-relevant feature indices of one class (the diagonal cell).
    pub fn diagonal(&self, class: usize) -> &[usize] {
        &self.diagonal[class]
    }

    pub fn diagonal_of(&self, label: &str) -> Result<&[usize], MatrixError> {
        Ok(&self.diagonal[self.class_index(label)?])
    }

    /// Pair-specific extras of the unordered pair {p, q}.
    pub fn offdiag(&self, p: usize, q: usize) -> &[usize] {
        let key = (p.min(q), p.max(q));
        let idx = unordered_pairs(self.classes.len())
            .iter()
            .position(|&pr| pr == key)
            .expect("pair indices in range");
        &self.offdiag[idx]
    }

    pub fn offdiag_of(&self, p: &str, q: &str) -> Result<&[usize], MatrixError> {
        if p == q {
            return Err(MatrixError::IdenticalPair(p.to_string()));
        }
        Ok(self.offdiag(self.class_index(p)?, self.class_index(q)?))
    }

    /// Reconstruct the full relevant set of a pair: diag(p) ∪ diag(q) ∪
    /// cell(p, q), sorted by feature index. Equals the thresholded row of the
    /// source table.
    pub fn pair_relevant_set(&self, p: &str, q: &str) -> Result<Vec<usize>, MatrixError> {
        if p == q {
            return Err(MatrixError::IdenticalPair(p.to_string()));
        }
        let pi = self.class_index(p)?;
        let qi = self.class_index(q)?;
        let mut set: Vec<usize> = self.diagonal[pi]
            .iter()
            .chain(self.diagonal[qi].iter())
            .chain(self.offdiag(pi, qi).iter())
            .copied()
            .collect();
        set.sort_unstable();
        set.dedup();
        Ok(set)
    }

    /// Unordered class-index pairs in off-diagonal cell order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        unordered_pairs(self.classes.len())
    }

    fn class_index(&self, label: &str) -> Result<usize, MatrixError> {
        self.classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| MatrixError::UnknownClass(label.to_string()))
    }

    fn feature_names(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&j| self.features[j].clone()).collect()
    }
}

/// Wire format: feature sets spelled out by name, diagonal keyed by class
/// label, off-diagonal cells listed with their pair.
#[derive(Serialize, Deserialize)]
struct MatrixWire<S> {
    classes: Vec<String>,
    features: Vec<String>,
    tau: S,
    diagonal: BTreeMap<String, Vec<String>>,
    offdiag: Vec<OffDiagCell>,
}

#[derive(Serialize, Deserialize)]
struct OffDiagCell {
    pair: [String; 2],
    features: Vec<String>,
}

impl<S: Scalar> From<ClassSpecificRelevanceMatrix<S>> for MatrixWire<S> {
    fn from(m: ClassSpecificRelevanceMatrix<S>) -> Self {
        let diagonal = m
            .classes
            .iter()
            .enumerate()
            .map(|(p, c)| (c.clone(), m.feature_names(&m.diagonal[p])))
            .collect();
        let offdiag = m
            .pairs()
            .iter()
            .zip(m.offdiag.iter())
            .map(|(&(p, q), cell)| OffDiagCell {
                pair: [m.classes[p].clone(), m.classes[q].clone()],
                features: m.feature_names(cell),
            })
            .collect();
        MatrixWire {
            classes: m.classes,
            features: m.features,
            tau: m.tau,
            diagonal,
            offdiag,
        }
    }
}

impl<S: Scalar> TryFrom<MatrixWire<S>> for ClassSpecificRelevanceMatrix<S> {
    type Error = String;

    fn try_from(w: MatrixWire<S>) -> Result<Self, String> {
        let feature_index = |name: &str| -> Result<usize, String> {
            w.features
                .iter()
                .position(|f| f == name)
                .ok_or_else(|| format!("unknown feature {name:?} in relevance matrix"))
        };
        let to_indices = |names: &[String]| -> Result<Vec<usize>, String> {
            let mut v = names
                .iter()
                .map(|n| feature_index(n))
                .collect::<Result<Vec<_>, _>>()?;
            v.sort_unstable();
            Ok(v)
        };

        let mut diagonal = Vec::with_capacity(w.classes.len());
        for class in &w.classes {
            let names = w
                .diagonal
                .get(class)
                .ok_or_else(|| format!("diagonal cell missing for class {class:?}"))?;
            diagonal.push(to_indices(names)?);
        }

        let pairs = unordered_pairs(w.classes.len());
        if w.offdiag.len() != pairs.len() {
            return Err(format!(
                "{} classes need {} off-diagonal cells, got {}",
                w.classes.len(),
                pairs.len(),
                w.offdiag.len()
            ));
        }
        let mut offdiag = Vec::with_capacity(pairs.len());
        for (cell, &(p, q)) in w.offdiag.iter().zip(pairs.iter()) {
            if cell.pair[0] != w.classes[p] || cell.pair[1] != w.classes[q] {
                return Err(format!(
                    "off-diagonal cell [{}, {}] out of order; expected [{}, {}]",
                    cell.pair[0], cell.pair[1], w.classes[p], w.classes[q]
                ));
            }
            offdiag.push(to_indices(&cell.features)?);
        }

        Ok(ClassSpecificRelevanceMatrix {
            classes: w.classes,
            features: w.features,
            tau: w.tau,
            diagonal,
            offdiag,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::PairwiseRelevanceTable;

    fn names(prefix: &str, k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("{prefix}{i}")).collect()
    }

    fn th(tau: f64) -> RelevanceThreshold<f64> {
        RelevanceThreshold::new(tau).unwrap()
    }

    fn small_table() -> PairwiseRelevanceTable<f64> {
        // 3 classes, 3 features; pair rows XY, XZ, YZ.
        PairwiseRelevanceTable::new(
            vec!["X".into(), "Y".into(), "Z".into()],
            names("f", 3),
            vec![
                vec![0.9, 0.6, 0.1], // XY
                vec![0.8, 0.2, 0.1], // XZ
                vec![0.7, 0.1, 0.9], // YZ
            ],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_requires_all_pairs_above_tau() {
        let m = build_matrix(&small_table(), &th(0.5));
        // f1 exceeds 0.5 in every row, so it sits on every diagonal.
        assert_eq!(m.diagonal(0), &[0]);
        assert_eq!(m.diagonal(1), &[0]);
        assert_eq!(m.diagonal(2), &[0]);
        // f2 is relevant only in XY: pair-specific extra.
        assert_eq!(m.offdiag(0, 1), &[1]);
        assert_eq!(m.offdiag(0, 2), &[] as &[usize]);
        assert_eq!(m.offdiag(1, 2), &[2]);
    }

    #[test]
    fn all_scores_below_tau_gives_empty_matrix() {
        let t = PairwiseRelevanceTable::new(
            vec!["X".into(), "Y".into(), "Z".into()],
            names("f", 2),
            vec![vec![0.5, 0.2], vec![0.1, 0.5], vec![0.0, 0.3]],
        )
        .unwrap();
        let m = build_matrix(&t, &th(0.5));
        for p in 0..3 {
            assert!(m.diagonal(p).is_empty());
        }
        for &(p, q) in &m.pairs() {
            assert!(m.offdiag(p, q).is_empty());
            assert!(m
                .pair_relevant_set(&m.classes()[p].clone(), &m.classes()[q].clone())
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn two_class_matrix_is_forced_by_definitions() {
        let t = PairwiseRelevanceTable::new(
            vec!["P".into(), "Q".into()],
            names("f", 3),
            vec![vec![0.9, 0.3, 0.7]],
        )
        .unwrap();
        let m = build_matrix(&t, &th(0.5));
        assert_eq!(m.diagonal(0), &[0, 2]);
        assert_eq!(m.diagonal(1), &[0, 2]);
        assert_eq!(m.offdiag(0, 1), &[] as &[usize]);
    }

    #[test]
    fn pair_relevant_set_round_trips_the_table() {
        let t = small_table();
        let m = build_matrix(&t, &th(0.5));
        let threshold = th(0.5);
        let relevant = t.relevant_features(&threshold);
        for (i, &(p, q)) in t.pairs().iter().enumerate() {
            let set = m
                .pair_relevant_set(&t.classes()[p].clone(), &t.classes()[q].clone())
                .unwrap();
            assert_eq!(set, relevant[i]);
        }
    }

    #[test]
    fn unknown_class_is_an_error() {
        let m = build_matrix(&small_table(), &th(0.5));
        assert!(matches!(
            m.pair_relevant_set("X", "nope"),
            Err(MatrixError::UnknownClass(_))
        ));
        assert!(matches!(
            m.pair_relevant_set("X", "X"),
            Err(MatrixError::IdenticalPair(_))
        ));
    }

    #[test]
    fn raising_tau_never_grows_a_diagonal() {
        let t = small_table();
        let lo = build_matrix(&t, &th(0.3));
        let hi = build_matrix(&t, &th(0.7));
        for p in 0..3 {
            for j in hi.diagonal(p) {
                assert!(lo.diagonal(p).contains(j));
            }
        }
    }

    #[test]
    fn json_round_trip_keeps_empty_cells() {
        let m = build_matrix(&small_table(), &th(0.5));
        let json = serde_json::to_string(&m).unwrap();
        // The empty (X, Z) cell is serialized, not omitted.
        assert!(json.contains("\"pair\":[\"X\",\"Z\"],\"features\":[]"));
        let back: ClassSpecificRelevanceMatrix<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
