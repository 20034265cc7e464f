//! Probabilistic base classifiers used as nodes of the ensemble schemes.
//!
//! Nodes are trained on a restricted set of examples (given as dataset rows
//! plus node-local labels) and a restricted feature subset, and always emit a
//! probability distribution over the node's own classes. Two kinds are built
//! in: Gaussian naive Bayes and a nearest-centroid classifier whose distances
//! are turned into probabilities by a temperature-scaled softmax.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("node-local class {class} has no training example")]
    EmptyClass { class: usize },
    #[error("a node needs at least one input feature")]
    EmptyFeatureSet,
    #[error("a node needs at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("input has {got} values, node expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),
    #[error("label vector has {got} entries for {expected} training rows")]
    LabelCountMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for {classes} node classes")]
    LabelOutOfRange { label: u32, classes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    GaussianNaiveBayes,
    NearestCentroid,
}

/// Configuration of a base node: which classifier, the variance floor for
/// Gaussian naive Bayes (relative to the pooled per-feature variance), and
/// the softmax temperature for nearest-centroid scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseClassifierSpec<S> {
    pub kind: BaseKind,
    pub smoothing: S,
    pub temperature: S,
}

impl<S: Scalar> Default for BaseClassifierSpec<S> {
    fn default() -> Self {
        BaseClassifierSpec {
            kind: BaseKind::GaussianNaiveBayes,
            smoothing: S::cast(1e-9),
            temperature: S::one(),
        }
    }
}

impl<S: Scalar> BaseClassifierSpec<S> {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.smoothing.is_nan() || self.smoothing <= S::zero() {
            return Err(ClassifierError::InvalidSpec(format!(
                "variance floor must be positive, got {}",
                self.smoothing
            )));
        }
        if self.temperature.is_nan() || self.temperature <= S::zero() {
            return Err(ClassifierError::InvalidSpec(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NodeParams<S> {
    Gaussian {
        /// Per-class, per-feature sample means.
        means: Vec<Vec<S>>,
        /// Per-class, per-feature variances, floored away from zero.
        variances: Vec<Vec<S>>,
    },
    Centroid {
        centroids: Vec<Vec<S>>,
        temperature: S,
    },
}

/// A fitted node: the feature subset it reads, its class count, training
/// priors and fitted parameters. Immutable and freely shareable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedNode<S> {
    features: Vec<usize>,
    class_count: usize,
    priors: Vec<S>,
    params: NodeParams<S>,
}

/// Fit a node on the given dataset rows. `labels` are node-local codes in
/// `0..class_count` aligned with `rows`; every node-local class must have at
/// least one example and `features` must be non-empty (empty subsets are a
/// scheme-level concern, handled before training).
pub fn train_node<S: Scalar>(
    d: &Dataset<S>,
    rows: &[usize],
    labels: &[u32],
    class_count: usize,
    features: &[usize],
    spec: &BaseClassifierSpec<S>,
) -> Result<TrainedNode<S>, ClassifierError> {
    spec.validate()?;
    if features.is_empty() {
        return Err(ClassifierError::EmptyFeatureSet);
    }
    if class_count < 2 {
        return Err(ClassifierError::TooFewClasses(class_count));
    }
    if labels.len() != rows.len() {
        return Err(ClassifierError::LabelCountMismatch {
            expected: rows.len(),
            got: labels.len(),
        });
    }
    let mut counts = vec![0usize; class_count];
    for &l in labels {
        if l as usize >= class_count {
            return Err(ClassifierError::LabelOutOfRange {
                label: l,
                classes: class_count,
            });
        }
        counts[l as usize] += 1;
    }
    if let Some(class) = counts.iter().position(|&c| c == 0) {
        return Err(ClassifierError::EmptyClass { class });
    }

    let n = rows.len();
    let k = features.len();
    let priors: Vec<S> = counts
        .iter()
        .map(|&c| S::cast_usize(c) / S::cast_usize(n))
        .collect();

    // Per-class means over the restricted rows and features.
    let mut means = vec![vec![S::zero(); k]; class_count];
    for (&row, &label) in rows.iter().zip(labels.iter()) {
        for (f, &feature) in features.iter().enumerate() {
            means[label as usize][f] = means[label as usize][f] + d.value(row, feature);
        }
    }
    for (c, mean_row) in means.iter_mut().enumerate() {
        for m in mean_row.iter_mut() {
            *m = *m / S::cast_usize(counts[c]);
        }
    }

    let params = match spec.kind {
        BaseKind::NearestCentroid => NodeParams::Centroid {
            centroids: means,
            temperature: spec.temperature,
        },
        BaseKind::GaussianNaiveBayes => {
            let mut variances = vec![vec![S::zero(); k]; class_count];
            for (&row, &label) in rows.iter().zip(labels.iter()) {
                for (f, &feature) in features.iter().enumerate() {
                    let diff = d.value(row, feature) - means[label as usize][f];
                    variances[label as usize][f] = variances[label as usize][f] + diff * diff;
                }
            }
            // Pooled per-feature variance sets the scale of the floor, so a
            // within-class constant feature still gets a usable density.
            for f in 0..k {
                let feature = features[f];
                let mut sum = S::zero();
                for &row in rows {
                    sum = sum + d.value(row, feature);
                }
                let overall_mean = sum / S::cast_usize(n);
                let mut pooled = S::zero();
                for &row in rows {
                    let diff = d.value(row, feature) - overall_mean;
                    pooled = pooled + diff * diff;
                }
                pooled = pooled / S::cast_usize(n);
                let scale = if pooled > S::zero() { pooled } else { S::one() };
                let floor = spec.smoothing * scale;
                for (c, var_row) in variances.iter_mut().enumerate() {
                    let var = var_row[f] / S::cast_usize(counts[c]);
                    var_row[f] = var.max(floor);
                }
            }
            NodeParams::Gaussian { means, variances }
        }
    };

    Ok(TrainedNode {
        features: features.to_vec(),
        class_count,
        priors,
        params,
    })
}

impl<S: Scalar> TrainedNode<S> {
    /// Feature subset the node reads, as parent-dataset indices.
    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn priors(&self) -> &[S] {
        &self.priors
    }

    pub fn params(&self) -> &NodeParams<S> {
        &self.params
    }

    /// Probability distribution over the node's classes for an input vector
    /// already restricted to the node's feature subset (same order).
    pub fn predict_scores(&self, x: &[S]) -> Result<Vec<S>, ClassifierError> {
        if x.len() != self.features.len() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.features.len(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFiniteInput);
        }
        let logits: Vec<S> = match &self.params {
            NodeParams::Gaussian { means, variances } => (0..self.class_count)
                .map(|c| {
                    let mut log_post = self.priors[c].ln();
                    for (f, &v) in x.iter().enumerate() {
                        let mean = means[c][f];
                        let var = variances[c][f];
                        let two = S::one() + S::one();
                        let diff = v - mean;
                        log_post = log_post
                            - (two * S::PI() * var).ln() / two
                            - diff * diff / (two * var);
                    }
                    log_post
                })
                .collect(),
            NodeParams::Centroid {
                centroids,
                temperature,
            } => (0..self.class_count)
                .map(|c| {
                    let mut sq = S::zero();
                    for (f, &v) in x.iter().enumerate() {
                        let diff = v - centroids[c][f];
                        sq = sq + diff * diff;
                    }
                    -sq.sqrt() / *temperature
                })
                .collect(),
        };
        Ok(softmax(&logits))
    }

    /// Like [`TrainedNode::predict_scores`] but taking the full m-length
    /// feature vector and extracting the node's subset.
    pub fn predict_scores_full(&self, full: &[S]) -> Result<Vec<S>, ClassifierError> {
        let restricted: Vec<S> = self
            .features
            .iter()
            .map(|&j| {
                full.get(j)
                    .copied()
                    .ok_or(ClassifierError::DimensionMismatch {
                        expected: self.features.iter().copied().max().unwrap_or(0) + 1,
                        got: full.len(),
                    })
            })
            .collect::<Result<_, _>>()?;
        self.predict_scores(&restricted)
    }
}

fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    let max = logits
        .iter()
        .copied()
        .fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = logits.iter().map(|&l| (l - max).exp()).collect();
    let mut total = S::zero();
    for &e in &exps {
        total = total + e;
    }
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest score; ties go to the earliest class.
pub fn argmax<S: Scalar>(scores: &[S]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: BaseKind) -> BaseClassifierSpec<f64> {
        BaseClassifierSpec {
            kind,
            ..BaseClassifierSpec::default()
        }
    }

    fn two_blob_dataset() -> Dataset<f64> {
        // Two classes at centroids (0, 0) and (10, 10).
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 0.0],
            vec![10.0, 10.0],
            vec![10.0, 10.0],
        ];
        Dataset::from_rows(
            vec!["x".into(), "y".into()],
            rows,
            vec!["P".into(), "P".into(), "Q".into(), "Q".into()],
        )
        .unwrap()
    }

    #[test]
    fn centroid_midpoint_is_even_split() {
        let d = two_blob_dataset();
        let node = train_node(
            &d,
            &[0, 1, 2, 3],
            &[0, 0, 1, 1],
            2,
            &[0, 1],
            &spec(BaseKind::NearestCentroid),
        )
        .unwrap();
        let probs = node.predict_scores(&[5.0, 5.0]).unwrap();
        assert_eq!(probs, vec![0.5, 0.5]);
        let at_p = node.predict_scores(&[0.0, 0.0]).unwrap();
        assert!(at_p[0] > at_p[1]);
    }

    #[test]
    fn gnb_separates_disjoint_ranges() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![if i < 5 { i as f64 } else { 100.0 + i as f64 }])
            .collect();
        let labels: Vec<String> = (0..10)
            .map(|i| if i < 5 { "L".into() } else { "H".into() })
            .collect();
        let d = Dataset::from_rows(vec!["f".into()], rows, labels).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let node_labels: Vec<u32> = (0..10).map(|i| u32::from(i >= 5)).collect();
        let node = train_node(
            &d,
            &all,
            &node_labels,
            2,
            &[0],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap();
        for i in 0..10 {
            let probs = node.predict_scores(&[d.value(i, 0)]).unwrap();
            assert_eq!(argmax(&probs), usize::from(i >= 5));
        }
    }

    #[test]
    fn gnb_parameters_match_sample_statistics() {
        let values = [1.0, 2.0, 3.0, 4.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        let labels: Vec<String> = (0..10)
            .map(|i| if i < 4 { "A".into() } else { "B".into() })
            .collect();
        let d = Dataset::from_rows(vec!["f".into()], rows, labels).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let node_labels: Vec<u32> = (0..10).map(|i| u32::from(i >= 4)).collect();
        let node = train_node(
            &d,
            &all,
            &node_labels,
            2,
            &[0],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap();

        // Hand-computed sample statistics (population variance).
        let mean_a = (1.0 + 2.0 + 3.0 + 4.0) / 4.0;
        let var_a = values[..4]
            .iter()
            .map(|v| (v - mean_a) * (v - mean_a))
            .sum::<f64>()
            / 4.0;
        let mean_b = values[4..].iter().sum::<f64>() / 6.0;
        let var_b = values[4..]
            .iter()
            .map(|v| (v - mean_b) * (v - mean_b))
            .sum::<f64>()
            / 6.0;
        match node.params() {
            NodeParams::Gaussian { means, variances } => {
                assert!((means[0][0] - mean_a).abs() < 1e-12);
                assert!((means[1][0] - mean_b).abs() < 1e-12);
                assert!((variances[0][0] - var_a).abs() < 1e-12);
                assert!((variances[1][0] - var_b).abs() < 1e-12);
            }
            _ => panic!("expected gaussian params"),
        }
        assert_eq!(node.priors(), &[0.4, 0.6]);
    }

    #[test]
    fn gnb_posterior_matches_bayes_rule() {
        // 2 classes, 1 feature, hand-computed posterior at x = 1.0.
        let rows = vec![vec![0.0], vec![2.0], vec![4.0], vec![6.0]];
        let labels = vec!["A".into(), "A".into(), "B".into(), "B".into()];
        let d = Dataset::from_rows(vec!["f".into()], rows, labels).unwrap();
        let node = train_node(
            &d,
            &[0, 1, 2, 3],
            &[0, 0, 1, 1],
            2,
            &[0],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap();
        // Both classes: mean {1, 5}, variance 1, prior 0.5.
        let x: f64 = 1.0;
        let pdf = |mean: f64| {
            (-((x - mean) * (x - mean)) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let pa = 0.5 * pdf(1.0);
        let pb = 0.5 * pdf(5.0);
        let expected = pa / (pa + pb);
        let probs = node.predict_scores(&[x]).unwrap();
        assert!((probs[0] - expected).abs() < 1e-9);
    }

    #[test]
    fn scores_are_a_distribution() {
        let d = two_blob_dataset();
        for kind in [BaseKind::GaussianNaiveBayes, BaseKind::NearestCentroid] {
            let node = train_node(&d, &[0, 1, 2, 3], &[0, 0, 1, 1], 2, &[0, 1], &spec(kind))
                .unwrap();
            let probs = node.predict_scores(&[3.0, -2.0]).unwrap();
            assert!(probs.iter().all(|&p| p >= 0.0));
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_within_class_feature_survives_flooring() {
        let rows = vec![vec![1.0], vec![1.0], vec![2.0], vec![2.0]];
        let labels = vec!["A".into(), "A".into(), "B".into(), "B".into()];
        let d = Dataset::from_rows(vec!["f".into()], rows, labels).unwrap();
        let node = train_node(
            &d,
            &[0, 1, 2, 3],
            &[0, 0, 1, 1],
            2,
            &[0],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap();
        let probs = node.predict_scores(&[1.0]).unwrap();
        assert!(probs.iter().all(|p| p.is_finite()));
        assert_eq!(argmax(&probs), 0);
    }

    #[test]
    fn empty_class_and_empty_features_are_errors() {
        let d = two_blob_dataset();
        let err = train_node(
            &d,
            &[0, 1],
            &[0, 0],
            2,
            &[0],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap_err();
        assert!(matches!(err, ClassifierError::EmptyClass { class: 1 }));

        let err = train_node(
            &d,
            &[0, 1, 2, 3],
            &[0, 0, 1, 1],
            2,
            &[],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap_err();
        assert!(matches!(err, ClassifierError::EmptyFeatureSet));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = two_blob_dataset();
        let node = train_node(
            &d,
            &[0, 1, 2, 3],
            &[0, 0, 1, 1],
            2,
            &[0, 1],
            &spec(BaseKind::NearestCentroid),
        )
        .unwrap();
        assert!(matches!(
            node.predict_scores(&[1.0]).unwrap_err(),
            ClassifierError::DimensionMismatch { expected: 2, got: 1 }
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let d = two_blob_dataset();
        let fit = || {
            train_node(
                &d,
                &[0, 1, 2, 3],
                &[0, 0, 1, 1],
                2,
                &[0, 1],
                &spec(BaseKind::GaussianNaiveBayes),
            )
            .unwrap()
        };
        assert_eq!(fit(), fit());
    }

    #[test]
    fn feature_subset_isolation() {
        let d = two_blob_dataset();
        let node = train_node(
            &d,
            &[0, 1, 2, 3],
            &[0, 0, 1, 1],
            2,
            &[1],
            &spec(BaseKind::GaussianNaiveBayes),
        )
        .unwrap();
        let a = node.predict_scores_full(&[0.0, 3.0]).unwrap();
        let b = node.predict_scores_full(&[999.0, 3.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn argmax_breaks_ties_toward_first() {
        assert_eq!(argmax(&[0.5f64, 0.5, 0.3]), 0);
        assert_eq!(argmax(&[0.1f64, 0.7, 0.7]), 1);
    }
}
