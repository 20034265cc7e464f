//! Decomposable classification schemes built from selection artifacts.
//!
//! Four topologies: a single multiclass node over the globally relevant
//! features; one layer of one-vs-rest nodes (one per class); two layers where
//! every first-layer node separates one class pair and per-class units
//! average the pairwise votes; and a three-layer scheme whose first layer
//! comes from the relevance-matrix diagonal, second layer from the
//! pair-specific cells, and third layer integrates both per class. The total
//! discriminative node count of the three-layer scheme is L + L(L−1)/2 =
//! C(L+1, 2).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{argmax, train_node, BaseClassifierSpec, ClassifierError, TrainedNode};
use crate::dataset::{Dataset, LabeledView};
use crate::matrix::ClassSpecificRelevanceMatrix;
use crate::scalar::Scalar;
use crate::selection::{
    unordered_pairs, ClassSpecificRanking, GlobalRanking, PairwiseRelevanceTable,
    RelevanceThreshold,
};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("topology {topology:?} cannot be built from a {artifact} artifact")]
    ArtifactMismatch {
        topology: Topology,
        artifact: &'static str,
    },
    #[error("artifact classes {artifact:?} do not match dataset classes {dataset:?}")]
    ClassMismatch {
        artifact: Vec<String>,
        dataset: Vec<String>,
    },
    #[error("artifact features do not match dataset features")]
    FeatureMismatch,
    #[error("schemes require at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("input has {got} values, scheme expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error(
        "class {class:?} has no discriminative input under the omit policy; \
         use the neutral policy or lower the threshold"
    )]
    ClassWithoutInputs { class: String },
    #[error("diagonal weight must be positive, got {0}")]
    BadDiagWeight(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Traditional,
    OneLayerOva,
    TwoLayerDove,
    ThreeLayer,
}

/// What a scheme does with a node whose relevant feature set is empty:
/// keep it as a structural placeholder emitting the neutral score 0.5, or
/// drop it and renormalize the per-class average over what remains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmptyNodePolicy {
    Neutral,
    Omit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec<S> {
    pub topology: Topology,
    pub threshold: RelevanceThreshold<S>,
    pub base: BaseClassifierSpec<S>,
    pub empty_policy: EmptyNodePolicy,
    /// Weight of the diagonal term in the three-layer per-class average
    /// (1 = uniform across the class's diagonal and pairwise inputs).
    pub diag_weight: S,
}

impl<S: Scalar> SchemeSpec<S> {
    pub fn new(topology: Topology) -> Self {
        SchemeSpec {
            topology,
            threshold: RelevanceThreshold::default(),
            base: BaseClassifierSpec::default(),
            empty_policy: EmptyNodePolicy::Neutral,
            diag_weight: S::one(),
        }
    }
}

/// The selection output a scheme is built from. Each topology accepts
/// exactly one artifact shape (one-layer accepts any L×m class-specific
/// ranking, whether it came from OvA or OvE).
#[derive(Debug, Clone)]
pub enum SelectionArtifact<S: Scalar> {
    Global(GlobalRanking<S>),
    PerClass(ClassSpecificRanking<S>),
    Pairwise(PairwiseRelevanceTable<S>),
    Matrix(ClassSpecificRelevanceMatrix<S>),
}

impl<S: Scalar> SelectionArtifact<S> {
    fn kind(&self) -> &'static str {
        match self {
            SelectionArtifact::Global(_) => "global ranking",
            SelectionArtifact::PerClass(_) => "class-specific ranking",
            SelectionArtifact::Pairwise(_) => "pairwise relevance table",
            SelectionArtifact::Matrix(_) => "class-specific relevance matrix",
        }
    }

    pub fn classes(&self) -> &[String] {
        match self {
            SelectionArtifact::Global(g) => &g.classes,
            SelectionArtifact::PerClass(r) => &r.classes,
            SelectionArtifact::Pairwise(t) => t.classes(),
            SelectionArtifact::Matrix(m) => m.classes(),
        }
    }

    pub fn features(&self) -> &[String] {
        match self {
            SelectionArtifact::Global(g) => &g.features,
            SelectionArtifact::PerClass(r) => &r.features,
            SelectionArtifact::Pairwise(t) => t.features(),
            SelectionArtifact::Matrix(m) => m.features(),
        }
    }
}

/// Where a node sits in the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "role")]
pub enum NodeRole {
    /// Single multiclass node of the traditional scheme.
    Traditional,
    /// One-vs-rest node of the one-layer scheme (class index; POS first).
    OneVsRest { class: usize },
    /// Pairwise node of the two-layer scheme, trained on the two classes.
    Pairwise { first: usize, second: usize },
    /// One-vs-rest node over a diagonal cell of the relevance matrix.
    Diagonal { class: usize },
    /// Pairwise node over an off-diagonal cell of the relevance matrix.
    PairSpecific { first: usize, second: usize },
}

/// A discriminative node of a trained scheme. `model` is `None` exactly when
/// the node's relevant feature set was empty and the neutral policy kept it
/// as a placeholder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeNode<S> {
    #[serde(flatten)]
    pub role: NodeRole,
    pub features: Vec<usize>,
    pub model: Option<TrainedNode<S>>,
}

/// Per-node result of pushing one input through a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOutput<S> {
    pub role: NodeRole,
    /// Probability distribution over the node's classes; `None` for neutral
    /// placeholders.
    pub probs: Option<Vec<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<S> {
    pub class_index: usize,
    pub label: String,
    pub scores: Vec<S>,
}

/// A trained classification scheme: its discriminative nodes plus the
/// per-class aggregation wiring. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct TrainedScheme<S> {
    pub topology: Topology,
    pub classes: Vec<String>,
    pub features: Vec<String>,
    pub nodes: Vec<SchemeNode<S>>,
    /// Training class frequencies; the argmax tie-breaker.
    pub class_priors: Vec<S>,
    pub tau: S,
    pub base: BaseClassifierSpec<S>,
    pub empty_policy: EmptyNodePolicy,
    pub diag_weight: S,
    pub warnings: Vec<String>,
}

/// Train a scheme from a dataset and a matching selection artifact.
///
/// Nodes of the non-three-layer topologies whose relevant set is empty fall
/// back to the single top-scoring feature of their row (recorded as a
/// warning); three-layer nodes follow the empty-node policy instead, since
/// an empty matrix cell is meaningful structure.
pub fn build_scheme<S: Scalar>(
    d: &Dataset<S>,
    spec: &SchemeSpec<S>,
    artifact: &SelectionArtifact<S>,
) -> Result<TrainedScheme<S>, SchemeError> {
    spec.base.validate()?;
    if spec.diag_weight.is_nan() || spec.diag_weight <= S::zero() {
        return Err(SchemeError::BadDiagWeight(format!("{}", spec.diag_weight)));
    }
    let l = d.n_classes();
    if l < 2 {
        return Err(SchemeError::TooFewClasses(l));
    }
    if artifact.classes() != d.classes() {
        return Err(SchemeError::ClassMismatch {
            artifact: artifact.classes().to_vec(),
            dataset: d.classes().to_vec(),
        });
    }
    if artifact.features() != d.features() {
        return Err(SchemeError::FeatureMismatch);
    }

    let partition = d.partition_by_class();
    let n = d.n_examples();
    let class_priors: Vec<S> = partition
        .counts()
        .iter()
        .map(|&c| S::cast_usize(c) / S::cast_usize(n))
        .collect();

    let mut warnings = Vec::new();
    let mut nodes = Vec::new();
    let all_rows: Vec<usize> = (0..n).collect();

    match (spec.topology, artifact) {
        (Topology::Traditional, SelectionArtifact::Global(ranking)) => {
            let features = with_fallback(
                ranking.relevant_features(&spec.threshold),
                ranking.scores(),
                "global ranking",
                &mut warnings,
            );
            let labels: Vec<u32> = d.label_codes().to_vec();
            let model = train_node(d, &all_rows, &labels, l, &features, &spec.base)?;
            nodes.push(SchemeNode {
                role: NodeRole::Traditional,
                features,
                model: Some(model),
            });
        }
        (Topology::OneLayerOva, SelectionArtifact::PerClass(ranking)) => {
            let relevant = ranking.relevant_features(&spec.threshold);
            for (p, subset) in relevant.into_iter().enumerate() {
                let features = with_fallback(
                    subset,
                    ranking.class_row(p),
                    &format!("class {}", d.classes()[p]),
                    &mut warnings,
                );
                let view = d.binarize(&d.classes()[p].clone()).expect("class exists");
                let labels: Vec<u32> = (0..n).map(|i| view.label_code(i)).collect();
                let model = train_node(d, &all_rows, &labels, 2, &features, &spec.base)?;
                nodes.push(SchemeNode {
                    role: NodeRole::OneVsRest { class: p },
                    features,
                    model: Some(model),
                });
            }
        }
        (Topology::TwoLayerDove, SelectionArtifact::Pairwise(table)) => {
            let relevant = table.relevant_features(&spec.threshold);
            for (i, &(p, q)) in table.pairs().iter().enumerate() {
                let features = with_fallback(
                    relevant[i].clone(),
                    table.row(i),
                    &format!("pair ({}, {})", d.classes()[p], d.classes()[q]),
                    &mut warnings,
                );
                let model = train_pair_node(d, p, q, &features, &spec.base)?;
                nodes.push(SchemeNode {
                    role: NodeRole::Pairwise {
                        first: p,
                        second: q,
                    },
                    features,
                    model: Some(model),
                });
            }
        }
        (Topology::ThreeLayer, SelectionArtifact::Matrix(matrix)) => {
            for p in 0..l {
                let features = matrix.diagonal(p).to_vec();
                let model = if features.is_empty() {
                    if spec.empty_policy == EmptyNodePolicy::Neutral {
                        warnings.push(format!(
                            "diagonal node for class {} has no relevant feature; emitting neutral scores",
                            d.classes()[p]
                        ));
                    }
                    None
                } else {
                    let view = d.binarize(&d.classes()[p].clone()).expect("class exists");
                    let labels: Vec<u32> = (0..n).map(|i| view.label_code(i)).collect();
                    Some(train_node(d, &all_rows, &labels, 2, &features, &spec.base)?)
                };
                if model.is_some() || spec.empty_policy == EmptyNodePolicy::Neutral {
                    nodes.push(SchemeNode {
                        role: NodeRole::Diagonal { class: p },
                        features,
                        model,
                    });
                }
            }
            for (p, q) in unordered_pairs(l) {
                let features = matrix.offdiag(p, q).to_vec();
                let model = if features.is_empty() {
                    None
                } else {
                    Some(train_pair_node(d, p, q, &features, &spec.base)?)
                };
                if model.is_some() || spec.empty_policy == EmptyNodePolicy::Neutral {
                    nodes.push(SchemeNode {
                        role: NodeRole::PairSpecific {
                            first: p,
                            second: q,
                        },
                        features,
                        model,
                    });
                }
            }
            if spec.empty_policy == EmptyNodePolicy::Omit {
                for p in 0..l {
                    let has_input = nodes.iter().any(|node| match node.role {
                        NodeRole::Diagonal { class } => class == p,
                        NodeRole::PairSpecific { first, second } => first == p || second == p,
                        _ => false,
                    });
                    if !has_input {
                        return Err(SchemeError::ClassWithoutInputs {
                            class: d.classes()[p].clone(),
                        });
                    }
                }
            }
        }
        (topology, artifact) => {
            return Err(SchemeError::ArtifactMismatch {
                topology,
                artifact: artifact.kind(),
            })
        }
    }

    Ok(TrainedScheme {
        topology: spec.topology,
        classes: d.classes().to_vec(),
        features: d.features().to_vec(),
        nodes,
        class_priors,
        tau: spec.threshold.tau(),
        base: spec.base,
        empty_policy: spec.empty_policy,
        diag_weight: spec.diag_weight,
        warnings,
    })
}

/// Replace an empty relevant set with the single top-scoring feature of the
/// row, logging a warning; a trainable node needs at least one input.
fn with_fallback<S: Scalar>(
    subset: Vec<usize>,
    row: &[S],
    context: &str,
    warnings: &mut Vec<String>,
) -> Vec<usize> {
    if !subset.is_empty() {
        return subset;
    }
    let top = argmax(row);
    warnings.push(format!(
        "{context}: no feature above the threshold; falling back to the top-scoring feature #{top}"
    ));
    vec![top]
}

fn train_pair_node<S: Scalar>(
    d: &Dataset<S>,
    p: usize,
    q: usize,
    features: &[usize],
    base: &BaseClassifierSpec<S>,
) -> Result<TrainedNode<S>, SchemeError> {
    let view = d
        .pair_view(&d.classes()[p].clone(), &d.classes()[q].clone())
        .expect("classes exist and differ");
    let rows = view.rows().to_vec();
    let labels: Vec<u32> = (0..view.len()).map(|i| view.label_code(i)).collect();
    Ok(train_node(d, &rows, &labels, 2, features, base)?)
}

impl<S: Scalar> TrainedScheme<S> {
    /// Number of discriminative nodes (aggregation units are wiring, not
    /// nodes).
    pub fn count_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Evaluate every node on one full-length input vector.
    pub fn node_outputs(&self, x: &[S]) -> Result<Vec<NodeOutput<S>>, SchemeError> {
        if x.len() != self.features.len() {
            return Err(SchemeError::DimensionMismatch {
                expected: self.features.len(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SchemeError::NonFiniteInput);
        }
        self.nodes
            .iter()
            .map(|node| {
                let probs = match &node.model {
                    Some(model) => Some(model.predict_scores_full(x)?),
                    None => None,
                };
                Ok(NodeOutput {
                    role: node.role,
                    probs,
                })
            })
            .collect()
    }

    /// Combine node outputs into per-class scores. Pure function of the
    /// outputs, so scripted node outputs exercise the aggregation wiring
    /// directly.
    pub fn class_scores(&self, outputs: &[NodeOutput<S>]) -> Vec<S> {
        let l = self.classes.len();
        let half = S::cast(0.5);
        match self.topology {
            Topology::Traditional => outputs
                .first()
                .and_then(|o| o.probs.clone())
                .unwrap_or_else(|| vec![half; l]),
            Topology::OneLayerOva => {
                let mut scores = vec![half; l];
                for out in outputs {
                    if let (NodeRole::OneVsRest { class }, Some(probs)) = (out.role, &out.probs) {
                        scores[class] = probs[0];
                    }
                }
                scores
            }
            Topology::TwoLayerDove => {
                // Each per-class unit averages the votes of its L−1 pairwise
                // classifiers.
                let mut sums = vec![S::zero(); l];
                let mut counts = vec![0usize; l];
                for out in outputs {
                    if let (NodeRole::Pairwise { first, second }, Some(probs)) =
                        (out.role, &out.probs)
                    {
                        sums[first] = sums[first] + probs[0];
                        counts[first] += 1;
                        sums[second] = sums[second] + probs[1];
                        counts[second] += 1;
                    }
                }
                (0..l)
                    .map(|p| {
                        if counts[p] == 0 {
                            half
                        } else {
                            sums[p] / S::cast_usize(counts[p])
                        }
                    })
                    .collect()
            }
            Topology::ThreeLayer => {
                // Weighted average of the diagonal vote and the pairwise
                // votes; neutral placeholders contribute 0.5, omitted nodes
                // shrink the denominator.
                let w = self.diag_weight;
                let mut nums = vec![S::zero(); l];
                let mut dens = vec![S::zero(); l];
                for out in outputs {
                    match out.role {
                        NodeRole::Diagonal { class } => {
                            let vote = match &out.probs {
                                Some(probs) => probs[0],
                                None => half,
                            };
                            nums[class] = nums[class] + w * vote;
                            dens[class] = dens[class] + w;
                        }
                        NodeRole::PairSpecific { first, second } => {
                            let (vp, vq) = match &out.probs {
                                Some(probs) => (probs[0], probs[1]),
                                None => (half, half),
                            };
                            nums[first] = nums[first] + vp;
                            dens[first] = dens[first] + S::one();
                            nums[second] = nums[second] + vq;
                            dens[second] = dens[second] + S::one();
                        }
                        _ => {}
                    }
                }
                (0..l)
                    .map(|p| {
                        if dens[p] == S::zero() {
                            half
                        } else {
                            nums[p] / dens[p]
                        }
                    })
                    .collect()
            }
        }
    }

    /// Classify one full-length input vector: per-class scores, argmax with
    /// ties broken by larger training prior and then class order.
    pub fn predict(&self, x: &[S]) -> Result<Prediction<S>, SchemeError> {
        let outputs = self.node_outputs(x)?;
        let scores = self.class_scores(&outputs);
        let class_index = self.argmax_with_priors(&scores);
        Ok(Prediction {
            class_index,
            label: self.classes[class_index].clone(),
            scores,
        })
    }

    fn argmax_with_priors(&self, scores: &[S]) -> usize {
        let mut best = 0;
        for i in 1..scores.len() {
            if scores[i] > scores[best]
                || (scores[i] == scores[best] && self.class_priors[i] > self.class_priors[best])
            {
                best = i;
            }
        }
        best
    }
}
