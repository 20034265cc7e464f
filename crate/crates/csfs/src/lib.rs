//! Class-specific feature selection and decomposable ensemble classification.
//!
//! The library ranks features per class rather than only globally: the
//! one-versus-all strategy scores each feature against a class and the merged
//! rest; the one-versus-each strategy scores every class pair separately and
//! aggregates; and the deep one-versus-each strategy keeps the whole pairwise
//! score table. From that table a class-specific relevance matrix factorizes
//! per-pair relevance into per-class diagonal sets and pair-specific extras,
//! and one-, two- and three-layer classifier ensembles are built on top of
//! those artifacts.
//!
//! All numeric code is generic over the scalar type ([`Scalar`], implemented
//! by `f32` and `f64`); concrete aliases for the main types live at the crate
//! root.

pub mod classifier;
pub mod dataset;
pub mod eval;
pub mod matrix;
pub mod measure;
pub mod scalar;
pub mod scheme;
pub mod selection;
pub mod synth;

pub use classifier::{BaseClassifierSpec, BaseKind, TrainedNode};
pub use dataset::{ClassPartition, Dataset, LabelSpec, LabeledView, LoadOptions};
pub use eval::{evaluate, stratified_kfold, EvaluationReport, InstrumentationReport, Pipeline};
pub use matrix::{build_matrix, ClassSpecificRelevanceMatrix};
pub use measure::{
    discretize, entropy, measure, mutual_information, symmetric_uncertainty, BinningMethod,
    DiscretizationSpec, MeasureKind, MeasureSpec,
};
pub use scalar::Scalar;
pub use scheme::{
    build_scheme, EmptyNodePolicy, SchemeSpec, SelectionArtifact, Topology, TrainedScheme,
};
pub use selection::{
    aggregate_pairwise, dove, ova, ove, rank_global, Aggregate, ClassSpecificRanking,
    GlobalRanking, Instrumentation, PairwiseRelevanceTable, RelevanceThreshold, Strategy,
};

pub type Dataset32 = Dataset<f32>;
pub type Dataset64 = Dataset<f64>;
pub type GlobalRanking32 = GlobalRanking<f32>;
pub type GlobalRanking64 = GlobalRanking<f64>;
pub type ClassSpecificRanking32 = ClassSpecificRanking<f32>;
pub type ClassSpecificRanking64 = ClassSpecificRanking<f64>;
pub type PairwiseRelevanceTable32 = PairwiseRelevanceTable<f32>;
pub type PairwiseRelevanceTable64 = PairwiseRelevanceTable<f64>;
pub type ClassSpecificRelevanceMatrix32 = ClassSpecificRelevanceMatrix<f32>;
pub type ClassSpecificRelevanceMatrix64 = ClassSpecificRelevanceMatrix<f64>;
pub type TrainedScheme32 = TrainedScheme<f32>;
pub type TrainedScheme64 = TrainedScheme<f64>;
