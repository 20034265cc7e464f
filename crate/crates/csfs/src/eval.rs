//! Cross-validated comparison of schemes with exact cost instrumentation.
//!
//! Feature selection is refit inside every training fold, never on the full
//! dataset, so the reported numbers are leakage-free. All randomness comes
//! from the caller's seed.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::matrix::build_matrix;
use crate::measure::MeasureSpec;
use crate::scalar::Scalar;
use crate::scheme::{build_scheme, SchemeError, SchemeSpec, SelectionArtifact, Topology};
use crate::selection::{
    self, Aggregate, Instrumentation, SelectionError, Strategy,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error(
        "class {class:?} has only {count} examples, fewer than k = {k}; \
         lower k to at most {count} or provide more data for that class"
    )]
    ClassSmallerThanK {
        class: String,
        count: usize,
        k: usize,
    },
    #[error("training partition of fold {fold} lost class {class:?} entirely")]
    FoldMissingClass { fold: usize, class: String },
    #[error("strategy {strategy:?} cannot feed topology {topology:?}")]
    InvalidPipeline {
        strategy: Strategy,
        topology: Topology,
    },
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Everything needed to run one end-to-end configuration: how to score
/// features, which strategy produces the artifact, how pairwise scores are
/// aggregated, and the scheme to train.
#[derive(Debug, Clone)]
pub struct Pipeline<S> {
    pub measure: MeasureSpec,
    pub strategy: Strategy,
    pub aggregate: Aggregate,
    pub scheme: SchemeSpec<S>,
}

impl<S: Scalar> Pipeline<S> {
    pub fn validate(&self) -> Result<(), EvalError> {
        let ok = matches!(
            (self.strategy, self.scheme.topology),
            (Strategy::Global, Topology::Traditional)
                | (Strategy::Ova, Topology::OneLayerOva)
                | (Strategy::Ove, Topology::OneLayerOva)
                | (Strategy::Dove, Topology::TwoLayerDove)
                | (Strategy::Dove, Topology::ThreeLayer)
        );
        if !ok {
            return Err(EvalError::InvalidPipeline {
                strategy: self.strategy,
                topology: self.scheme.topology,
            });
        }
        Ok(())
    }

    /// The conventional strategy for a topology.
    pub fn default_strategy(topology: Topology) -> Strategy {
        match topology {
            Topology::Traditional => Strategy::Global,
            Topology::OneLayerOva => Strategy::Ova,
            Topology::TwoLayerDove | Topology::ThreeLayer => Strategy::Dove,
        }
    }
}

/// Observed cost of the relevance-measure calls: exact counts, not samples.
/// Wall time is tracked for display but kept out of the serialized report so
/// reruns stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentationReport {
    pub measure_calls: u64,
    pub examples_touched: u64,
    #[serde(skip_serializing, default)]
    pub wall_secs: f64,
    pub per_fold_measure_calls: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classes: Vec<String>,
    pub topology: Topology,
    pub strategy: Strategy,
    pub k: usize,
    pub seed: u64,
    pub accuracy: f64,
    /// Per-class recall (sensitivity), in class order.
    pub per_class_recall: Vec<f64>,
    /// Confusion counts, rows = true class, columns = predicted class.
    pub confusion: Vec<Vec<u64>>,
    /// Fold id of every example, in dataset order.
    pub folds: Vec<usize>,
    pub instrumentation: InstrumentationReport,
}

/// Report plus the per-fold selection artifacts, kept for inspection and
/// dumping.
#[derive(Debug, Clone)]
pub struct Evaluation<S: Scalar> {
    pub report: EvaluationReport,
    pub fold_artifacts: Vec<SelectionArtifact<S>>,
}

/// Assign every example to one of `k` folds, preserving per-class
/// proportions within one example per fold. Deterministic per seed.
pub fn stratified_kfold<S: Scalar>(
    d: &Dataset<S>,
    k: usize,
    seed: u64,
) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    let partition = d.partition_by_class();
    for (class, count) in partition.counts().iter().enumerate() {
        if *count < k {
            return Err(EvalError::ClassSmallerThanK {
                class: d.classes()[class].clone(),
                count: *count,
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0usize; d.n_examples()];
    for class in 0..partition.n_classes() {
        let mut members = partition.members(class).to_vec();
        members.shuffle(&mut rng);
        for (i, &row) in members.iter().enumerate() {
            folds[row] = i % k;
        }
    }
    Ok(folds)
}

/// Run the pipeline under stratified k-fold cross-validation: per fold, the
/// selection artifact is recomputed on the training partition, a scheme is
/// trained on it, and the held-out fold is classified.
pub fn evaluate<S: Scalar>(
    d: &Dataset<S>,
    pipeline: &Pipeline<S>,
    k: usize,
    seed: u64,
) -> Result<Evaluation<S>, EvalError> {
    pipeline.validate()?;
    let started = Instant::now();
    let folds = stratified_kfold(d, k, seed)?;
    let l = d.n_classes();

    let instr = Instrumentation::new();
    let mut per_fold_calls = Vec::with_capacity(k);
    let mut confusion = vec![vec![0u64; l]; l];
    let mut fold_artifacts = Vec::with_capacity(k);

    for fold in 0..k {
        let train_rows: Vec<usize> = (0..d.n_examples()).filter(|&i| folds[i] != fold).collect();
        let test_rows: Vec<usize> = (0..d.n_examples()).filter(|&i| folds[i] == fold).collect();
        let train = d.subset(&train_rows);

        let mut counts = vec![0usize; l];
        for &code in train.label_codes() {
            counts[code as usize] += 1;
        }
        if let Some(missing) = counts.iter().position(|&c| c == 0) {
            return Err(EvalError::FoldMissingClass {
                fold,
                class: d.classes()[missing].clone(),
            });
        }

        let calls_before = instr.measure_calls();
        let artifact = match (pipeline.strategy, pipeline.scheme.topology) {
            (Strategy::Global, _) => SelectionArtifact::Global(selection::rank_global(
                &train,
                &pipeline.measure,
                &instr,
            )?),
            (Strategy::Ova, _) => {
                SelectionArtifact::PerClass(selection::ova(&train, &pipeline.measure, &instr)?)
            }
            (Strategy::Ove, _) => SelectionArtifact::PerClass(selection::ove(
                &train,
                &pipeline.measure,
                pipeline.aggregate,
                &instr,
            )?),
            (Strategy::Dove, Topology::ThreeLayer) => {
                let table = selection::dove(&train, &pipeline.measure, &instr)?;
                SelectionArtifact::Matrix(build_matrix(&table, &pipeline.scheme.threshold))
            }
            (Strategy::Dove, _) => {
                SelectionArtifact::Pairwise(selection::dove(&train, &pipeline.measure, &instr)?)
            }
        };
        per_fold_calls.push(instr.measure_calls() - calls_before);

        let scheme = build_scheme(&train, &pipeline.scheme, &artifact)?;
        for &row in &test_rows {
            let pred = scheme.predict(d.row(row))?;
            confusion[d.label_codes()[row] as usize][pred.class_index] += 1;
        }
        fold_artifacts.push(artifact);
    }

    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..l).map(|c| confusion[c][c]).sum();
    let accuracy = trace as f64 / total as f64;
    let per_class_recall: Vec<f64> = (0..l)
        .map(|c| {
            let support: u64 = confusion[c].iter().sum();
            if support == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / support as f64
            }
        })
        .collect();

    let report = EvaluationReport {
        classes: d.classes().to_vec(),
        topology: pipeline.scheme.topology,
        strategy: pipeline.strategy,
        k,
        seed,
        accuracy,
        per_class_recall,
        confusion,
        folds,
        instrumentation: InstrumentationReport {
            measure_calls: instr.measure_calls(),
            examples_touched: instr.examples_touched(),
            wall_secs: started.elapsed().as_secs_f64(),
            per_fold_measure_calls: per_fold_calls,
        },
    };
    Ok(Evaluation {
        report,
        fold_artifacts,
    })
}
