//! Seeded synthetic dataset generators used for self-contained verification:
//! a planted class-specific relevance dataset, separable Gaussian blobs, and
//! unstructured noise with arbitrary class counts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least {wanted} examples for {classes} classes, got {n}")]
    TooFewExamples {
        n: usize,
        classes: usize,
        wanted: usize,
    },
    #[error("need at least 2 classes, got {0}")]
    TooFewClasses(usize),
    #[error("need at least 1 feature, got {0}")]
    NoFeatures(usize),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// Mean shift (in units of the unit noise sigma) of the planted markers.
const PLANTED_SHIFT: f64 = 4.0;

/// Four-class dataset with a known relevance structure:
///
/// * `class_a_marker` — shifted by 4 sigma for class A only; relevant for
///   every pair involving A, noise for pairs without A.
/// * `global_marker` — class means spread 4 sigma apart; relevant for every
///   pair and globally the strongest feature.
/// * `noise_1` .. `noise_6` — unit Gaussians independent of the class.
///
/// Labels cycle A, B, C, D so classes stay balanced and appear in that
/// order.
pub fn planted_dataset<S: Scalar>(n: usize, seed: u64) -> Result<Dataset<S>, SynthError> {
    if n < 8 {
        return Err(SynthError::TooFewExamples {
            n,
            classes: 4,
            wanted: 8,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0f64, 1.0).expect("valid normal");
    let class_names = ["A", "B", "C", "D"];

    let mut features: Vec<String> = vec!["class_a_marker".into(), "global_marker".into()];
    features.extend((1..=6).map(|i| format!("noise_{i}")));

    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 4;
        let mut row = Vec::with_capacity(8);
        let a_shift = if class == 0 { PLANTED_SHIFT } else { 0.0 };
        row.push(S::cast(unit.sample(&mut rng) + a_shift));
        row.push(S::cast(unit.sample(&mut rng) + PLANTED_SHIFT * class as f64));
        for _ in 0..6 {
            row.push(S::cast(unit.sample(&mut rng)));
        }
        rows.push(row);
        labels.push(class_names[class].to_string());
    }
    Ok(Dataset::from_rows(features, rows, labels)?)
}

/// Gaussian blobs with unit noise: the first `informative` features carry
/// class means spaced `separation` apart (so each of them alone orders all
/// classes), the rest are pure noise. Labels cycle through `C0..C{classes-1}`.
pub fn gaussian_blobs<S: Scalar>(
    n: usize,
    classes: usize,
    features: usize,
    informative: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset<S>, SynthError> {
    if classes < 2 {
        return Err(SynthError::TooFewClasses(classes));
    }
    if features == 0 {
        return Err(SynthError::NoFeatures(features));
    }
    if n < 2 * classes {
        return Err(SynthError::TooFewExamples {
            n,
            classes,
            wanted: 2 * classes,
        });
    }
    let informative = informative.clamp(1, features);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0f64, 1.0).expect("valid normal");

    let feature_names: Vec<String> = (0..features)
        .map(|j| {
            if j < informative {
                format!("signal_{}", j + 1)
            } else {
                format!("noise_{}", j + 1 - informative)
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        let mut row = Vec::with_capacity(features);
        for j in 0..features {
            let mean = if j < informative {
                separation * class as f64
            } else {
                0.0
            };
            row.push(S::cast(unit.sample(&mut rng) + mean));
        }
        rows.push(row);
        labels.push(format!("C{class}"));
    }
    Ok(Dataset::from_rows(feature_names, rows, labels)?)
}

/// Unstructured noise with round-robin labels over `classes` classes; every
/// class is guaranteed at least one example. Useful for call-count grids and
/// null comparisons.
pub fn random_labeled<S: Scalar>(
    n: usize,
    m: usize,
    classes: usize,
    seed: u64,
) -> Result<Dataset<S>, SynthError> {
    if classes < 2 {
        return Err(SynthError::TooFewClasses(classes));
    }
    if m == 0 {
        return Err(SynthError::NoFeatures(m));
    }
    if n < classes {
        return Err(SynthError::TooFewExamples {
            n,
            classes,
            wanted: classes,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let feature_names: Vec<String> = (1..=m).map(|j| format!("x{j}")).collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = if i < classes {
            i
        } else {
            rng.random_range(0..classes)
        };
        rows.push((0..m).map(|_| S::cast(rng.random_range(-1.0..1.0))).collect());
        labels.push(format!("C{class}"));
    }
    Ok(Dataset::from_rows(feature_names, rows, labels)?)
}

/// Copy of a dataset with its label vector shuffled (seeded), which severs
/// every feature-label association while keeping class frequencies.
pub fn shuffle_labels<S: Scalar>(d: &Dataset<S>, seed: u64) -> Dataset<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<String> = (0..d.n_examples()).map(|i| d.label_of(i).to_string()).collect();
    labels.shuffle(&mut rng);
    let rows: Vec<Vec<S>> = (0..d.n_examples()).map(|i| d.row(i).to_vec()).collect();
    Dataset::from_rows(d.features().to_vec(), rows, labels)
        .expect("shuffling labels preserves validity")
}
