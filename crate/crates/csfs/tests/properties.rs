//! Property tests for the library's contract invariants: measure range and
//! exact symmetries, partition totality, view behavior, strategy
//! equivariance, the aggregation identity, relevance-matrix round trips, and
//! scheme structure.

use std::collections::HashMap;

use proptest::prelude::*;

use csfs::dataset::Dataset;
use csfs::matrix::build_matrix;
use csfs::measure::{
    discretize, measure, symmetric_uncertainty, BinningMethod, DiscretizationSpec, MeasureKind,
    MeasureSpec,
};
use csfs::scheme::{build_scheme, SchemeSpec, SelectionArtifact, Topology};
use csfs::selection::{
    aggregate_pairwise, dove, ova, ove, Aggregate, Instrumentation, PairwiseRelevanceTable,
    RelevanceThreshold,
};

/// Small random dataset: n rows, m features, L classes, all classes present.
fn dataset_strategy(
    max_n: usize,
    max_m: usize,
    max_l: usize,
) -> impl Strategy<Value = Dataset<f64>> {
    (2usize..=max_l, 1usize..=max_m).prop_flat_map(move |(l, m)| {
        (l.max(4)..=max_n.max(l + 4)).prop_flat_map(move |n| {
            (
                prop::collection::vec(-50.0f64..50.0, n * m),
                prop::collection::vec(0usize..l, n),
            )
                .prop_map(move |(values, mut label_idx)| {
                    for (i, slot) in label_idx.iter_mut().take(l).enumerate() {
                        *slot = i; // guarantee every class appears
                    }
                    let features = (0..m).map(|j| format!("x{j}")).collect();
                    let examples = (0..n).map(|i| i.to_string()).collect();
                    let labels = label_idx
                        .iter()
                        .map(|&c| format!("K{c}"))
                        .collect();
                    Dataset::new(examples, features, values, labels).unwrap()
                })
        })
    })
}

fn symbols_strategy(max_n: usize, alphabet: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..alphabet, 1..=max_n)
}

/// Naive full-joint-table symmetric uncertainty, kept deliberately different
/// from the library's term-sorted computation.
fn naive_su(x: &[u32], y: &[u32]) -> f64 {
    let n = x.len() as f64;
    let h = |counts: &HashMap<u32, usize>| -> f64 {
        counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum::<f64>()
    };
    let mut cx = HashMap::new();
    let mut cy = HashMap::new();
    let mut cxy = HashMap::new();
    for (&a, &b) in x.iter().zip(y.iter()) {
        *cx.entry(a).or_insert(0usize) += 1;
        *cy.entry(b).or_insert(0usize) += 1;
        *cxy.entry((a, b)).or_insert(0usize) += 1;
    }
    let hx = h(&cx);
    let hy = h(&cy);
    let hxy: f64 = cxy
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    if hx + hy == 0.0 {
        return 0.0;
    }
    (2.0 * (hx + hy - hxy) / (hx + hy)).clamp(0.0, 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn measure_stays_in_unit_interval(d in dataset_strategy(24, 4, 4), bins in 2usize..6) {
        let spec = MeasureSpec {
            discretization: DiscretizationSpec::new(BinningMethod::EqualFrequency, bins).unwrap(),
            ..MeasureSpec::default()
        };
        for j in 0..d.n_features() {
            let s: f64 = measure(&d, j, &spec).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
            let view = d.binarize(&d.classes()[0].clone()).unwrap();
            let s: f64 = measure(&view, j, &spec).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn su_is_exactly_symmetric(x in symbols_strategy(40, 6), seed in 0u64..1000) {
        let _ = seed;
        let y: Vec<u32> = x.iter().rev().map(|v| v % 3).collect();
        let a: f64 = symmetric_uncertainty(&x, &y).unwrap();
        let b: f64 = symmetric_uncertainty(&y, &x).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn su_self_is_one_for_non_constant(x in symbols_strategy(40, 6)) {
        prop_assume!(x.iter().any(|&v| v != x[0]));
        let s: f64 = symmetric_uncertainty(&x, &x).unwrap();
        prop_assert_eq!(s, 1.0);
    }

    #[test]
    fn su_matches_naive_oracle(x in symbols_strategy(30, 8), y_mod in 2u32..8) {
        let y: Vec<u32> = x.iter().enumerate().map(|(i, &v)| (v + i as u32) % y_mod).collect();
        let got: f64 = symmetric_uncertainty(&x, &y).unwrap();
        prop_assert!((got - naive_su(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn measure_is_label_permutation_invariant(d in dataset_strategy(20, 3, 4)) {
        // Bijectively rename every class label.
        let renamed: Vec<String> = (0..d.n_examples())
            .map(|i| format!("renamed-{}", d.label_of(i)))
            .collect();
        let rows: Vec<Vec<f64>> = (0..d.n_examples()).map(|i| d.row(i).to_vec()).collect();
        let d2 = Dataset::from_rows(d.features().to_vec(), rows, renamed).unwrap();
        let spec = MeasureSpec::default();
        for j in 0..d.n_features() {
            let a: f64 = measure(&d, j, &spec).unwrap();
            let b: f64 = measure(&d2, j, &spec).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn measure_is_row_order_invariant(d in dataset_strategy(20, 3, 4), shift in 1usize..19) {
        // Rotate rows (with labels) by an arbitrary offset.
        let n = d.n_examples();
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| d.row(i).to_vec()).collect();
        let labels: Vec<String> = order.iter().map(|&i| d.label_of(i).to_string()).collect();
        let d2 = Dataset::from_rows(d.features().to_vec(), rows, labels).unwrap();
        let spec = MeasureSpec::default();
        for j in 0..d.n_features() {
            let a: f64 = measure(&d, j, &spec).unwrap();
            let b: f64 = measure(&d2, j, &spec).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn measure_matches_full_joint_table_oracle(d in dataset_strategy(30, 3, 4), bins in 2usize..=8) {
        let disc = DiscretizationSpec::new(BinningMethod::EqualFrequency, bins).unwrap();
        let spec = MeasureSpec { discretization: disc, kind: MeasureKind::SymmetricUncertainty, global_bins: false };
        for j in 0..d.n_features() {
            let got: f64 = measure(&d, j, &spec).unwrap();
            let column: Vec<f64> = (0..d.n_examples()).map(|i| d.value(i, j)).collect();
            let binned = discretize(&column, &disc);
            let labels: Vec<u32> = d.label_codes().to_vec();
            prop_assert!((got - naive_su(&binned, &labels)).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_is_total_and_disjoint(d in dataset_strategy(30, 2, 5)) {
        let p = d.partition_by_class();
        let mut seen = vec![0usize; d.n_examples()];
        for class in 0..p.n_classes() {
            for &row in p.members(class) {
                seen[row] += 1;
                prop_assert_eq!(d.label_codes()[row] as usize, class);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn views_do_not_mutate_the_parent(d in dataset_strategy(20, 3, 4)) {
        let before = d.clone();
        let _ = d.binarize(&d.classes()[0].clone()).unwrap();
        let classes = d.classes().to_vec();
        let _ = d.pair_view(&classes[0], &classes[1]).unwrap();
        let _ = d.partition_by_class();
        prop_assert_eq!(before, d);
    }

    #[test]
    fn pair_views_are_symmetric(d in dataset_strategy(20, 2, 4)) {
        let classes = d.classes().to_vec();
        for p in 0..classes.len() {
            for q in (p + 1)..classes.len() {
                let a = d.pair_view(&classes[p], &classes[q]).unwrap();
                let b = d.pair_view(&classes[q], &classes[p]).unwrap();
                prop_assert_eq!(a.rows(), b.rows());
            }
        }
    }

    #[test]
    fn ove_equals_aggregate_of_dove(d in dataset_strategy(20, 3, 4)) {
        let spec = MeasureSpec::default();
        for agg in [Aggregate::Mean, Aggregate::Min, Aggregate::Max] {
            let table = dove(&d, &spec, &Instrumentation::new()).unwrap();
            let composed = aggregate_pairwise(&table, agg);
            let direct = ove(&d, &spec, agg, &Instrumentation::new()).unwrap();
            prop_assert_eq!(&direct.scores, &composed.scores);
        }
    }

    #[test]
    fn class_order_permutation_permutes_rows(d in dataset_strategy(16, 2, 4), shift in 1usize..15) {
        // Rotating the rows changes the first-occurrence class order but not
        // the per-class scores: rankings must match up to row reindexing.
        let n = d.n_examples();
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let rows: Vec<Vec<f64>> = order.iter().map(|&i| d.row(i).to_vec()).collect();
        let labels: Vec<String> = order.iter().map(|&i| d.label_of(i).to_string()).collect();
        let d2 = Dataset::from_rows(d.features().to_vec(), rows, labels).unwrap();

        let spec = MeasureSpec::default();
        let r1 = ova(&d, &spec, &Instrumentation::new()).unwrap();
        let r2 = ova(&d2, &spec, &Instrumentation::new()).unwrap();
        for (p2, class) in d2.classes().iter().enumerate() {
            let p1 = d.classes().iter().position(|c| c == class).unwrap();
            prop_assert_eq!(r1.class_row(p1), r2.class_row(p2));
        }

        let t1 = dove(&d, &spec, &Instrumentation::new()).unwrap();
        let t2 = dove(&d2, &spec, &Instrumentation::new()).unwrap();
        for (p2, q2) in t2.pairs().to_vec() {
            let p1 = d.class_code(&d2.classes()[p2]).unwrap() as usize;
            let q1 = d.class_code(&d2.classes()[q2]).unwrap() as usize;
            prop_assert_eq!(t2.pair_row(p2, q2).unwrap(), t1.pair_row(p1, q1).unwrap());
        }
    }

    #[test]
    fn binary_datasets_collapse_across_strategies(d in dataset_strategy(24, 4, 2)) {
        let spec = MeasureSpec::default();
        let r_ova = ova(&d, &spec, &Instrumentation::new()).unwrap();
        let r_ove = ove(&d, &spec, Aggregate::Mean, &Instrumentation::new()).unwrap();
        let table = dove(&d, &spec, &Instrumentation::new()).unwrap();
        prop_assert_eq!(r_ova.class_row(0), r_ova.class_row(1));
        prop_assert_eq!(r_ova.scores.clone(), r_ove.scores.clone());
        prop_assert_eq!(r_ova.class_row(0), table.row(0));
    }

    #[test]
    fn matrix_factorization_round_trips(
        l in 2usize..5,
        m in 1usize..6,
        seed in 0u64..10_000,
        tau_milli in 0usize..999,
    ) {
        // Random table with scores on a 0.001 grid.
        let classes: Vec<String> = (0..l).map(|c| format!("K{c}")).collect();
        let features: Vec<String> = (0..m).map(|j| format!("x{j}")).collect();
        let n_pairs = l * (l - 1) / 2;
        let mut state = seed.wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % 1000) as f64 / 1000.0
        };
        let scores: Vec<Vec<f64>> = (0..n_pairs)
            .map(|_| (0..m).map(|_| next()).collect())
            .collect();
        let t = PairwiseRelevanceTable::new(classes.clone(), features, scores).unwrap();
        let th = RelevanceThreshold::new(tau_milli as f64 / 1000.0).unwrap();
        let matrix = build_matrix(&t, &th);
        let relevant = t.relevant_features(&th);

        for (i, &(p, q)) in t.pairs().iter().enumerate() {
            // Round trip: the matrix reconstructs exactly the thresholded row.
            let set = matrix.pair_relevant_set(&classes[p], &classes[q]).unwrap();
            prop_assert_eq!(&set, &relevant[i]);
            // Diagonal containment.
            for j in matrix.diagonal(p) {
                prop_assert!(relevant[i].contains(j));
            }
            // Off-diagonal cells never overlap the diagonals.
            for j in matrix.offdiag(p, q) {
                prop_assert!(!matrix.diagonal(p).contains(j));
                prop_assert!(!matrix.diagonal(q).contains(j));
            }
        }
    }

    #[test]
    fn scheme_scores_are_valid_distributions(d in dataset_strategy(24, 3, 4)) {
        let spec = MeasureSpec::default();
        let table = dove(&d, &spec, &Instrumentation::new()).unwrap();
        let scheme = build_scheme(
            &d,
            &SchemeSpec::new(Topology::TwoLayerDove),
            &SelectionArtifact::Pairwise(table),
        )
        .unwrap();
        for i in 0..d.n_examples().min(6) {
            let pred = scheme.predict(d.row(i)).unwrap();
            prop_assert_eq!(pred.scores.len(), d.n_classes());
            for s in &pred.scores {
                prop_assert!((0.0..=1.0).contains(s));
            }
        }
    }
}

#[test]
fn node_counts_across_class_cardinalities() {
    for l in 2..=10usize {
        let d = csfs::synth::gaussian_blobs::<f64>(l * 8, l, 3, 2, 10.0, l as u64).unwrap();
        let spec = MeasureSpec {
            discretization: DiscretizationSpec::new(BinningMethod::EqualFrequency, 2).unwrap(),
            ..MeasureSpec::default()
        };
        let instr = Instrumentation::new();
        let ranking = ova(&d, &spec, &instr).unwrap();
        let table = dove(&d, &spec, &instr).unwrap();
        let matrix = build_matrix(&table, &RelevanceThreshold::default());

        let one = build_scheme(
            &d,
            &SchemeSpec::new(Topology::OneLayerOva),
            &SelectionArtifact::PerClass(ranking),
        )
        .unwrap();
        assert_eq!(one.count_nodes(), l);

        let two = build_scheme(
            &d,
            &SchemeSpec::new(Topology::TwoLayerDove),
            &SelectionArtifact::Pairwise(table.clone()),
        )
        .unwrap();
        assert_eq!(two.count_nodes(), l * (l - 1) / 2);

        let three = build_scheme(
            &d,
            &SchemeSpec::new(Topology::ThreeLayer),
            &SelectionArtifact::Matrix(matrix),
        )
        .unwrap();
        assert_eq!(three.count_nodes(), l + l * (l - 1) / 2);
    }
}

#[test]
fn ranking_json_schema_shape() {
    let d = csfs::synth::gaussian_blobs::<f64>(24, 3, 2, 2, 8.0, 9).unwrap();
    let spec = MeasureSpec::default();
    let r = ova(&d, &spec, &Instrumentation::new()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert!(v.get("classes").is_some());
    assert!(v.get("features").is_some());
    assert_eq!(v["strategy"], "ova");
    assert_eq!(v["scores"].as_array().unwrap().len(), 3);

    let t = dove(&d, &spec, &Instrumentation::new()).unwrap();
    let v: serde_json::Value = serde_json::to_value(&t).unwrap();
    assert_eq!(v["strategy"], "dove");
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
}
