//! Subcommand implementations: flag translation, artifact I/O and output
//! formatting. All file writes go through a temp-file-plus-rename so reruns
//! are atomic, and identical inputs always produce byte-identical outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};

use csfs::dataset::{Dataset, LabelSpec, LoadOptions};
use csfs::eval::Pipeline;
use csfs::matrix::build_matrix;
use csfs::measure::{BinningMethod, DiscretizationSpec, MeasureKind, MeasureSpec};
use csfs::scheme::{build_scheme, EmptyNodePolicy, SchemeSpec, SelectionArtifact, Topology};
use csfs::selection::{
    aggregate_pairwise, dove, ova, ove, rank_global, Aggregate, Instrumentation,
    RelevanceThreshold, Strategy,
};
use csfs::synth;
use csfs::{BaseClassifierSpec, BaseKind, ClassSpecificRanking, GlobalRanking};

use crate::{
    CliError, DataArgs, EvaluateArgs, MatrixArgs, MeasureArgs, PredictArgs, RankArgs, SchemeArgs,
    SynthArgs, TrainArgs,
};

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ---------------------------------------------------------------------------
// Flag translation

fn load_options(args: &DataArgs) -> Result<LoadOptions> {
    let label = match &args.label {
        None => LabelSpec::Last,
        Some(s) => match s.parse::<usize>() {
            Ok(idx) => LabelSpec::Index(idx),
            Err(_) => LabelSpec::Name(s.clone()),
        },
    };
    let impute_mean = match args.impute.as_deref() {
        None => false,
        Some("mean") => true,
        Some(other) => {
            return Err(usage(format!(
                "unsupported imputation {other:?}; only `mean` is available"
            )))
        }
    };
    Ok(LoadOptions { label, impute_mean })
}

fn load_dataset(args: &DataArgs) -> Result<Dataset<f64>> {
    let options = load_options(args)?;
    Ok(Dataset::load_csv(&args.data, &options)
        .with_context(|| format!("loading {}", args.data.display()))?)
}

fn measure_spec(args: &MeasureArgs) -> Result<MeasureSpec> {
    if args.bins < 2 {
        return Err(usage(format!("--bins must be at least 2, got {}", args.bins)));
    }
    let method = match args.binning.as_str() {
        "ew" => BinningMethod::EqualWidth,
        _ => BinningMethod::EqualFrequency,
    };
    let kind = match args.measure.as_str() {
        "nig" => MeasureKind::NormalizedInformationGain,
        _ => MeasureKind::SymmetricUncertainty,
    };
    Ok(MeasureSpec {
        kind,
        discretization: DiscretizationSpec { method, bins: args.bins },
        global_bins: args.global_bins,
    })
}

fn aggregate_of(name: &str) -> Aggregate {
    match name {
        "min" => Aggregate::Min,
        "max" => Aggregate::Max,
        _ => Aggregate::Mean,
    }
}

fn strategy_of(name: &str) -> Strategy {
    match name {
        "global" => Strategy::Global,
        "ove" => Strategy::Ove,
        "dove" => Strategy::Dove,
        _ => Strategy::Ova,
    }
}

fn topology_of(name: &str) -> Topology {
    match name {
        "traditional" => Topology::Traditional,
        "two-layer-dove" => Topology::TwoLayerDove,
        "three-layer" => Topology::ThreeLayer,
        _ => Topology::OneLayerOva,
    }
}

fn threshold_of(tau: f64) -> Result<RelevanceThreshold<f64>> {
    RelevanceThreshold::new(tau).map_err(|e| usage(e.to_string()))
}

fn scheme_spec(args: &SchemeArgs) -> Result<SchemeSpec<f64>> {
    let base = BaseClassifierSpec {
        kind: match args.base.as_str() {
            "centroid" => BaseKind::NearestCentroid,
            _ => BaseKind::GaussianNaiveBayes,
        },
        smoothing: args.smoothing,
        temperature: args.temperature,
    };
    base.validate().map_err(|e| usage(e.to_string()))?;
    if args.diag_weight <= 0.0 {
        return Err(usage(format!(
            "--diag-weight must be positive, got {}",
            args.diag_weight
        )));
    }
    Ok(SchemeSpec {
        topology: topology_of(&args.topology),
        threshold: threshold_of(args.tau)?,
        base,
        empty_policy: match args.empty_node.as_str() {
            "omit" => EmptyNodePolicy::Omit,
            _ => EmptyNodePolicy::Neutral,
        },
        diag_weight: args.diag_weight,
    })
}

// ---------------------------------------------------------------------------
// Output plumbing

/// Write bytes to a file atomically (temp file in the same directory, then
/// rename), or to stdout when no path is given.
fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        None => {
            std::io::stdout()
                .write_all(bytes)
                .context("writing to stdout")?;
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let mut tmp = match dir {
                Some(dir) => tempfile::NamedTempFile::new_in(dir),
                None => tempfile::NamedTempFile::new_in("."),
            }
            .context("creating temp file")?;
            tmp.write_all(bytes).context("writing temp file")?;
            tmp.persist(path)
                .map_err(|e| anyhow!("renaming into {}: {}", path.display(), e.error))?;
            Ok(())
        }
    }
}

fn emit_json<T: serde::Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serializing JSON")?;
    bytes.push(b'\n');
    emit(output, &bytes)
}

/// CSV mirror of a score matrix: one leading `row` column naming the class,
/// pair or "global", then one column per feature.
fn scores_csv(
    row_names: &[String],
    features: &[String],
    rows: &[Vec<f64>],
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row".to_string()];
    header.extend(features.iter().cloned());
    w.write_record(&header).context("writing CSV header")?;
    for (name, row) in row_names.iter().zip(rows.iter()) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&record).context("writing CSV row")?;
    }
    Ok(w.into_inner().context("flushing CSV")?)
}

// ---------------------------------------------------------------------------
// rank

enum RankOutput {
    Global(GlobalRanking<f64>),
    PerClass(ClassSpecificRanking<f64>),
    Pairwise(csfs::PairwiseRelevanceTable<f64>),
}

pub fn rank(args: RankArgs) -> Result<()> {
    let strategy = strategy_of(&args.strategy);
    if args.collapse && strategy == Strategy::Global {
        return Err(usage(
            "--collapse needs a class-specific strategy (ova, ove or dove)",
        ));
    }
    let spec = measure_spec(&args.measure)?;
    let agg = aggregate_of(&args.aggregate);
    let d = load_dataset(&args.data)?;
    let instr = Instrumentation::new();

    let mut result = match strategy {
        Strategy::Global => RankOutput::Global(
            rank_global(&d, &spec, &instr).map_err(|e| CliError::Data(e.into()))?,
        ),
        Strategy::Ova => {
            RankOutput::PerClass(ova(&d, &spec, &instr).map_err(|e| CliError::Data(e.into()))?)
        }
        Strategy::Ove => RankOutput::PerClass(
            ove(&d, &spec, agg, &instr).map_err(|e| CliError::Data(e.into()))?,
        ),
        Strategy::Dove => {
            RankOutput::Pairwise(dove(&d, &spec, &instr).map_err(|e| CliError::Data(e.into()))?)
        }
    };
    if args.collapse {
        let collapsed = match &result {
            RankOutput::PerClass(r) => r.collapse(agg),
            RankOutput::Pairwise(t) => aggregate_pairwise(t, agg).collapse(agg),
            RankOutput::Global(_) => unreachable!("rejected above"),
        };
        result = RankOutput::Global(collapsed);
    }

    match args.format.as_str() {
        "csv" => {
            let bytes = match &result {
                RankOutput::Global(g) => {
                    scores_csv(&["global".to_string()], &g.features, &g.scores)?
                }
                RankOutput::PerClass(r) => scores_csv(&r.classes, &r.features, &r.scores)?,
                RankOutput::Pairwise(t) => {
                    let names: Vec<String> = t
                        .pairs()
                        .iter()
                        .map(|&(p, q)| format!("{}|{}", t.classes()[p], t.classes()[q]))
                        .collect();
                    let rows: Vec<Vec<f64>> =
                        (0..t.n_pairs()).map(|i| t.row(i).to_vec()).collect();
                    scores_csv(&names, t.features(), &rows)?
                }
            };
            emit(args.output.as_deref(), &bytes)
        }
        _ => match &result {
            RankOutput::Global(g) => emit_json(args.output.as_deref(), g),
            RankOutput::PerClass(r) => emit_json(args.output.as_deref(), r),
            RankOutput::Pairwise(t) => emit_json(args.output.as_deref(), t),
        },
    }
}

// ---------------------------------------------------------------------------
// matrix

pub fn matrix(args: MatrixArgs) -> Result<()> {
    let th = threshold_of(args.tau)?;
    let bytes = fs::read(&args.table)
        .with_context(|| format!("reading {}", args.table.display()))?;
    let table: csfs::PairwiseRelevanceTable<f64> = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing pairwise table {}", args.table.display()))?;
    let matrix = build_matrix(&table, &th);
    emit_json(args.output.as_deref(), &matrix)
}

// ---------------------------------------------------------------------------
// train

/// Detect the artifact flavor from its JSON shape: relevance matrices carry a
/// `diagonal` field, everything else declares its `strategy`.
fn load_artifact(path: &Path) -> Result<SelectionArtifact<f64>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing artifact {}", path.display()))?;
    let artifact = if value.get("diagonal").is_some() {
        SelectionArtifact::Matrix(
            serde_json::from_value(value).context("parsing relevance matrix artifact")?,
        )
    } else {
        match value.get("strategy").and_then(|s| s.as_str()) {
            Some("dove") => SelectionArtifact::Pairwise(
                serde_json::from_value(value).context("parsing pairwise table artifact")?,
            ),
            Some("ova") | Some("ove") => SelectionArtifact::PerClass(
                serde_json::from_value(value).context("parsing class-specific ranking")?,
            ),
            Some("global") => SelectionArtifact::Global(
                serde_json::from_value(value).context("parsing global ranking")?,
            ),
            other => {
                return Err(CliError::Data(anyhow!(
                    "artifact {} has unrecognized strategy {:?}",
                    path.display(),
                    other
                )))
            }
        }
    };
    Ok(artifact)
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut spec = scheme_spec(&args.scheme)?;
    let d = load_dataset(&args.data)?;
    let artifact = load_artifact(&args.artifact)?;
    if let SelectionArtifact::Matrix(m) = &artifact {
        // The matrix already encodes its threshold; keep the scheme in sync.
        spec.threshold = RelevanceThreshold::new(m.tau()).map_err(|e| CliError::Data(e.into()))?;
    }
    let scheme = build_scheme(&d, &spec, &artifact).map_err(|e| CliError::Data(e.into()))?;
    for warning in &scheme.warnings {
        eprintln!("warning: {warning}");
    }
    emit_json(args.output.as_deref(), &scheme)
}

// ---------------------------------------------------------------------------
// predict

pub fn predict(args: PredictArgs) -> Result<()> {
    let bytes = fs::read(&args.scheme)
        .with_context(|| format!("reading {}", args.scheme.display()))?;
    let scheme: csfs::TrainedScheme64 = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing scheme {}", args.scheme.display()))?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&args.data)
        .with_context(|| format!("opening {}", args.data.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("reading CSV header")?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let columns: Vec<usize> = scheme
        .features
        .iter()
        .map(|f| {
            headers
                .iter()
                .position(|h| h == f)
                .ok_or_else(|| anyhow!("input is missing feature column {f:?}"))
        })
        .collect::<std::result::Result<_, _>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["example_id".to_string(), "predicted".to_string()];
    header.extend(scheme.classes.iter().map(|c| format!("score_{c}")));
    w.write_record(&header).context("writing header")?;

    for (row_no, record) in reader.records().enumerate() {
        let record = record.context("reading CSV row")?;
        let x: Vec<f64> = columns
            .iter()
            .map(|&c| {
                let cell = record.get(c).unwrap_or("").trim();
                cell.parse::<f64>()
                    .map_err(|_| anyhow!("row {row_no}: cell {cell:?} is not a number"))
            })
            .collect::<std::result::Result<_, _>>()?;
        let pred = scheme
            .predict(&x)
            .map_err(|e| CliError::Data(anyhow!("row {row_no}: {e}")))?;
        let mut record = vec![row_no.to_string(), pred.label.clone()];
        record.extend(pred.scores.iter().map(|s| format!("{s}")));
        w.write_record(&record).context("writing prediction")?;
    }
    let bytes = w.into_inner().context("flushing predictions")?;
    emit(args.output.as_deref(), &bytes)
}

// ---------------------------------------------------------------------------
// evaluate

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let scheme = scheme_spec(&args.scheme)?;
    let strategy = match &args.strategy {
        Some(name) => strategy_of(name),
        None => Pipeline::<f64>::default_strategy(scheme.topology),
    };
    let pipeline = Pipeline {
        measure: measure_spec(&args.measure)?,
        strategy,
        aggregate: aggregate_of(&args.aggregate),
        scheme,
    };
    pipeline.validate().map_err(|e| usage(e.to_string()))?;
    if args.k < 2 {
        return Err(usage(format!("--k must be at least 2, got {}", args.k)));
    }

    let d = load_dataset(&args.data)?;
    let evaluation =
        csfs::evaluate(&d, &pipeline, args.k, args.seed).map_err(|e| CliError::Data(e.into()))?;
    let report = &evaluation.report;

    if let Some(dir) = &args.dump_artifacts {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        for (fold, artifact) in evaluation.fold_artifacts.iter().enumerate() {
            let path = dir.join(format!("fold_{fold}.json"));
            match artifact {
                SelectionArtifact::Global(a) => emit_json(Some(&path), a)?,
                SelectionArtifact::PerClass(a) => emit_json(Some(&path), a)?,
                SelectionArtifact::Pairwise(a) => emit_json(Some(&path), a)?,
                SelectionArtifact::Matrix(a) => emit_json(Some(&path), a)?,
            }
        }
    }

    // Human-readable summary on stderr; the JSON report owns stdout.
    eprintln!(
        "accuracy {:.4}  (topology {}, strategy {}, k={}, seed={})",
        report.accuracy,
        args.scheme.topology,
        args.strategy.as_deref().unwrap_or("default"),
        report.k,
        report.seed
    );
    eprintln!("{:<12} {:>8} {:>8}", "class", "recall", "support");
    for (i, class) in report.classes.iter().enumerate() {
        let support: u64 = report.confusion[i].iter().sum();
        eprintln!(
            "{:<12} {:>8.4} {:>8}",
            class, report.per_class_recall[i], support
        );
    }
    eprintln!("confusion matrix (rows = true class, columns = predicted):");
    let mut head = format!("{:<12}", "");
    for class in &report.classes {
        head.push_str(&format!("{class:>8}"));
    }
    eprintln!("{head}");
    for (i, class) in report.classes.iter().enumerate() {
        let mut line = format!("{class:<12}");
        for count in &report.confusion[i] {
            line.push_str(&format!("{count:>8}"));
        }
        eprintln!("{line}");
    }
    eprintln!(
        "measure calls {} ({} examples touched) in {:.3}s",
        report.instrumentation.measure_calls,
        report.instrumentation.examples_touched,
        report.instrumentation.wall_secs
    );

    emit_json(args.output.as_deref(), report)
}

// ---------------------------------------------------------------------------
// synth

pub fn synth(args: SynthArgs) -> Result<()> {
    let d: Dataset<f64> = match args.kind.as_str() {
        "blobs" => synth::gaussian_blobs(
            args.n,
            args.classes,
            args.features,
            args.informative,
            args.separation,
            args.seed,
        )
        .map_err(|e| CliError::Data(e.into()))?,
        _ => synth::planted_dataset(args.n, args.seed).map_err(|e| CliError::Data(e.into()))?,
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = d.features().to_vec();
    header.push("label".to_string());
    w.write_record(&header).context("writing header")?;
    for i in 0..d.n_examples() {
        let mut record: Vec<String> = d.row(i).iter().map(|v| format!("{v}")).collect();
        record.push(d.label_of(i).to_string());
        w.write_record(&record).context("writing row")?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    emit(args.output.as_deref(), &bytes)
}
