//! The cross-validation loop.

use std::time::Instant;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{kfold_split, load_dataset, select_features, MultiLabelDataset, Standardizer};
use crate::error::{Error, Result};
use crate::estimator::{fit_with_laplacian, training_laplacian, FeatureRanking, MfsirConfig};
use crate::graph::GraphLaplacian;
use crate::metrics::{evaluate, EvaluationResult};
use crate::mlknn::{mlknn_fit, mlknn_predict};

use super::config::{selected_count, ExperimentConfig};
use super::{fnv1a, Algorithm};

/// One evaluated (dataset, algorithm, fraction, fold, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub fraction: f64,
    pub fold: usize,
    pub seed: u64,
    pub n_selected: usize,
    /// The metrics, or why this cell failed.
    pub result: std::result::Result<EvaluationResult, String>,
    /// Optimizer sweeps (mFSIR only).
    pub iterations: Option<usize>,
    pub final_objective: Option<f64>,
    /// Wall-clock seconds spent ranking features (shared by all fractions of a fold).
    pub fit_seconds: f64,
    /// Wall-clock seconds spent training and scoring ML-kNN for this fraction.
    pub eval_seconds: f64,
}

/// Objective values of one mFSIR fit, starting with the initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub dataset: String,
    pub seed: u64,
    pub fold: usize,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// One cell of an α or β sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRecord {
    pub dataset: String,
    /// `"alpha"` or `"beta"`.
    pub parameter: &'static str,
    pub value: f64,
    pub fraction: f64,
    pub fold: usize,
    pub seed: u64,
    pub result: std::result::Result<EvaluationResult, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub traces: Vec<ConvergenceTrace>,
    pub sensitivity: Vec<SensitivityRecord>,
}

/// Ranks features with one of the reference methods.
///
/// `Variance` scores each feature by its population variance rounded to ten significant
/// digits, so columns that are equal up to floating-point noise (e.g. after
/// standardization) tie and fall back to index order. `Random` is a permutation drawn
/// from `seed`.
pub fn baseline_rank(
    method: Algorithm,
    train: &MultiLabelDataset,
    seed: u64,
) -> Result<FeatureRanking> {
    let m = train.num_features();
    match method {
        Algorithm::Variance => {
            let scores = train
                .x()
                .columns()
                .into_iter()
                .map(|c| round_significant(c.var(0.0), 10))
                .collect();
            Ok(FeatureRanking::from_scores(scores))
        }
        Algorithm::Random => {
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut scores = vec![0.0; m];
            for (pos, &j) in perm.iter().enumerate() {
                scores[j] = (m - pos) as f64;
            }
            Ok(FeatureRanking::from_scores(scores))
        }
        Algorithm::Mfsir => Err(Error::invalid("mfsir is not a baseline ranker")),
    }
}

fn round_significant(v: f64, digits: i32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let scale = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

/// Trains ML-kNN on `features` of `train` and scores it on the same features of `test`.
fn evaluate_subset(
    train: &MultiLabelDataset,
    test: &MultiLabelDataset,
    features: &[usize],
    knn_k: usize,
    knn_s: f64,
) -> Result<EvaluationResult> {
    let train = select_features(train, features)?;
    let test = select_features(test, features)?;
    let model = mlknn_fit(&train, knn_k, knn_s)?;
    let out = mlknn_predict(&model, test.x())?;
    evaluate(&out.predictions, &out.scores, test.y())
}

/// Train/test split of one fold, standardized with training statistics when asked.
fn fold_data(
    d: &MultiLabelDataset,
    folds: usize,
    split_seed: u64,
    fold: usize,
    standardize: bool,
) -> Result<(MultiLabelDataset, MultiLabelDataset)> {
    let assignment = kfold_split(d.num_instances(), folds, split_seed)?;
    let (train_idx, test_idx) = assignment.split(fold);
    let (train, test) = (d.subset_rows(&train_idx)?, d.subset_rows(&test_idx)?);
    if !standardize {
        return Ok((train, test));
    }
    let st = Standardizer::fit(train.x());
    Ok((st.apply(&train)?, st.apply(&test)?))
}

/// Smallest training split produced by `folds`-fold CV over `n` instances.
fn min_train_size(n: usize, folds: usize) -> usize {
    n - n.div_ceil(folds)
}

struct Task<'a> {
    dataset: &'a MultiLabelDataset,
    seed: u64,
    fold: usize,
}

#[derive(Default)]
struct TaskOutput {
    records: Vec<RunRecord>,
    trace: Option<ConvergenceTrace>,
    sensitivity: Vec<SensitivityRecord>,
}

fn run_task(cfg: &ExperimentConfig, task: &Task) -> Result<TaskOutput> {
    let d = task.dataset;
    let name = d.name();
    let (train, test) = fold_data(
        d,
        cfg.cv_folds,
        task.seed ^ fnv1a(name),
        task.fold,
        cfg.standardize,
    )?;
    let task_seed = task.seed ^ fnv1a(&format!("{name}/{}", task.fold));
    let mcfg = MfsirConfig {
        seed: task_seed,
        ..cfg.mfsir.clone()
    };
    let y = train.y_f64();
    let m = train.num_features();

    // The graph depends only on the training features, so the main fit and any α/β sweep
    // share it. It is built even when β = 0 so a β sweep has something to weight.
    let needs_graph = cfg.algorithms.contains(&Algorithm::Mfsir)
        || !cfg.alpha_grid.is_empty()
        || !cfg.beta_grid.is_empty();
    let graph_start = Instant::now();
    let laplacian: Option<std::result::Result<GraphLaplacian, String>> = needs_graph.then(|| {
        training_laplacian(
            train.x(),
            &MfsirConfig {
                beta: 1.0,
                ..mcfg.clone()
            },
        )
        .map_err(|e| e.to_string())
    });
    let graph_seconds = graph_start.elapsed().as_secs_f64();

    let mut out = TaskOutput::default();
    for &algorithm in &cfg.algorithms {
        let start = Instant::now();
        let mut iterations = None;
        let mut final_objective = None;
        let ranking = match algorithm {
            Algorithm::Mfsir => {
                let fitted = laplacian
                    .as_ref()
                    .expect("graph is built whenever mfsir runs")
                    .clone()
                    .and_then(|l| {
                        fit_with_laplacian(train.x(), &y, &l, &mcfg).map_err(|e| e.to_string())
                    });
                fitted.map(|(model, ranking)| {
                    iterations = Some(model.iterations_run);
                    final_objective = Some(model.final_objective());
                    out.trace = Some(ConvergenceTrace {
                        dataset: name.to_string(),
                        seed: task.seed,
                        fold: task.fold,
                        history: model.objective_history.clone(),
                        converged: model.converged,
                    });
                    ranking
                })
            }
            baseline => baseline_rank(baseline, &train, task_seed).map_err(|e| e.to_string()),
        };
        let mut fit_seconds = start.elapsed().as_secs_f64();
        if algorithm == Algorithm::Mfsir {
            fit_seconds += graph_seconds;
        }
        if let Err(msg) = &ranking {
            warn!(
                "{name} fold {} seed {}: {algorithm} failed: {msg}",
                task.fold, task.seed
            );
        }
        for &fraction in &cfg.fractions {
            let k = selected_count(fraction, m);
            let start = Instant::now();
            let result = ranking.as_ref().map_err(Clone::clone).and_then(|r| {
                evaluate_subset(&train, &test, r.top(k), cfg.knn_k, cfg.knn_s)
                    .map_err(|e| e.to_string())
            });
            out.records.push(RunRecord {
                dataset: name.to_string(),
                algorithm,
                fraction,
                fold: task.fold,
                seed: task.seed,
                n_selected: k,
                result,
                iterations,
                final_objective,
                fit_seconds,
                eval_seconds: start.elapsed().as_secs_f64(),
            });
        }
    }

    let grids = [("alpha", &cfg.alpha_grid), ("beta", &cfg.beta_grid)];
    for (parameter, grid) in grids {
        for &value in grid.iter() {
            let mut scfg = mcfg.clone();
            match parameter {
                "alpha" => scfg.alpha = value,
                _ => scfg.beta = value,
            }
            let ranking = laplacian
                .as_ref()
                .expect("graph is built whenever a sweep runs")
                .clone()
                .and_then(|l| {
                    fit_with_laplacian(train.x(), &y, &l, &scfg).map_err(|e| e.to_string())
                })
                .map(|(_, r)| r);
            for &fraction in &cfg.fractions {
                let k = selected_count(fraction, m);
                let result = ranking.as_ref().map_err(Clone::clone).and_then(|r| {
                    evaluate_subset(&train, &test, r.top(k), cfg.knn_k, cfg.knn_s)
                        .map_err(|e| e.to_string())
                });
                out.sensitivity.push(SensitivityRecord {
                    dataset: name.to_string(),
                    parameter,
                    value,
                    fraction,
                    fold: task.fold,
                    seed: task.seed,
                    result,
                });
            }
        }
    }
    info!("{name} seed {} fold {} done", task.seed, task.fold);
    Ok(out)
}

/// Runs every (dataset, seed, fold) task, in parallel, and collects the results in a
/// fixed order. Ranking or evaluation failures are recorded per cell; only problems
/// with the configuration or the input files abort the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut datasets = Vec::with_capacity(cfg.datasets.len());
    for spec in &cfg.datasets {
        let d = load_dataset(&spec.arff, &spec.labels)?;
        if datasets
            .iter()
            .any(|o: &MultiLabelDataset| o.name() == d.name())
        {
            return Err(Error::invalid(format!(
                "two datasets are named `{}`",
                d.name()
            )));
        }
        cfg.mfsir.validate(d.num_labels())?;
        let n = d.num_instances();
        if cfg.cv_folds > n {
            return Err(Error::invalid(format!(
                "{}: {} folds but only {n} instances",
                d.name(),
                cfg.cv_folds
            )));
        }
        if min_train_size(n, cfg.cv_folds) <= cfg.knn_k {
            return Err(Error::invalid(format!(
                "{}: training folds are too small for knn_k = {}",
                d.name(),
                cfg.knn_k
            )));
        }
        info!(
            "loaded {}: n={} m={} q={}",
            d.name(),
            n,
            d.num_features(),
            d.num_labels()
        );
        datasets.push(d);
    }

    let tasks: Vec<Task> = datasets
        .iter()
        .flat_map(|d| {
            cfg.seeds.iter().flat_map(move |&seed| {
                (0..cfg.cv_folds).map(move |fold| Task {
                    dataset: d,
                    seed,
                    fold,
                })
            })
        })
        .collect();
    let results: Vec<Result<TaskOutput>> = tasks.par_iter().map(|t| run_task(cfg, t)).collect();

    let mut out = ExperimentOutput::default();
    for r in results {
        let r = r?;
        out.records.extend(r.records);
        out.traces.extend(r.trace);
        out.sensitivity.extend(r.sensitivity);
    }
    Ok(out)
}

/// Metrics of one fold at one feature fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldEvaluation {
    pub fraction: f64,
    pub fold: usize,
    pub n_selected: usize,
    pub result: EvaluationResult,
}

/// Cross-validates ML-kNN on the top features of a fixed `ranking` (file order when
/// `None`). Unlike [`run_experiment`], any failure aborts.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_ranking(
    d: &MultiLabelDataset,
    ranking: Option<&FeatureRanking>,
    fractions: &[f64],
    folds: usize,
    seed: u64,
    knn_k: usize,
    knn_s: f64,
    standardize: bool,
) -> Result<Vec<FoldEvaluation>> {
    let m = d.num_features();
    let order: Vec<usize> = match ranking {
        Some(r) if r.order.len() != m => {
            return Err(Error::Data(format!(
                "ranking covers {} features, dataset has {m}",
                r.order.len()
            )))
        }
        Some(r) => r.order.clone(),
        None => (0..m).collect(),
    };
    if fractions.is_empty() || fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::invalid(
            "fractions must be nonempty and lie in (0, 1]",
        ));
    }
    if folds < 2 || folds > d.num_instances() {
        return Err(Error::invalid(format!(
            "cannot make {folds} folds of {} instances",
            d.num_instances()
        )));
    }
    let mut out = Vec::new();
    for fold in 0..folds {
        let (train, test) = fold_data(d, folds, seed ^ fnv1a(d.name()), fold, standardize)?;
        for &fraction in fractions {
            let k = selected_count(fraction, m);
            out.push(FoldEvaluation {
                fraction,
                fold,
                n_selected: k,
                result: evaluate_subset(&train, &test, &order[..k], knn_k, knn_s)?,
            });
        }
    }
    Ok(out)
}
