//! The `mfsir` command-line tool.
//!
//! ```text
//! mfsir run --config sweep.conf [--key value ...]
//! mfsir rank --dataset emotions.arff --labels emotions.xml [--alpha 1 --eta 1e-4 ...]
//! mfsir evaluate --dataset emotions.arff --labels emotions.xml --ranking ranking.csv
//! mfsir compare --results out/results.csv --metric hl --direction min
//! mfsir summarize emotions.arff emotions.xml
//! ```
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::dataset::{load_dataset, standardize, summarize, DatasetSummary};
use crate::error::{Error, Result};
use crate::estimator::{fit_with_laplacian, FeatureRanking, InitMode, MfsirConfig};
use crate::experiment::{
    compare_results, emit_outputs, evaluate_ranking, run_experiment, ExperimentConfig, Metric,
    DEFAULT_FRACTIONS,
};
use crate::graph::{
    build_laplacian, build_similarity_with, GraphConfig, GraphLaplacian, KernelWidth,
};
use crate::io::{ensure_dir, write_matrix_csv};
use crate::metrics::EvaluationResult;

#[derive(Debug, Parser)]
#[command(
    name = "mfsir",
    version,
    about = "Multi-label feature selection with implicit sparsity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a cross-validated feature-fraction sweep described by a config file.
    ///
    /// Any config key can be overridden after the flags, e.g. `--eta 1e-3 --seeds 0,1`.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// `--key value` or `--key=value` pairs overriding the config file.
        #[arg(
            trailing_var_arg = true,
            allow_hyphen_values = true,
            value_name = "OVERRIDES"
        )]
        overrides: Vec<String>,
    },
    /// Fit the estimator on a whole dataset and print the feature ranking as CSV.
    Rank(RankArgs),
    /// Cross-validate ML-kNN on the top features of a ranking and print per-fold metrics.
    Evaluate(EvaluateArgs),
    /// Friedman test and Nemenyi critical difference over a results file.
    Compare(CompareArgs),
    /// Print `name,n,m,q,lcard,lden` for a dataset.
    Summarize { arff: PathBuf, labels: PathBuf },
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-4)]
    eta: f64,
    #[arg(long, default_value_t = 1e-5)]
    varpi: f64,
    /// Latent label dimension; defaults to round(0.4 q) clipped below q.
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long, default_value_t = 200)]
    tmax: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `sparse_nonneg` or `signed`.
    #[arg(long, default_value = "sparse_nonneg", value_parser = parse_init_mode)]
    init_mode: InitMode,
    /// Neighbours per instance in the similarity graph.
    #[arg(long, default_value_t = 5)]
    graph_p: usize,
    /// Heat-kernel width: a positive number or `adaptive`.
    #[arg(long, default_value = "adaptive")]
    graph_lambda: String,
    /// Fit on the raw features instead of z-scores.
    #[arg(long)]
    no_standardize: bool,
    /// Write the ranking here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write G, H, V, B and the objective history as CSV into this directory.
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Also write the similarity matrix S and Laplacian L as CSV into this directory.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Ranking CSV as written by `rank`; without it all features are used in file order.
    #[arg(long)]
    ranking: Option<PathBuf>,
    /// Comma-separated fractions of features to keep (default 0.05..0.30 with a ranking, 1 without).
    #[arg(long, value_delimiter = ',')]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    knn_k: usize,
    #[arg(long, default_value_t = 1.0)]
    knn_s: f64,
    #[arg(long)]
    no_standardize: bool,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Min,
    Max,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, default_value = "results.csv")]
    results: PathBuf,
    /// One of hl, rl, mauc, mf1.
    #[arg(long, value_parser = parse_metric)]
    metric: Metric,
    #[arg(long, value_enum)]
    direction: Direction,
    /// Critical value of the Nemenyi test; defaults to the α = 0.05 table.
    #[arg(long)]
    q_alpha: Option<f64>,
    /// Directory for cd_diagram.csv and cd.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_metric(s: &str) -> Result<Metric> {
    s.parse()
}

fn parse_init_mode(s: &str) -> Result<InitMode> {
    s.parse()
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point of the binary.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    run_with_args(std::env::args_os())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { config, overrides } => cmd_run(&config, &overrides),
        Command::Rank(a) => cmd_rank(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Summarize { arff, labels } => {
            let d = load_dataset(&arff, &labels)?;
            println!("{}", DatasetSummary::CSV_HEADER);
            println!("{}", summarize(&d).csv_row());
            Ok(())
        }
    }
}

/// Applies `--key value` / `--key=value` overrides. The first `--dataset` replaces the
/// datasets of the file; further ones add to it.
fn apply_overrides(cfg: &mut ExperimentConfig, overrides: &[String]) -> Result<()> {
    let mut datasets_replaced = false;
    let mut it = overrides.iter();
    while let Some(tok) = it.next() {
        let flag = tok
            .strip_prefix("--")
            .ok_or_else(|| Error::invalid(format!("expected `--key value`, got `{tok}`")))?;
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::invalid(format!("`{tok}` needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        if key.replace('-', "_") == "dataset" && !datasets_replaced {
            cfg.datasets.clear();
            datasets_replaced = true;
        }
        cfg.set(&key, &value, Path::new(""))?;
    }
    Ok(())
}

fn cmd_run(config: &Path, overrides: &[String]) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    apply_overrides(&mut cfg, overrides)?;
    let out = run_experiment(&cfg)?;
    emit_outputs(&out, &cfg.output, cfg.svg)?;
    let failed = out.records.iter().filter(|r| r.result.is_err()).count();
    println!(
        "{} records ({} failed) written to {}",
        out.records.len(),
        failed,
        cfg.output.display()
    );
    Ok(())
}

fn parse_width(s: &str) -> Result<KernelWidth> {
    match s.trim() {
        "adaptive" => Ok(KernelWidth::Adaptive),
        v => v
            .parse()
            .ok()
            .filter(|l: &f64| *l > 0.0 && l.is_finite())
            .map(KernelWidth::Fixed)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "graph-lambda must be positive or `adaptive`, got `{s}`"
                ))
            }),
    }
}

fn cmd_rank(a: &RankArgs) -> Result<()> {
    let d = load_dataset(&a.dataset, &a.labels)?;
    let d = if a.no_standardize {
        d
    } else {
        standardize(&d).0
    };
    let n = d.num_instances();
    if a.graph_p == 0 {
        return Err(Error::invalid("graph-p must be at least 1"));
    }
    let cfg = MfsirConfig {
        alpha: a.alpha,
        beta: a.beta,
        eta: a.eta,
        varpi: a.varpi,
        latent_dim: a.latent_dim,
        t_max: a.tmax,
        tol: a.tol,
        seed: a.seed,
        init_mode: a.init_mode,
        graph: GraphConfig {
            p: a.graph_p.min(n.saturating_sub(1)).max(1),
            width: parse_width(&a.graph_lambda)?,
        },
    };
    cfg.validate(d.num_labels())?;

    let laplacian = if n < 2 {
        GraphLaplacian::zeros(n)
    } else {
        let graph = build_similarity_with(d.x(), &cfg.graph)?;
        if let Some(dir) = &a.dump_graph {
            ensure_dir(dir)?;
            write_matrix_csv(&dir.join("S.csv"), graph.matrix())?;
        }
        let l = build_laplacian(&graph);
        if let Some(dir) = &a.dump_graph {
            write_matrix_csv(&dir.join("L.csv"), l.matrix())?;
        }
        l
    };
    let (model, ranking) = fit_with_laplacian(d.x(), &d.y_f64(), &laplacian, &cfg)?;
    info!(
        "{} iterations, converged: {}, objective {}",
        model.iterations_run,
        model.converged,
        model.final_objective()
    );
    if let Some(dir) = &a.model_dir {
        model.write_csv(dir)?;
    }
    match &a.out {
        Some(path) => ranking.write_csv(path, d.feature_names()),
        None => ranking.write_to(std::io::stdout().lock(), d.feature_names()),
    }
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let d = load_dataset(&a.dataset, &a.labels)?;
    let ranking = a
        .ranking
        .as_deref()
        .map(FeatureRanking::read_csv)
        .transpose()?;
    let fractions = match (&ranking, a.fractions.is_empty()) {
        (_, false) => a.fractions.clone(),
        (Some(_), true) => DEFAULT_FRACTIONS.to_vec(),
        (None, true) => vec![1.0],
    };
    let algorithm = a
        .ranking
        .as_deref()
        .and_then(Path::file_stem)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "all_features".to_string());
    let evals = evaluate_ranking(
        &d,
        ranking.as_ref(),
        &fractions,
        a.folds,
        a.seed,
        a.knn_k,
        a.knn_s,
        !a.no_standardize,
    )?;
    let mut text = String::new();
    text.push_str(EvaluationResult::CSV_HEADER);
    text.push('\n');
    for e in &evals {
        text.push_str(&e.result.csv_row(d.name(), &algorithm, e.fraction, e.fold));
        text.push('\n');
    }
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let higher_is_better = matches!(a.direction, Direction::Max);
    let report = compare_results(&a.results, a.metric, higher_is_better, a.q_alpha)?;
    print!("{report}");
    if let Some(dir) = &a.out {
        report.write_csv(dir)?;
    }
    Ok(())
}
