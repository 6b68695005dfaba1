//! Result files written after a sweep.
//!
//! | file | contents |
//! |---|---|
//! | `results.csv` | one row per [`RunRecord`] |
//! | `summary.csv` | mean/std per dataset × algorithm × metric, pooled over folds, fractions and seeds |
//! | `summary_by_fraction.csv` | the same per fraction (pooled over folds and seeds only) |
//! | `convergence.csv` | objective value per iteration of every mFSIR fit |
//! | `curve_<metric>.csv` | metric against selected fraction per dataset × algorithm |
//! | `sensitivity.csv` | metric against α or β, when a sweep was configured |
//!
//! `std` is the sample standard deviation (0 for a single value). Failed cells appear
//! in `results.csv` with empty metric columns and are left out of every aggregate.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::ensure_dir;
use crate::metrics::EvaluationResult;

use super::plot::{line_plot_svg, Series};
use super::run::{ExperimentOutput, RunRecord};
use super::Metric;

pub const RESULTS_HEADER: [&str; 17] = [
    "dataset",
    "algorithm",
    "fraction",
    "fold",
    "seed",
    "n_selected",
    "status",
    "hl",
    "rl",
    "mauc",
    "mf1",
    "skipped_i",
    "skipped_l",
    "iterations",
    "final_objective",
    "fit_seconds",
    "eval_seconds",
];

/// Columns that hold wall-clock measurements and therefore differ between reruns.
pub const TIMING_COLUMNS: [&str; 2] = ["fit_seconds", "eval_seconds"];

/// Mean, sample standard deviation and count of a group of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl MetricStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std,
            count: values.len(),
        })
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn record_fields(r: &RunRecord) -> Vec<String> {
    let mut f = vec![
        r.dataset.clone(),
        r.algorithm.to_string(),
        r.fraction.to_string(),
        r.fold.to_string(),
        r.seed.to_string(),
        r.n_selected.to_string(),
    ];
    match &r.result {
        Ok(e) => f.extend([
            "ok".to_string(),
            e.hamming_loss.to_string(),
            e.ranking_loss.to_string(),
            e.macro_auc.to_string(),
            e.macro_f1.to_string(),
            e.skipped_instances.to_string(),
            e.skipped_labels.to_string(),
        ]),
        Err(msg) => {
            f.push(format!("failed: {msg}"));
            f.extend(std::iter::repeat_n(String::new(), 6));
        }
    }
    f.extend([
        opt(r.iterations),
        opt(r.final_objective),
        r.fit_seconds.to_string(),
        r.eval_seconds.to_string(),
    ]);
    f
}

/// Reads `results.csv` back into records.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(RESULTS_HEADER) {
        return Err(Error::Data(format!(
            "{}: not a results file (unexpected header)",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |col: usize| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("invalid {}", RESULTS_HEADER[col]),
        };
        let get = |col: usize| rec.get(col).unwrap_or("");
        macro_rules! num {
            ($col:expr) => {
                get($col).parse().map_err(|_| bad($col))?
            };
        }
        macro_rules! opt_num {
            ($col:expr) => {
                match get($col) {
                    "" => None,
                    s => Some(s.parse().map_err(|_| bad($col))?),
                }
            };
        }
        let status = get(6);
        let result = if status == "ok" {
            Ok(EvaluationResult {
                hamming_loss: num!(7),
                ranking_loss: num!(8),
                macro_auc: num!(9),
                macro_f1: num!(10),
                skipped_instances: num!(11),
                skipped_labels: num!(12),
            })
        } else {
            Err(status
                .strip_prefix("failed: ")
                .unwrap_or(status)
                .to_string())
        };
        out.push(RunRecord {
            dataset: get(0).to_string(),
            algorithm: get(1).parse().map_err(|_| bad(1))?,
            fraction: num!(2),
            fold: num!(3),
            seed: num!(4),
            n_selected: num!(5),
            result,
            iterations: opt_num!(13),
            final_objective: opt_num!(14),
            fit_seconds: num!(15),
            eval_seconds: num!(16),
        });
    }
    Ok(out)
}

/// Fractions are positive, so their bit patterns sort like the values.
fn frac_key(f: f64) -> u64 {
    f.to_bits()
}

type Groups = BTreeMap<(String, String, u64), Vec<EvaluationResult>>;

fn group(records: &[RunRecord], by_fraction: bool) -> Groups {
    let mut groups = Groups::new();
    for r in records {
        if let Ok(e) = &r.result {
            let key = (
                r.dataset.clone(),
                r.algorithm.to_string(),
                if by_fraction { frac_key(r.fraction) } else { 0 },
            );
            groups.entry(key).or_default().push(*e);
        }
    }
    groups
}

fn stats_for(results: &[EvaluationResult], metric: Metric) -> MetricStats {
    let v: Vec<f64> = results.iter().map(|e| metric.of(e)).collect();
    MetricStats::of(&v).expect("groups are never empty")
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn finish(mut w: csv::Writer<std::fs::File>, dir: &Path, name: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(dir.join(name), e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes every artifact of a sweep into `dir` (created if needed).
pub fn emit_outputs(output: &ExperimentOutput, dir: &Path, svg: bool) -> Result<()> {
    if output.records.is_empty() {
        return Err(Error::invalid("no records to write"));
    }
    ensure_dir(dir)?;

    let mut w = writer(dir, "results.csv")?;
    w.write_record(RESULTS_HEADER)?;
    for r in &output.records {
        w.write_record(record_fields(r))?;
    }
    finish(w, dir, "results.csv")?;

    let pooled = group(&output.records, false);
    let mut w = writer(dir, "summary.csv")?;
    w.write_record(["dataset", "algorithm", "metric", "mean", "std", "count"])?;
    for metric in Metric::ALL {
        for ((dataset, algorithm, _), results) in &pooled {
            let s = stats_for(results, metric);
            w.write_record([
                dataset.clone(),
                algorithm.clone(),
                metric.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                s.count.to_string(),
            ])?;
        }
    }
    finish(w, dir, "summary.csv")?;

    let per_fraction = group(&output.records, true);
    let mut w = writer(dir, "summary_by_fraction.csv")?;
    w.write_record([
        "dataset",
        "algorithm",
        "fraction",
        "metric",
        "mean",
        "std",
        "count",
    ])?;
    for metric in Metric::ALL {
        for ((dataset, algorithm, frac), results) in &per_fraction {
            let s = stats_for(results, metric);
            w.write_record([
                dataset.clone(),
                algorithm.clone(),
                f64::from_bits(*frac).to_string(),
                metric.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                s.count.to_string(),
            ])?;
        }
    }
    finish(w, dir, "summary_by_fraction.csv")?;

    for metric in Metric::ALL {
        let name = format!("curve_{metric}.csv");
        let mut w = writer(dir, &name)?;
        w.write_record(["dataset", "algorithm", "fraction", "mean", "std"])?;
        for ((dataset, algorithm, frac), results) in &per_fraction {
            let s = stats_for(results, metric);
            w.write_record([
                dataset.clone(),
                algorithm.clone(),
                f64::from_bits(*frac).to_string(),
                s.mean.to_string(),
                s.std.to_string(),
            ])?;
        }
        finish(w, dir, &name)?;
    }

    let mut w = writer(dir, "convergence.csv")?;
    w.write_record(["dataset", "seed", "fold", "iteration", "objective"])?;
    for t in &output.traces {
        for (it, obj) in t.history.iter().enumerate() {
            w.write_record([
                t.dataset.clone(),
                t.seed.to_string(),
                t.fold.to_string(),
                it.to_string(),
                obj.to_string(),
            ])?;
        }
    }
    finish(w, dir, "convergence.csv")?;

    let mut sens: BTreeMap<(String, &str, u64, u64), Vec<EvaluationResult>> = BTreeMap::new();
    for s in &output.sensitivity {
        if let Ok(e) = &s.result {
            // Grid values are nonnegative, so bit order is numeric order here too.
            sens.entry((
                s.dataset.clone(),
                s.parameter,
                s.value.to_bits(),
                frac_key(s.fraction),
            ))
            .or_default()
            .push(*e);
        }
    }
    if !output.sensitivity.is_empty() {
        let mut w = writer(dir, "sensitivity.csv")?;
        w.write_record([
            "dataset",
            "parameter",
            "value",
            "fraction",
            "metric",
            "mean",
            "std",
            "count",
        ])?;
        for metric in Metric::ALL {
            for ((dataset, parameter, value, frac), results) in &sens {
                let s = stats_for(results, metric);
                w.write_record([
                    dataset.clone(),
                    parameter.to_string(),
                    f64::from_bits(*value).to_string(),
                    f64::from_bits(*frac).to_string(),
                    metric.to_string(),
                    s.mean.to_string(),
                    s.std.to_string(),
                    s.count.to_string(),
                ])?;
            }
        }
        finish(w, dir, "sensitivity.csv")?;
    }

    if svg {
        write_plots(output, dir, &per_fraction, &sens)?;
    }
    Ok(())
}

fn write_plots(
    output: &ExperimentOutput,
    dir: &Path,
    per_fraction: &Groups,
    sens: &BTreeMap<(String, &str, u64, u64), Vec<EvaluationResult>>,
) -> Result<()> {
    let datasets: Vec<&String> = {
        let mut v: Vec<&String> = per_fraction.keys().map(|k| &k.0).collect();
        v.dedup();
        v
    };
    for dataset in &datasets {
        for metric in Metric::ALL {
            let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
            for ((d, algorithm, frac), results) in per_fraction {
                if d == *dataset {
                    let s = stats_for(results, metric);
                    series
                        .entry(algorithm)
                        .or_default()
                        .push((f64::from_bits(*frac), s.mean));
                }
            }
            let series: Vec<Series> = series.into_iter().map(|(n, p)| Series::new(n, p)).collect();
            let svg = line_plot_svg(
                &format!("{dataset}: {metric}"),
                "fraction of features",
                metric.column(),
                &series,
            );
            write_text(&dir.join(format!("curve_{metric}_{dataset}.svg")), &svg)?;
        }

        let series: Vec<Series> = output
            .traces
            .iter()
            .filter(|t| &t.dataset == *dataset)
            .map(|t| {
                Series::new(
                    &format!("seed {} fold {}", t.seed, t.fold),
                    t.history
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| (i as f64, v))
                        .collect(),
                )
            })
            .collect();
        if !series.is_empty() {
            let svg = line_plot_svg(
                &format!("{dataset}: objective"),
                "iteration",
                "objective",
                &series,
            );
            write_text(&dir.join(format!("convergence_{dataset}.svg")), &svg)?;
        }

        for parameter in ["alpha", "beta"] {
            let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
            for ((d, p, value, frac), results) in sens {
                if d == *dataset && *p == parameter {
                    let s = stats_for(results, Metric::HammingLoss);
                    series
                        .entry(format!("fraction {}", f64::from_bits(*frac)))
                        .or_default()
                        .push((f64::from_bits(*value), s.mean));
                }
            }
            if !series.is_empty() {
                let series: Vec<Series> = series
                    .into_iter()
                    .map(|(n, p)| Series::new(&n, p))
                    .collect();
                let svg = line_plot_svg(
                    &format!("{dataset}: hl vs {parameter}"),
                    parameter,
                    "hl",
                    &series,
                );
                write_text(
                    &dir.join(format!("sensitivity_{parameter}_{dataset}.svg")),
                    &svg,
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::run::ConvergenceTrace;
    use crate::experiment::Algorithm;

    fn eval(hl: f64) -> EvaluationResult {
        EvaluationResult {
            hamming_loss: hl,
            ranking_loss: hl / 2.0,
            macro_auc: 1.0 - hl,
            macro_f1: 0.5,
            skipped_instances: 0,
            skipped_labels: 1,
        }
    }

    fn record(algorithm: Algorithm, fraction: f64, fold: usize, hl: f64) -> RunRecord {
        RunRecord {
            dataset: "toy".into(),
            algorithm,
            fraction,
            fold,
            seed: 3,
            n_selected: 2,
            result: Ok(eval(hl)),
            iterations: (algorithm == Algorithm::Mfsir).then_some(4),
            final_objective: (algorithm == Algorithm::Mfsir).then_some(1.25),
            fit_seconds: 0.5,
            eval_seconds: 0.25,
        }
    }

    #[test]
    fn stats() {
        let s = MetricStats::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(MetricStats::of(&[7.0]).unwrap().std, 0.0);
        assert!(MetricStats::of(&[]).is_none());
    }

    #[test]
    fn writes_and_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut records = Vec::new();
        for fold in 0..5 {
            records.push(record(Algorithm::Mfsir, 0.1, fold, 0.1 * fold as f64));
            records.push(record(Algorithm::Random, 0.1, fold, 0.3));
        }
        let mut failed = record(Algorithm::Mfsir, 0.2, 0, 0.0);
        failed.result = Err("non-finite objective at iteration 3, oops".into());
        records.push(failed);
        let out = ExperimentOutput {
            records: records.clone(),
            traces: vec![ConvergenceTrace {
                dataset: "toy".into(),
                seed: 3,
                fold: 0,
                history: vec![3.0, 2.0, 1.5],
                converged: true,
            }],
            sensitivity: Vec::new(),
        };
        emit_outputs(&out, dir.path(), true).unwrap();

        assert_eq!(
            read_records(&dir.path().join("results.csv")).unwrap(),
            records
        );

        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let lines: Vec<&str> = summary.lines().collect();
        assert_eq!(lines[0], "dataset,algorithm,metric,mean,std,count");
        // 2 algorithms x 4 metrics; the failed cell is excluded
        assert_eq!(lines.len(), 1 + 8);
        assert!(lines.contains(&"toy,random,hl,0.3,0,5"));
        let mfsir_hl = lines
            .iter()
            .find(|l| l.starts_with("toy,mfsir,hl,"))
            .unwrap();
        let fields: Vec<f64> = mfsir_hl
            .split(',')
            .skip(3)
            .map(|v| v.parse().unwrap())
            .collect();
        assert!((fields[0] - 0.2).abs() < 1e-12);
        assert!((fields[1] - 0.025f64.sqrt()).abs() < 1e-12);
        assert_eq!(fields[2], 5.0);

        let conv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
        assert_eq!(conv.lines().count(), 1 + 3);
        assert!(dir.path().join("curve_mauc.csv").exists());
        assert!(dir.path().join("curve_hl_toy.svg").exists());
        assert!(dir.path().join("convergence_toy.svg").exists());
        assert!(!dir.path().join("sensitivity.csv").exists());
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_records(&p), Err(Error::Data(_))));
        assert!(emit_outputs(&ExperimentOutput::default(), dir.path(), false).is_err());
    }
}
