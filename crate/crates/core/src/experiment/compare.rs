//! Friedman / Nemenyi comparison of the algorithms in a results file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::ensure_dir;
use crate::stats::{
    average_ranks, friedman, nemenyi_cd, nemenyi_q05, pairwise_significance, FriedmanResult,
    MetricTable,
};

use super::outputs::read_records;
use super::Metric;

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub metric: Metric,
    pub higher_is_better: bool,
    /// Per-dataset means (over folds, fractions and seeds), datasets × algorithms.
    pub table: MetricTable,
    pub avg_ranks: Vec<f64>,
    /// `None` when every dataset ranks the algorithms identically (the F statistic is undefined).
    pub friedman: Option<FriedmanResult>,
    pub q_alpha: f64,
    pub cd: f64,
    /// Index pairs `(i, j)`, `i < j`, whose average ranks differ by at least `cd`.
    pub significant: Vec<(usize, usize)>,
    /// Datasets left out because some algorithm has no successful run on them.
    pub dropped_datasets: Vec<String>,
}

/// Builds the rank comparison of `metric` from a `results.csv`.
/// `q_alpha` defaults to the tabulated α = 0.05 value for the number of algorithms.
pub fn compare_results(
    results: &Path,
    metric: Metric,
    higher_is_better: bool,
    q_alpha: Option<f64>,
) -> Result<CompareReport> {
    let records = read_records(results)?;
    let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
    let mut algorithms = BTreeSet::new();
    let mut datasets = BTreeSet::new();
    for r in &records {
        algorithms.insert(r.algorithm.to_string());
        datasets.insert(r.dataset.clone());
        if let Ok(e) = &r.result {
            let s = sums
                .entry((r.dataset.clone(), r.algorithm.to_string()))
                .or_insert((0.0, 0));
            s.0 += metric.of(e);
            s.1 += 1;
        }
    }
    let algorithms: Vec<String> = algorithms.into_iter().collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for d in datasets {
        if algorithms
            .iter()
            .all(|a| sums.contains_key(&(d.clone(), a.clone())))
        {
            kept.push(d);
        } else {
            dropped.push(d);
        }
    }
    if kept.len() < 2 || algorithms.len() < 2 {
        return Err(Error::Data(format!(
            "insufficient coverage: need at least 2 algorithms on at least 2 datasets, have {} algorithm(s) on {} complete dataset(s)",
            algorithms.len(),
            kept.len()
        )));
    }
    let values = Array2::from_shape_fn((kept.len(), algorithms.len()), |(i, j)| {
        let (sum, n) = sums[&(kept[i].clone(), algorithms[j].clone())];
        sum / n as f64
    });
    let (theta, gamma) = values.dim();
    let table = MetricTable::new(values, higher_is_better, algorithms, kept)?;
    let avg_ranks = average_ranks(&table);
    let friedman = match friedman(&table) {
        Ok(f) => Some(f),
        Err(Error::PerfectSeparation) => None,
        Err(e) => return Err(e),
    };
    let cd = nemenyi_cd(gamma, theta, q_alpha)?;
    let q_alpha = q_alpha
        .or_else(|| nemenyi_q05(gamma))
        .expect("nemenyi_cd validated q_alpha");
    let sig = pairwise_significance(&avg_ranks, cd);
    let significant = (0..gamma)
        .flat_map(|i| (i + 1..gamma).map(move |j| (i, j)))
        .filter(|&(i, j)| sig[[i, j]])
        .collect();
    Ok(CompareReport {
        metric,
        higher_is_better,
        table,
        avg_ranks,
        friedman,
        q_alpha,
        cd,
        significant,
        dropped_datasets: dropped,
    })
}

impl CompareReport {
    /// Writes `cd_diagram.csv` (`algorithm,avg_rank`) and `cd.csv` (`gamma,theta,q_alpha,cd`).
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        ensure_dir(dir)?;
        let path = dir.join("cd_diagram.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["algorithm", "avg_rank"])?;
        for (a, r) in self.table.algorithm_names().iter().zip(&self.avg_ranks) {
            w.write_record([a.clone(), r.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let path = dir.join("cd.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["gamma", "theta", "q_alpha", "cd"])?;
        w.write_record([
            self.table.num_algorithms().to_string(),
            self.table.num_datasets().to_string(),
            self.q_alpha.to_string(),
            self.cd.to_string(),
        ])?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.table.algorithm_names();
        writeln!(
            f,
            "metric {} ({}), {} algorithms on {} datasets",
            self.metric,
            if self.higher_is_better {
                "higher is better"
            } else {
                "lower is better"
            },
            self.table.num_algorithms(),
            self.table.num_datasets()
        )?;
        if !self.dropped_datasets.is_empty() {
            writeln!(
                f,
                "dropped (incomplete): {}",
                self.dropped_datasets.join(", ")
            )?;
        }
        writeln!(f, "average ranks:")?;
        let mut order: Vec<usize> = (0..names.len()).collect();
        order.sort_by(|&a, &b| {
            self.avg_ranks[a]
                .total_cmp(&self.avg_ranks[b])
                .then(a.cmp(&b))
        });
        for j in order {
            writeln!(f, "  {:<12} {:.4}", names[j], self.avg_ranks[j])?;
        }
        match &self.friedman {
            Some(r) => writeln!(
                f,
                "Friedman chi2_F = {:.4}, F_F = {:.4} with ({}, {}) degrees of freedom",
                r.chi2_f, r.f_f, r.df1, r.df2
            )?,
            None => writeln!(
                f,
                "Friedman F_F undefined: every dataset ranks the algorithms identically"
            )?,
        }
        writeln!(
            f,
            "Nemenyi CD = {:.4} (q_alpha = {})",
            self.cd, self.q_alpha
        )?;
        if self.significant.is_empty() {
            writeln!(f, "no pair differs by at least CD")?;
        } else {
            for &(i, j) in &self.significant {
                writeln!(
                    f,
                    "  {} vs {}: rank difference {:.4}",
                    names[i],
                    names[j],
                    (self.avg_ranks[i] - self.avg_ranks[j]).abs()
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::outputs::emit_outputs;
    use crate::experiment::{Algorithm, ExperimentOutput, RunRecord};
    use crate::metrics::EvaluationResult;

    fn rec(dataset: &str, algorithm: Algorithm, fold: usize, hl: f64) -> RunRecord {
        RunRecord {
            dataset: dataset.into(),
            algorithm,
            fraction: 0.2,
            fold,
            seed: 0,
            n_selected: 3,
            result: Ok(EvaluationResult {
                hamming_loss: hl,
                ranking_loss: hl,
                macro_auc: 1.0 - hl,
                macro_f1: 1.0 - hl,
                skipped_instances: 0,
                skipped_labels: 0,
            }),
            iterations: None,
            final_objective: None,
            fit_seconds: 0.0,
            eval_seconds: 0.0,
        }
    }

    fn write(records: Vec<RunRecord>) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let out = ExperimentOutput {
            records,
            ..Default::default()
        };
        emit_outputs(&out, dir.path(), false).unwrap();
        dir
    }

    #[test]
    fn dominant_algorithm_ranks_first() {
        let mut records = Vec::new();
        for (d, base) in [("a", 0.1), ("b", 0.2), ("c", 0.15)] {
            for fold in 0..2 {
                records.push(rec(d, Algorithm::Mfsir, fold, base));
                records.push(rec(
                    d,
                    Algorithm::Variance,
                    fold,
                    base + 0.05 + 0.01 * fold as f64,
                ));
                records.push(rec(d, Algorithm::Random, fold, base + 0.1));
            }
        }
        records.push(rec("partial", Algorithm::Mfsir, 0, 0.3));
        let dir = write(records);
        let path = dir.path().join("results.csv");

        let r = compare_results(&path, Metric::HammingLoss, false, None).unwrap();
        assert_eq!(r.table.algorithm_names(), ["mfsir", "random", "variance"]);
        assert_eq!(r.avg_ranks, vec![1.0, 3.0, 2.0]);
        assert!(r.friedman.is_none(), "identical rankings on every dataset");
        assert_eq!(r.dropped_datasets, vec!["partial".to_string()]);
        assert_eq!(r.q_alpha, 2.343);

        // Flipping the direction reverses the ranks exactly.
        let flipped = compare_results(&path, Metric::HammingLoss, true, None).unwrap();
        for (a, b) in r.avg_ranks.iter().zip(&flipped.avg_ranks) {
            assert_eq!(a + b, 4.0);
        }

        r.write_csv(dir.path()).unwrap();
        let cd = std::fs::read_to_string(dir.path().join("cd_diagram.csv")).unwrap();
        assert_eq!(cd, "algorithm,avg_rank\nmfsir,1\nrandom,3\nvariance,2\n");
        assert!(r.to_string().contains("Nemenyi CD"));
    }

    #[test]
    fn insufficient_coverage() {
        let dir = write(vec![
            rec("a", Algorithm::Mfsir, 0, 0.1),
            rec("a", Algorithm::Random, 0, 0.2),
        ]);
        let err = compare_results(
            &dir.path().join("results.csv"),
            Metric::HammingLoss,
            false,
            None,
        );
        assert!(matches!(err, Err(Error::Data(_))));
    }
}
