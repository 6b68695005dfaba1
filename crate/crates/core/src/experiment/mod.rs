//! Cross-validated feature-fraction sweeps and their artifacts.
//!
//! [`run_experiment`] ranks features on each training fold (mFSIR plus simple
//! baselines), keeps the top fraction, and scores ML-kNN on the held-out fold.
//! [`emit_outputs`] writes the per-run records, summaries, convergence traces and
//! curves; [`compare_results`] turns a results file into a Friedman/Nemenyi report.

mod compare;
mod config;
mod outputs;
pub mod plot;
mod run;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::EvaluationResult;

pub use compare::{compare_results, CompareReport};
pub use config::{selected_count, DatasetSpec, ExperimentConfig, DEFAULT_FRACTIONS, KEYS};
pub use outputs::{emit_outputs, read_records, MetricStats, RESULTS_HEADER, TIMING_COLUMNS};
pub use run::{
    baseline_rank, evaluate_ranking, run_experiment, ConvergenceTrace, ExperimentOutput,
    FoldEvaluation, RunRecord, SensitivityRecord,
};

/// Feature rankers the harness can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Mfsir,
    /// Seeded random permutation.
    Random,
    /// Descending per-feature variance on the training split.
    Variance,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mfsir => "mfsir",
            Algorithm::Random => "random",
            Algorithm::Variance => "variance",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mfsir" => Ok(Algorithm::Mfsir),
            "random" => Ok(Algorithm::Random),
            "variance" => Ok(Algorithm::Variance),
            other => Err(Error::invalid(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four evaluation metrics, named as in the CSV columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    HammingLoss,
    RankingLoss,
    MacroAuc,
    MacroF1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::HammingLoss,
        Metric::RankingLoss,
        Metric::MacroAuc,
        Metric::MacroF1,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Metric::HammingLoss => "hl",
            Metric::RankingLoss => "rl",
            Metric::MacroAuc => "mauc",
            Metric::MacroF1 => "mf1",
        }
    }

    /// Natural direction: losses are minimized, AUC and F1 maximized.
    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::MacroAuc | Metric::MacroF1)
    }

    pub fn of(self, r: &EvaluationResult) -> f64 {
        match self {
            Metric::HammingLoss => r.hamming_loss,
            Metric::RankingLoss => r.ranking_loss,
            Metric::MacroAuc => r.macro_auc,
            Metric::MacroF1 => r.macro_f1,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.column() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown metric `{s}` (expected hl, rl, mauc or mf1)"
                ))
            })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// 64-bit FNV-1a, used to derive per-task seeds that do not depend on scheduling.
pub(crate) fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in [Algorithm::Mfsir, Algorithm::Random, Algorithm::Variance] {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        for m in Metric::ALL {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        assert!("lasso".parse::<Algorithm>().is_err());
        assert!("acc".parse::<Metric>().is_err());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }
}
