//! Experiment configuration: a flat `key = value` text file with `#` comments.
//!
//! ```text
//! # emotions sweep
//! dataset   = data/emotions.arff, data/emotions.xml
//! fractions = 0.05, 0.10, 0.15, 0.20, 0.25, 0.30
//! cv_folds  = 5
//! seeds     = 0, 1
//! algorithms = mfsir, variance, random
//! output    = out/emotions
//! ```
//!
//! `dataset` may repeat. Relative paths in a file resolve against the file's directory;
//! relative paths given as overrides resolve against the working directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::MfsirConfig;
use crate::graph::KernelWidth;

use super::Algorithm;

pub const DEFAULT_FRACTIONS: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];

/// Every key accepted by [`ExperimentConfig::set`].
pub const KEYS: [&str; 23] = [
    "dataset",
    "alpha",
    "beta",
    "eta",
    "varpi",
    "latent_dim",
    "tmax",
    "tol",
    "init_mode",
    "graph_p",
    "graph_lambda",
    "fractions",
    "cv_folds",
    "knn_k",
    "knn_s",
    "seed",
    "seeds",
    "algorithms",
    "standardize",
    "output",
    "alpha_grid",
    "beta_grid",
    "svg",
];

/// An ARFF file and its MULAN label XML.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub arff: PathBuf,
    pub labels: PathBuf,
}

impl DatasetSpec {
    /// `"data.arff, labels.xml"`, or a bare `"data.arff"` with the XML next to it.
    fn parse(value: &str, base: &Path) -> Result<Self> {
        let parts: Vec<&str> = value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let (arff, labels) = match parts.as_slice() {
            [arff] => (base.join(arff), base.join(arff).with_extension("xml")),
            [arff, xml] => (base.join(arff), base.join(xml)),
            _ => {
                return Err(Error::invalid(format!(
                    "dataset expects `arff[, xml]`, got `{value}`"
                )))
            }
        };
        Ok(Self { arff, labels })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    /// Estimator settings; the seed is replaced per task.
    pub mfsir: MfsirConfig,
    /// Strictly increasing, each in `(0, 1]`.
    pub fractions: Vec<f64>,
    pub cv_folds: usize,
    pub knn_k: usize,
    pub knn_s: f64,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    /// Z-score features with training-split statistics before fitting.
    pub standardize: bool,
    pub output: PathBuf,
    /// Values of α to sweep (β held at its configured value); empty disables.
    pub alpha_grid: Vec<f64>,
    /// Values of β to sweep (α held at its configured value); empty disables.
    pub beta_grid: Vec<f64>,
    /// Also render SVG line plots next to the CSVs.
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            mfsir: MfsirConfig::default(),
            fractions: DEFAULT_FRACTIONS.to_vec(),
            cv_folds: 5,
            knn_k: 10,
            knn_s: 1.0,
            seeds: vec![0],
            algorithms: vec![Algorithm::Mfsir, Algorithm::Variance, Algorithm::Random],
            standardize: true,
            output: PathBuf::from("results"),
            alpha_grid: Vec::new(),
            beta_grid: Vec::new(),
            svg: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("{key}: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::invalid(format!(
            "{key}: expected a boolean, got `{value}`"
        ))),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).map_err(|e| match e {
            Error::InvalidArgument(msg) => {
                Error::InvalidArgument(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected `key = value`", i + 1)))?;
            cfg.set(key, value.trim(), base)
                .map_err(|e| Error::invalid(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    /// Applies one setting. Hyphens in `key` are treated as underscores.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let m = &mut self.mfsir;
        match key.as_str() {
            "dataset" => self.datasets.push(DatasetSpec::parse(value, base)?),
            "alpha" => m.alpha = parse_value(&key, value)?,
            "beta" => m.beta = parse_value(&key, value)?,
            "eta" => m.eta = parse_value(&key, value)?,
            "varpi" => m.varpi = parse_value(&key, value)?,
            "latent_dim" => {
                m.latent_dim = match value.trim() {
                    "auto" => None,
                    v => Some(parse_value(&key, v)?),
                }
            }
            "tmax" => m.t_max = parse_value(&key, value)?,
            "tol" => m.tol = parse_value(&key, value)?,
            "init_mode" => m.init_mode = parse_value(&key, value)?,
            "graph_p" => m.graph.p = parse_value(&key, value)?,
            "graph_lambda" => {
                m.graph.width = match value.trim() {
                    "adaptive" => KernelWidth::Adaptive,
                    v => KernelWidth::Fixed(parse_value(&key, v)?),
                }
            }
            "fractions" => self.fractions = parse_list(&key, value)?,
            "cv_folds" => self.cv_folds = parse_value(&key, value)?,
            "knn_k" => self.knn_k = parse_value(&key, value)?,
            "knn_s" => self.knn_s = parse_value(&key, value)?,
            "seed" => self.seeds = vec![parse_value(&key, value)?],
            "seeds" => self.seeds = parse_list(&key, value)?,
            "algorithms" => self.algorithms = parse_list(&key, value)?,
            "standardize" => self.standardize = parse_bool(&key, value)?,
            "output" => self.output = base.join(value.trim()),
            "alpha_grid" => self.alpha_grid = parse_list(&key, value)?,
            "beta_grid" => self.beta_grid = parse_list(&key, value)?,
            "svg" => self.svg = parse_bool(&key, value)?,
            _ => return Err(Error::invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::invalid("no dataset configured"));
        }
        if self.fractions.is_empty() {
            return Err(Error::invalid("fractions must not be empty"));
        }
        if self.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::invalid("fractions must lie in (0, 1]"));
        }
        if self.fractions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("fractions must be strictly increasing"));
        }
        if self.cv_folds < 2 {
            return Err(Error::invalid("cv_folds must be at least 2"));
        }
        if self.knn_k == 0 {
            return Err(Error::invalid("knn_k must be at least 1"));
        }
        if !(self.knn_s >= 0.0 && self.knn_s.is_finite()) {
            return Err(Error::invalid("knn_s must be nonnegative"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("seeds must not be empty"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("algorithms must not be empty"));
        }
        let mut algs = self.algorithms.clone();
        algs.sort();
        algs.dedup();
        if algs.len() != self.algorithms.len() {
            return Err(Error::invalid("algorithms must not repeat"));
        }
        if self.mfsir.graph.p == 0 {
            return Err(Error::invalid("graph_p must be at least 1"));
        }
        if let KernelWidth::Fixed(l) = self.mfsir.graph.width {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid(
                    "graph_lambda must be positive or `adaptive`",
                ));
            }
        }
        if self
            .alpha_grid
            .iter()
            .chain(&self.beta_grid)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::invalid(
                "alpha_grid and beta_grid values must be nonnegative",
            ));
        }
        Ok(())
    }
}

/// Number of features kept at `fraction` of `m`: `⌈fraction·m⌉`, at least 1.
pub fn selected_count(fraction: f64, m: usize) -> usize {
    // The small slack keeps e.g. 0.1·50 = 5.000000000000001 from rounding up to 6.
    ((fraction * m as f64 - 1e-9).ceil().max(1.0) as usize).min(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::InitMode;

    #[test]
    fn parses_a_full_file() {
        let text = "\
# comment
dataset = data/a.arff, data/a.xml
dataset = b.arff   # XML inferred
alpha = 0.5
beta=2
eta = 1e-3
latent_dim = 3
tmax = 50
tol = 1e-6
init_mode = signed
graph_p = 7
graph_lambda = 1.5
fractions = 0.1, 0.2
cv_folds = 3
knn_k = 5
knn_s = 0.5
seeds = 1, 2
algorithms = mfsir, random
standardize = no
output = out
alpha_grid = 0.1, 1, 10
svg = true
";
        let cfg = ExperimentConfig::parse(text, Path::new("/cfg")).unwrap();
        assert_eq!(
            cfg.datasets,
            vec![
                DatasetSpec {
                    arff: "/cfg/data/a.arff".into(),
                    labels: "/cfg/data/a.xml".into()
                },
                DatasetSpec {
                    arff: "/cfg/b.arff".into(),
                    labels: "/cfg/b.xml".into()
                },
            ]
        );
        assert_eq!(
            (cfg.mfsir.alpha, cfg.mfsir.beta, cfg.mfsir.eta),
            (0.5, 2.0, 1e-3)
        );
        assert_eq!(cfg.mfsir.latent_dim, Some(3));
        assert_eq!((cfg.mfsir.t_max, cfg.mfsir.tol), (50, 1e-6));
        assert_eq!(cfg.mfsir.init_mode, InitMode::Signed);
        assert_eq!(cfg.mfsir.graph.p, 7);
        assert_eq!(cfg.mfsir.graph.width, KernelWidth::Fixed(1.5));
        assert_eq!(cfg.fractions, vec![0.1, 0.2]);
        assert_eq!((cfg.cv_folds, cfg.knn_k, cfg.knn_s), (3, 5, 0.5));
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.algorithms, vec![Algorithm::Mfsir, Algorithm::Random]);
        assert!(!cfg.standardize && cfg.svg);
        assert_eq!(cfg.output, PathBuf::from("/cfg/out"));
        assert_eq!(cfg.alpha_grid, vec![0.1, 1.0, 10.0]);
        cfg.validate().unwrap();
    }

    #[test]
    fn defaults_and_errors() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.fractions, DEFAULT_FRACTIONS.to_vec());
        assert_eq!((cfg.cv_folds, cfg.knn_k, cfg.knn_s), (5, 10, 1.0));
        assert!(cfg.validate().is_err(), "no dataset");

        let base = Path::new(".");
        assert!(ExperimentConfig::parse("nonsense", base).is_err());
        assert!(ExperimentConfig::parse("colour = red", base).is_err());
        assert!(ExperimentConfig::parse("alpha = abc", base).is_err());

        let mut cfg = ExperimentConfig::parse("dataset = a.arff", base).unwrap();
        cfg.validate().unwrap();
        cfg.set("fractions", "0.2, 0.1", base).unwrap();
        assert!(cfg.validate().is_err());
        cfg.set("fractions", "0.0, 0.1", base).unwrap();
        assert!(cfg.validate().is_err());
        cfg.set("fractions", "0.1", base).unwrap();
        cfg.set("cv-folds", "1", base).unwrap();
        assert!(cfg.validate().is_err());
        cfg.set("cv_folds", "2", base).unwrap();
        cfg.set("algorithms", "random, random", base).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn selected_counts() {
        assert_eq!(selected_count(0.30, 72), 22);
        assert_eq!(selected_count(0.05, 72), 4);
        assert_eq!(selected_count(0.10, 50), 5);
        assert_eq!(selected_count(0.01, 10), 1);
        assert_eq!(selected_count(1.0, 10), 10);
    }
}
