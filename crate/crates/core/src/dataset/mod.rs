//! Multi-label datasets: loading from MULAN ARFF + XML, summary statistics,
//! k-fold assignment, column selection and standardization.

mod arff;

use std::collections::HashSet;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use arff::read_label_names;

/// Instance matrix `x` (n × m) with binary label matrix `y` (n × q).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    name: String,
    x: Array2<f64>,
    y: Array2<u8>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
}

impl MultiLabelDataset {
    pub fn new(
        name: impl Into<String>,
        x: Array2<f64>,
        y: Array2<u8>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let (n, m) = x.dim();
        let (ny, q) = y.dim();
        if n != ny {
            return Err(Error::shape(format!("x has {n} rows but y has {ny}")));
        }
        if n == 0 || m == 0 || q == 0 {
            return Err(Error::Data(format!("empty dataset ({n}x{m}, {q} labels)")));
        }
        if feature_names.len() != m || label_names.len() != q {
            return Err(Error::shape("name lists do not match matrix widths"));
        }
        if y.iter().any(|&v| v > 1) {
            return Err(Error::Data("label matrix must be binary".into()));
        }
        for (kind, names) in [("feature", &feature_names), ("label", &label_names)] {
            let mut seen = HashSet::new();
            if let Some(dup) = names.iter().find(|s| !seen.insert(s.as_str())) {
                return Err(Error::Data(format!("duplicate {kind} name {dup:?}")));
            }
        }
        Ok(Self {
            name: name.into(),
            x,
            y,
            feature_names,
            label_names,
        })
    }

    /// Builds a dataset with generated names `f0.., l0..`.
    pub fn from_arrays(name: impl Into<String>, x: Array2<f64>, y: Array2<u8>) -> Result<Self> {
        let features = (0..x.ncols()).map(|j| format!("f{j}")).collect();
        let labels = (0..y.ncols()).map(|j| format!("l{j}")).collect();
        Self::new(name, x, y, features, labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array2<u8> {
        &self.y
    }

    /// Labels as a real matrix, for use in the factorization objective.
    pub fn y_f64(&self) -> Array2<f64> {
        self.y.mapv(f64::from)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn num_instances(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn num_labels(&self) -> usize {
        self.y.ncols()
    }

    /// Rows `indices` (in the given order) as a new dataset.
    pub fn subset_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.num_instances()) {
            return Err(Error::invalid(format!("row index {bad} out of range")));
        }
        Self::new(
            self.name.clone(),
            self.x.select(Axis(0), indices),
            self.y.select(Axis(0), indices),
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }

    pub(crate) fn with_x(&self, x: Array2<f64>) -> Self {
        debug_assert_eq!(x.dim(), self.x.dim());
        Self { x, ..self.clone() }
    }
}

/// Loads a MULAN dataset. The dataset name is the ARFF file stem.
pub fn load_dataset(arff_path: &Path, labels_xml_path: &Path) -> Result<MultiLabelDataset> {
    let labels = read_label_names(labels_xml_path)?;
    let parsed = arff::read_arff(arff_path)?;
    let name = arff_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| parsed.relation.clone());
    arff::to_dataset(parsed, &labels, name, arff_path)
}

/// Writes `d` as a dense MULAN pair: an ARFF file with numeric features followed by
/// `{0,1}` label attributes, and the label XML. [`load_dataset`] reads it back exactly.
pub fn save_dataset(d: &MultiLabelDataset, arff_path: &Path, labels_xml_path: &Path) -> Result<()> {
    let quote = |s: &str| {
        if s.contains('\'') {
            format!("\"{s}\"")
        } else {
            format!("'{s}'")
        }
    };
    let mut arff = format!("@relation {}\n\n", quote(d.name()));
    for f in d.feature_names() {
        arff.push_str(&format!("@attribute {} numeric\n", quote(f)));
    }
    for l in d.label_names() {
        arff.push_str(&format!("@attribute {} {{0,1}}\n", quote(l)));
    }
    arff.push_str("\n@data\n");
    for (xr, yr) in d.x().rows().into_iter().zip(d.y().rows()) {
        let fields: Vec<String> = xr
            .iter()
            .map(f64::to_string)
            .chain(yr.iter().map(u8::to_string))
            .collect();
        arff.push_str(&fields.join(","));
        arff.push('\n');
    }
    std::fs::write(arff_path, arff).map_err(|e| Error::io(arff_path, e))?;

    let escape = |s: &str| {
        s.replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;")
            .replace('"', "&quot;")
    };
    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n");
    for l in d.label_names() {
        xml.push_str(&format!("<label name=\"{}\"></label>\n", escape(l)));
    }
    xml.push_str("</labels>\n");
    std::fs::write(labels_xml_path, xml).map_err(|e| Error::io(labels_xml_path, e))
}

/// Parses ARFF and label-XML text already in memory.
pub fn parse_dataset(name: &str, arff_text: &str, labels_xml: &str) -> Result<MultiLabelDataset> {
    let path = Path::new(name);
    let labels = arff::parse_label_xml(labels_xml, path)?;
    let parsed = arff::parse_arff(arff_text, path)?;
    arff::to_dataset(parsed, &labels, name.to_string(), path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub name: String,
    pub num_instances: usize,
    pub num_features: usize,
    pub num_labels: usize,
    pub label_cardinality: f64,
    pub label_density: f64,
}

impl DatasetSummary {
    pub const CSV_HEADER: &'static str = "name,n,m,q,lcard,lden";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{:.3}",
            self.name,
            self.num_instances,
            self.num_features,
            self.num_labels,
            self.label_cardinality,
            self.label_density
        )
    }
}

pub fn summarize(d: &MultiLabelDataset) -> DatasetSummary {
    let n = d.num_instances();
    let q = d.num_labels();
    let ones: usize = d.y.iter().map(|&v| v as usize).sum();
    let lcard = ones as f64 / n as f64;
    DatasetSummary {
        name: d.name.clone(),
        num_instances: n,
        num_features: d.num_features(),
        num_labels: q,
        label_cardinality: lcard,
        label_density: lcard / q as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of_instance: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    /// `(train, test)` row indices for fold `fold`, each in ascending order.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.fold_of_instance.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of_instance {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle followed by round-robin assignment, so fold sizes differ by at most one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of_instance = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold_of_instance[i] = pos % k;
    }
    Ok(FoldAssignment {
        fold_of_instance,
        k,
        seed,
    })
}

/// Restricts `x` to `indices`, in that order. Labels are untouched.
pub fn select_features(d: &MultiLabelDataset, indices: &[usize]) -> Result<MultiLabelDataset> {
    if indices.is_empty() {
        return Err(Error::invalid("empty feature selection"));
    }
    let m = d.num_features();
    let mut seen = HashSet::new();
    for &j in indices {
        if j >= m {
            return Err(Error::invalid(format!(
                "feature index {j} out of range (m = {m})"
            )));
        }
        if !seen.insert(j) {
            return Err(Error::invalid(format!("duplicate feature index {j}")));
        }
    }
    MultiLabelDataset::new(
        d.name.clone(),
        d.x.select(Axis(1), indices),
        d.y.clone(),
        indices
            .iter()
            .map(|&j| d.feature_names[j].clone())
            .collect(),
        d.label_names.clone(),
    )
}

/// Per-column affine transform fitted on one split and reusable on another.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    /// Population standard deviation; zero marks a constant column.
    pub std: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows() as f64;
        let mean = x.sum_axis(Axis(0)) / n;
        let mut var = Array1::<f64>::zeros(x.ncols());
        for row in x.rows() {
            for ((v, &a), &mu) in var.iter_mut().zip(row).zip(&mean) {
                *v += (a - mu) * (a - mu);
            }
        }
        let std = var.mapv(|v| (v / n).sqrt());
        Self { mean, std }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::shape(format!(
                "standardizer fitted on {} columns, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for ((v, &mu), &sd) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if sd > 0.0 { (*v - mu) / sd } else { 0.0 };
            }
        }
        Ok(out)
    }

    pub fn apply(&self, d: &MultiLabelDataset) -> Result<MultiLabelDataset> {
        Ok(d.with_x(self.transform(&d.x)?))
    }
}

pub fn standardize(d: &MultiLabelDataset) -> (MultiLabelDataset, Standardizer) {
    let s = Standardizer::fit(&d.x);
    let out = s.apply(d).expect("standardizer fitted on the same columns");
    (out, s)
}
