//! ML-kNN: a lazy multi-label classifier. For each label it combines the label prior
//! with smoothed likelihoods of seeing `c` positive neighbours among the `k` nearest
//! training instances, and predicts by maximum a posteriori.

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MlknnModel {
    pub k: usize,
    pub s: f64,
    /// `P(H_j = 1)` per label.
    pub priors: Array1<f64>,
    /// `P(E_c | H_j = 1)`, q × (k + 1).
    pub cond: Array2<f64>,
    /// `P(E_c | H_j = 0)`, q × (k + 1).
    pub cond_neg: Array2<f64>,
    train_x: Array2<f64>,
    train_y: Array2<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlknnOutput {
    /// Posterior `P(H_j = 1 | E_c)`, used as the ranking score.
    pub scores: Array2<f64>,
    pub predictions: Array2<u8>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest rows of `train` to `point`, ties to the lower index, skipping `exclude`.
fn neighbors(
    train: &Array2<f64>,
    point: ArrayView1<f64>,
    k: usize,
    exclude: Option<usize>,
) -> Vec<usize> {
    let mut cand: Vec<(usize, f64)> = (0..train.nrows())
        .filter(|&j| Some(j) != exclude)
        .map(|j| (j, sq_dist(point, train.row(j))))
        .collect();
    let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
    }
    cand.into_iter().map(|(j, _)| j).collect()
}

fn positive_counts(y: &Array2<u8>, nbrs: &[usize]) -> Vec<usize> {
    let mut counts = vec![0; y.ncols()];
    for &i in nbrs {
        for (c, &v) in counts.iter_mut().zip(y.row(i)) {
            *c += v as usize;
        }
    }
    counts
}

pub fn mlknn_fit(train: &MultiLabelDataset, k: usize, s: f64) -> Result<MlknnModel> {
    let n = train.num_instances();
    let q = train.num_labels();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "need 1 <= k < n_train, got k = {k}, n = {n}"
        )));
    }
    if !s.is_finite() || s < 0.0 {
        return Err(Error::invalid(format!(
            "smoothing must be nonnegative, got {s}"
        )));
    }
    let x = train.x();
    let y = train.y();

    let positives: Vec<usize> = (0..q)
        .map(|j| y.column(j).iter().map(|&v| v as usize).sum())
        .collect();
    let priors = Array1::from_iter(
        positives
            .iter()
            .map(|&c| (s + c as f64) / (2.0 * s + n as f64)),
    );

    // hist[j][c]: instances with (without) label j having c positive neighbours for it
    let counts: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| positive_counts(y, &neighbors(x, x.row(i), k, Some(i))))
        .collect();
    let mut hist = Array2::<f64>::zeros((q, k + 1));
    let mut hist_neg = Array2::<f64>::zeros((q, k + 1));
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if y[[i, j]] == 1 {
                hist[[j, c]] += 1.0;
            } else {
                hist_neg[[j, c]] += 1.0;
            }
        }
    }
    let smooth = |h: &Array2<f64>| {
        let mut out = h.clone();
        for mut row in out.rows_mut() {
            let total: f64 = row.sum();
            let denom = s * (k + 1) as f64 + total;
            row.mapv_inplace(|v| {
                if denom > 0.0 {
                    (s + v) / denom
                } else {
                    1.0 / (k + 1) as f64
                }
            });
        }
        out
    };

    Ok(MlknnModel {
        k,
        s,
        priors,
        cond: smooth(&hist),
        cond_neg: smooth(&hist_neg),
        train_x: x.clone(),
        train_y: y.clone(),
    })
}

impl MlknnModel {
    pub fn num_labels(&self) -> usize {
        self.priors.len()
    }

    /// Posterior that label `j` is present given `c` positive neighbours.
    pub fn posterior(&self, j: usize, c: usize) -> f64 {
        let p1 = self.priors[j] * self.cond[[j, c]];
        let p0 = (1.0 - self.priors[j]) * self.cond_neg[[j, c]];
        if p1 + p0 > 0.0 {
            p1 / (p1 + p0)
        } else {
            0.0
        }
    }
}

pub fn mlknn_predict(model: &MlknnModel, x_test: &Array2<f64>) -> Result<MlknnOutput> {
    if x_test.ncols() != model.train_x.ncols() {
        return Err(Error::shape(format!(
            "model trained on {} features, test has {}",
            model.train_x.ncols(),
            x_test.ncols()
        )));
    }
    let q = model.num_labels();
    let rows: Vec<Vec<f64>> = (0..x_test.nrows())
        .into_par_iter()
        .map(|i| {
            let nbrs = neighbors(&model.train_x, x_test.row(i), model.k, None);
            positive_counts(&model.train_y, &nbrs)
                .into_iter()
                .enumerate()
                .map(|(j, c)| model.posterior(j, c))
                .collect()
        })
        .collect();
    let scores = Array2::from_shape_fn((x_test.nrows(), q), |(i, j)| rows[i][j]);
    let predictions = scores.mapv(|p| u8::from(p > 0.5));
    Ok(MlknnOutput {
        scores,
        predictions,
    })
}
