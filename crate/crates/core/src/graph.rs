//! p-nearest-neighbour heat-kernel graph over instances and its Laplacian.
//!
//! `S[i][j] = exp(-|x_i - x_j|^2 / lambda^2)` when either point is among the
//! other's `p` nearest neighbours, else zero. `L = Z - S` with `Z` the degree
//! matrix. Both are held densely, but `L` also keeps the neighbour lists so
//! products `L V` cost `O(n p l)` instead of `O(n^2 l)`.

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Above this many instances the dense `n x n` matrices get uncomfortably large.
pub const DENSE_SIZE_WARNING: usize = 30_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelWidth {
    Fixed(f64),
    /// Mean of the nonzero neighbour distances over the kNN edge set.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    pub p: usize,
    pub width: KernelWidth,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            p: 5,
            width: KernelWidth::Adaptive,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    s: Array2<f64>,
    p: usize,
    lambda: f64,
}

impl SimilarityGraph {
    /// Wraps an arbitrary similarity matrix; it must be square, symmetric, with a zero
    /// diagonal and nonnegative entries.
    pub fn from_matrix(s: Array2<f64>) -> Result<Self> {
        let (n, c) = s.dim();
        if n != c {
            return Err(Error::shape(format!(
                "similarity must be square, got {n}x{c}"
            )));
        }
        for i in 0..n {
            if s[[i, i]] != 0.0 {
                return Err(Error::invalid("similarity diagonal must be zero"));
            }
            for j in 0..i {
                if s[[i, j]] != s[[j, i]] {
                    return Err(Error::invalid("similarity must be symmetric"));
                }
                if s[[i, j]] < 0.0 || !s[[i, j]].is_finite() {
                    return Err(Error::invalid(
                        "similarity entries must be finite and nonnegative",
                    ));
                }
            }
        }
        Ok(Self {
            s,
            p: 0,
            lambda: f64::NAN,
        })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.s
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.s.nrows() == 0
    }
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `p` nearest neighbours of every row (self excluded, ties to the
/// lower index), with their squared distances.
fn nearest_neighbors(x: &Array2<f64>, p: usize) -> Vec<Vec<(usize, f64)>> {
    let n = x.nrows();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let mut cand: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, sq_dist(xi, x.row(j))))
                .collect();
            let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
            if p < cand.len() {
                cand.select_nth_unstable_by(p - 1, cmp);
                cand.truncate(p);
            }
            cand.sort_by(cmp);
            cand
        })
        .collect()
}

/// Per-instance `(neighbour, squared distance)` lists.
type NeighborLists = Vec<Vec<(usize, f64)>>;

fn neighbor_graph(x: &Array2<f64>, p: usize) -> Result<(usize, NeighborLists)> {
    let n = x.nrows();
    if p == 0 || p >= n {
        return Err(Error::invalid(format!(
            "need 1 <= p < n, got p = {p}, n = {n}"
        )));
    }
    if n > DENSE_SIZE_WARNING {
        log::warn!("building a dense {n}x{n} similarity matrix");
    }
    Ok((n, nearest_neighbors(x, p)))
}

fn assemble(n: usize, knn: &[Vec<(usize, f64)>], p: usize, lambda: f64) -> SimilarityGraph {
    let mut s = Array2::<f64>::zeros((n, n));
    let denom = lambda * lambda;
    for (i, nbrs) in knn.iter().enumerate() {
        for &(j, d2) in nbrs {
            let w = (-d2 / denom).exp();
            s[[i, j]] = w;
            s[[j, i]] = w;
        }
    }
    SimilarityGraph { s, p, lambda }
}

/// Heat-kernel kNN similarity with a fixed width `lambda`.
pub fn build_similarity(x: &Array2<f64>, p: usize, lambda: f64) -> Result<SimilarityGraph> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let (n, knn) = neighbor_graph(x, p)?;
    Ok(assemble(n, &knn, p, lambda))
}

pub fn build_similarity_with(x: &Array2<f64>, cfg: &GraphConfig) -> Result<SimilarityGraph> {
    match cfg.width {
        KernelWidth::Fixed(lambda) => build_similarity(x, cfg.p, lambda),
        KernelWidth::Adaptive => {
            let (n, knn) = neighbor_graph(x, cfg.p)?;
            let lambda = adaptive_width(n, &knn);
            Ok(assemble(n, &knn, cfg.p, lambda))
        }
    }
}

fn adaptive_width(n: usize, knn: &[Vec<(usize, f64)>]) -> f64 {
    // Each undirected edge of the union graph counted once.
    let mut edges = std::collections::BTreeMap::new();
    for (i, nbrs) in knn.iter().enumerate() {
        for &(j, d2) in nbrs {
            edges.insert((i.min(j), i.max(j)), d2);
        }
    }
    let dists: Vec<f64> = edges
        .values()
        .filter(|&&d2| d2 > 0.0)
        .map(|d2| d2.sqrt())
        .collect();
    if dists.is_empty() {
        log::debug!("all {n} points coincide with their neighbours; using lambda = 1");
        1.0
    } else {
        dists.iter().sum::<f64>() / dists.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct GraphLaplacian {
    l: Array2<f64>,
    degree: Array1<f64>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

pub fn build_laplacian(g: &SimilarityGraph) -> GraphLaplacian {
    let s = &g.s;
    let n = s.nrows();
    let degree = s.sum_axis(ndarray::Axis(1));
    let mut l = s.mapv(|v| -v);
    for i in 0..n {
        l[[i, i]] += degree[i];
    }
    let adjacency = s
        .rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(j, &w)| (j, w))
                .collect()
        })
        .collect();
    GraphLaplacian {
        l,
        degree,
        adjacency,
    }
}

impl GraphLaplacian {
    /// Laplacian of the empty graph on `n` vertices.
    pub fn zeros(n: usize) -> Self {
        Self {
            l: Array2::zeros((n, n)),
            degree: Array1::zeros(n),
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.l
    }

    pub fn degree(&self) -> &Array1<f64> {
        &self.degree
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    /// `L v`, computed from the neighbour lists.
    pub fn apply(&self, v: &Array2<f64>) -> Result<Array2<f64>> {
        if v.nrows() != self.len() {
            return Err(Error::shape(format!(
                "laplacian is {0}x{0}, operand has {1} rows",
                self.len(),
                v.nrows()
            )));
        }
        let mut out = Array2::<f64>::zeros(v.raw_dim());
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            row.scaled_add(self.degree[i], &v.row(i));
            for &(j, w) in &self.adjacency[i] {
                row.scaled_add(-w, &v.row(j));
            }
        }
        Ok(out)
    }
}

/// `trace(V^T L V)`.
pub fn manifold_term(v: &Array2<f64>, l: &GraphLaplacian) -> Result<f64> {
    let lv = l.apply(v)?;
    Ok((v * &lv).sum())
}
