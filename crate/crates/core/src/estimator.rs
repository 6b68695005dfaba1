//! The feature-selection estimator.
//!
//! The coefficient matrix is reparameterized as `W = G ⊙ H` and fitted jointly with a
//! nonnegative label embedding `Y ≈ V B` regularized by a graph Laplacian:
//!
//! ```text
//! f(G, H, V, B) = |X (G ⊙ H) - V|²_F + α |Y - V B|²_F + β tr(Vᵀ L V)
//! ```
//!
//! Plain gradient descent on `G` and `H` (no explicit penalty) biases `W` toward
//! row-sparse solutions when started near zero; `V` and `B` are kept nonnegative by
//! projection. Features are ranked by the row norms of `G ⊙ H`.
//!
//! `G` and `H` are `m × l` so that `X (G ⊙ H)` matches the `n × l` shape of `V`.

use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    build_laplacian, build_similarity_with, manifold_term, GraphConfig, GraphLaplacian,
};

/// Floor for the denominator of the relative-change stopping rule.
pub const STOP_DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// `G ~ U(0, ϖ)`; `H, V, B ~ U(-ϖ, ϖ)` with `V, B` then projected onto the nonnegative orthant.
    SparseNonneg,
    /// All four factors `~ U(-ϖ, ϖ)`, unprojected.
    Signed,
}

impl FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse_nonneg" | "sparse-nonneg" => Ok(InitMode::SparseNonneg),
            "signed" => Ok(InitMode::Signed),
            other => Err(Error::invalid(format!("unknown init mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitMode::SparseNonneg => "sparse_nonneg",
            InitMode::Signed => "signed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfsirConfig {
    /// Weight of the label-reconstruction term.
    pub alpha: f64,
    /// Weight of the manifold term.
    pub beta: f64,
    /// Step size.
    pub eta: f64,
    /// Half-width of the initial uniform perturbation.
    pub varpi: f64,
    /// Latent dimension `l`; `None` picks `round(0.4 q)` clipped to `[1, q)`.
    pub latent_dim: Option<usize>,
    pub t_max: usize,
    pub tol: f64,
    pub seed: u64,
    pub init_mode: InitMode,
    pub graph: GraphConfig,
}

impl Default for MfsirConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            eta: 1e-4,
            varpi: 1e-5,
            latent_dim: None,
            t_max: 200,
            tol: 1e-5,
            seed: 0,
            init_mode: InitMode::SparseNonneg,
            graph: GraphConfig::default(),
        }
    }
}

impl MfsirConfig {
    /// Checks every bound and returns the latent dimension to use for `q` labels.
    pub fn validate(&self, q: usize) -> Result<usize> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("varpi", self.varpi)?;
        positive("tol", self.tol)?;
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!(
                "eta must be nonnegative, got {}",
                self.eta
            )));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if q == 0 {
            return Err(Error::invalid("at least one label is required"));
        }
        let l = self.latent_dim.unwrap_or_else(|| default_latent_dim(q));
        let ok = if q == 1 { l == 1 } else { l >= 1 && l < q };
        if !ok {
            return Err(Error::invalid(format!(
                "latent dim {l} invalid for {q} labels"
            )));
        }
        Ok(l)
    }
}

pub fn default_latent_dim(q: usize) -> usize {
    if q <= 1 {
        return 1;
    }
    ((0.4 * q as f64).round() as usize).clamp(1, q - 1)
}

/// Data side of the objective: instances, labels, Laplacian and term weights.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub x: &'a Array2<f64>,
    pub y: &'a Array2<f64>,
    pub laplacian: &'a GraphLaplacian,
    pub alpha: f64,
    pub beta: f64,
}

impl<'a> Problem<'a> {
    pub fn new(
        x: &'a Array2<f64>,
        y: &'a Array2<f64>,
        laplacian: &'a GraphLaplacian,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let n = x.nrows();
        if y.nrows() != n || laplacian.len() != n {
            return Err(Error::shape(format!(
                "x has {n} rows, y {}, laplacian {}",
                y.nrows(),
                laplacian.len()
            )));
        }
        Ok(Self {
            x,
            y,
            laplacian,
            alpha,
            beta,
        })
    }

    fn check(&self, f: &Factors) -> Result<()> {
        let (n, m) = self.x.dim();
        let q = self.y.ncols();
        let l = f.v.ncols();
        let expect = [
            ("G", f.g.dim(), (m, l)),
            ("H", f.h.dim(), (m, l)),
            ("V", f.v.dim(), (n, l)),
            ("B", f.b.dim(), (l, q)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(Error::shape(format!(
                    "{name} is {got:?}, expected {want:?}"
                )));
            }
        }
        Ok(())
    }
}

/// The four factor matrices: `G, H` (m × l), `V` (n × l), `B` (l × q).
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    pub g: Array2<f64>,
    pub h: Array2<f64>,
    pub v: Array2<f64>,
    pub b: Array2<f64>,
}

impl Factors {
    /// The coefficient matrix `G ⊙ H`.
    pub fn coefficients(&self) -> Array2<f64> {
        &self.g * &self.h
    }
}

/// Partial derivatives of the objective, same shapes as [`Factors`].
pub type Gradients = Factors;

#[derive(Debug, Clone)]
pub struct MfsirModel {
    pub factors: Factors,
    /// Objective values `ζ⁰ … ζᵗ`; always `iterations_run + 1` long.
    pub objective_history: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

impl MfsirModel {
    /// Wraps initial factors, recording `ζ⁰`.
    pub fn start(factors: Factors, problem: &Problem) -> Result<Self> {
        let zeta = objective(problem, &factors)?;
        if !zeta.is_finite() {
            return Err(Error::Diverged { iteration: 0 });
        }
        Ok(Self {
            factors,
            objective_history: vec![zeta],
            iterations_run: 0,
            converged: false,
        })
    }

    pub fn final_objective(&self) -> f64 {
        *self
            .objective_history
            .last()
            .expect("history is never empty")
    }

    /// Writes `G.csv`, `H.csv`, `V.csv`, `B.csv` and `history.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let f = &self.factors;
        for (name, m) in [
            ("G.csv", &f.g),
            ("H.csv", &f.h),
            ("V.csv", &f.v),
            ("B.csv", &f.b),
        ] {
            crate::io::write_matrix_csv(&dir.join(name), m)?;
        }
        let path = dir.join("history.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["iteration", "objective"])?;
        for (t, z) in self.objective_history.iter().enumerate() {
            w.write_record([t.to_string(), z.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    /// Feature indices by descending score.
    pub order: Vec<usize>,
    /// Score of each feature, indexed by feature.
    pub scores: Vec<f64>,
}

impl FeatureRanking {
    /// Orders features by descending score, ties by ascending index.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self { order, scores }
    }

    pub fn top(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }

    /// `rank,feature_index,feature_name,score`, rank starting at 1.
    pub fn write_csv(&self, path: &Path, feature_names: &[String]) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(file, feature_names).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    /// Same as [`FeatureRanking::write_csv`] into any writer.
    pub fn write_to<W: std::io::Write>(&self, out: W, feature_names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "feature_index", "feature_name", "score"])?;
        for (r, &j) in self.order.iter().enumerate() {
            let name = feature_names.get(j).map(String::as_str).unwrap_or("");
            w.write_record([
                (r + 1).to_string(),
                j.to_string(),
                name.to_string(),
                self.scores[j].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }

    /// Reads a ranking written by [`FeatureRanking::write_csv`]; rows may appear in any order.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Data(format!("{}: missing column {name}", path.display())))
        };
        let (rank_col, idx_col, score_col) = (col("rank")?, col("feature_index")?, col("score")?);
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |c: usize| rec.get(c).unwrap_or("").trim();
            let bad = |what: &str| Error::Parse {
                path: path.to_path_buf(),
                line: line + 2,
                message: format!("invalid {what}"),
            };
            let rank: usize = field(rank_col).parse().map_err(|_| bad("rank"))?;
            let idx: usize = field(idx_col).parse().map_err(|_| bad("feature_index"))?;
            let score: f64 = field(score_col).parse().map_err(|_| bad("score"))?;
            rows.push((rank, idx, score));
        }
        rows.sort_by_key(|r| r.0);
        let m = rows.len();
        let mut scores = vec![f64::NAN; m];
        for &(_, idx, score) in &rows {
            if idx >= m || !scores[idx].is_nan() {
                return Err(Error::Data(format!(
                    "{}: feature indices must be a permutation of 0..{m}",
                    path.display()
                )));
            }
            scores[idx] = score;
        }
        Ok(Self {
            order: rows.into_iter().map(|r| r.1).collect(),
            scores,
        })
    }
}

pub fn frobenius_norm_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

pub fn objective(p: &Problem, f: &Factors) -> Result<f64> {
    p.check(f)?;
    let fit = p.x.dot(&f.coefficients()) - &f.v;
    let recon = p.y - &f.v.dot(&f.b);
    let manifold = if p.beta == 0.0 {
        0.0
    } else {
        manifold_term(&f.v, p.laplacian)?
    };
    Ok(frobenius_norm_sq(&fit) + p.alpha * frobenius_norm_sq(&recon) + p.beta * manifold)
}

/// All four partial derivatives evaluated at the same point.
pub fn gradients(p: &Problem, f: &Factors) -> Result<Gradients> {
    p.check(f)?;
    let xw = p.x.dot(&f.coefficients());
    let common = p.x.t().dot(&(&xw - &f.v)) * 2.0;
    let vb_minus_y = f.v.dot(&f.b) - p.y;
    let mut gv = (&f.v - &xw) + &(vb_minus_y.dot(&f.b.t()) * p.alpha);
    if p.beta != 0.0 {
        gv += &(p.laplacian.apply(&f.v)? * p.beta);
    }
    Ok(Gradients {
        g: &f.h * &common,
        h: &f.g * &common,
        v: gv * 2.0,
        b: f.v.t().dot(&vb_minus_y) * (2.0 * p.alpha),
    })
}

/// Entrywise `max(d, 0)`.
pub fn project_nonneg(d: &Array2<f64>) -> Array2<f64> {
    d.mapv(|v| if v >= 0.0 { v } else { 0.0 })
}

fn project_in_place(d: &mut Array2<f64>) {
    d.mapv_inplace(|v| if v >= 0.0 { v } else { 0.0 });
}

/// Draws initial factors. Deterministic for a given seed.
pub fn init_factors(cfg: &MfsirConfig, m: usize, q: usize, n: usize, l: usize) -> Factors {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w = cfg.varpi;
    let signed = |rows: usize, cols: usize, rng: &mut ChaCha8Rng| {
        Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-w..w))
    };
    let g = match cfg.init_mode {
        InitMode::SparseNonneg => Array2::from_shape_simple_fn((m, l), || rng.random_range(0.0..w)),
        InitMode::Signed => signed(m, l, &mut rng),
    };
    let h = signed(m, l, &mut rng);
    let mut v = signed(n, l, &mut rng);
    let mut b = signed(l, q, &mut rng);
    if cfg.init_mode == InitMode::SparseNonneg {
        project_in_place(&mut v);
        project_in_place(&mut b);
    }
    Factors { g, h, v, b }
}

/// One sweep of alternating updates in the order G, H, V, B. Each update sees the
/// values already refreshed earlier in the sweep. Appends the new objective value.
pub fn step(model: &mut MfsirModel, p: &Problem, eta: f64) -> Result<()> {
    p.check(&model.factors)?;
    let iteration = model.objective_history.len();
    let x = p.x;
    let f = &mut model.factors;

    let common = x.t().dot(&(x.dot(&(&f.g * &f.h)) - &f.v));
    Zip::from(&mut f.g)
        .and(&f.h)
        .and(&common)
        .for_each(|g, &h, &c| *g -= eta * 2.0 * h * c);

    let common = x.t().dot(&(x.dot(&(&f.g * &f.h)) - &f.v));
    Zip::from(&mut f.h)
        .and(&f.g)
        .and(&common)
        .for_each(|h, &g, &c| *h -= eta * 2.0 * g * c);

    let xw = x.dot(&(&f.g * &f.h));
    let mut grad_v = (&f.v - &xw) + &((f.v.dot(&f.b) - p.y).dot(&f.b.t()) * p.alpha);
    if p.beta != 0.0 {
        grad_v += &(p.laplacian.apply(&f.v)? * p.beta);
    }
    f.v.scaled_add(-2.0 * eta, &grad_v);
    project_in_place(&mut f.v);

    let grad_b = f.v.t().dot(&(f.v.dot(&f.b) - p.y));
    f.b.scaled_add(-2.0 * eta * p.alpha, &grad_b);
    project_in_place(&mut f.b);

    let fit = xw - &f.v;
    let recon = p.y - &f.v.dot(&f.b);
    let manifold = if p.beta == 0.0 {
        0.0
    } else {
        manifold_term(&f.v, p.laplacian)?
    };
    let zeta = frobenius_norm_sq(&fit) + p.alpha * frobenius_norm_sq(&recon) + p.beta * manifold;
    if !zeta.is_finite() {
        return Err(Error::Diverged { iteration });
    }
    model.objective_history.push(zeta);
    model.iterations_run += 1;
    Ok(())
}

/// Whether the last step changed the objective by at most `tol` relative to the previous value.
pub fn relative_change_converged(history: &[f64], tol: f64) -> bool {
    match history {
        [.., prev, cur] => (cur - prev).abs() / prev.max(STOP_DENOMINATOR_FLOOR) <= tol,
        _ => false,
    }
}

/// Runs the alternating updates from `model` until `t_max` sweeps or the relative-change rule fires.
pub fn run(model: &mut MfsirModel, p: &Problem, cfg: &MfsirConfig) -> Result<()> {
    while model.iterations_run < cfg.t_max {
        step(model, p, cfg.eta)?;
        if relative_change_converged(&model.objective_history, cfg.tol) {
            model.converged = true;
            break;
        }
    }
    Ok(())
}

/// Fits with a caller-supplied Laplacian.
pub fn fit_with_laplacian(
    x: &Array2<f64>,
    y: &Array2<f64>,
    laplacian: &GraphLaplacian,
    cfg: &MfsirConfig,
) -> Result<(MfsirModel, FeatureRanking)> {
    let (n, m) = x.dim();
    let q = y.ncols();
    let l = cfg.validate(q)?;
    let p = Problem::new(x, y, laplacian, cfg.alpha, cfg.beta)?;
    let mut model = MfsirModel::start(init_factors(cfg, m, q, n, l), &p)?;
    run(&mut model, &p, cfg)?;
    let ranking = rank_features(&model.factors.g, &model.factors.h)?;
    Ok((model, ranking))
}

/// Laplacian of the heat-kernel kNN graph on `x`, or the zero operator when `β = 0`.
/// The neighbourhood size is clipped to `n - 1` for tiny inputs.
pub fn training_laplacian(x: &Array2<f64>, cfg: &MfsirConfig) -> Result<GraphLaplacian> {
    let n = x.nrows();
    if n == 0 || x.ncols() == 0 {
        return Err(Error::invalid("empty instance matrix"));
    }
    if cfg.beta == 0.0 || n < 2 {
        return Ok(GraphLaplacian::zeros(n));
    }
    let graph_cfg = GraphConfig {
        p: cfg.graph.p.min(n - 1),
        ..cfg.graph
    };
    Ok(build_laplacian(&build_similarity_with(x, &graph_cfg)?))
}

/// Builds the similarity graph from `x`, then fits.
pub fn fit(
    x: &Array2<f64>,
    y: &Array2<f64>,
    cfg: &MfsirConfig,
) -> Result<(MfsirModel, FeatureRanking)> {
    cfg.validate(y.ncols())?;
    let laplacian = training_laplacian(x, cfg)?;
    fit_with_laplacian(x, y, &laplacian, cfg)
}

/// Ranks features by the ℓ2 norm of their row in `G ⊙ H`.
pub fn rank_features(g: &Array2<f64>, h: &Array2<f64>) -> Result<FeatureRanking> {
    if g.dim() != h.dim() {
        return Err(Error::shape(format!(
            "G is {:?}, H is {:?}",
            g.dim(),
            h.dim()
        )));
    }
    let w = g * h;
    Ok(FeatureRanking::from_scores(row_norms(&w)))
}

fn row_norms(w: &Array2<f64>) -> Vec<f64> {
    w.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect()
}

/// Fraction of rows of `w` whose ℓ2 norm is at most `threshold`.
pub fn sparsity_fraction(w: &Array2<f64>, threshold: f64) -> f64 {
    if w.nrows() == 0 {
        return 0.0;
    }
    let zero_rows = row_norms(w).into_iter().filter(|&r| r <= threshold).count();
    zero_rows as f64 / w.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn scalar_case() -> (Array2<f64>, Array2<f64>, GraphLaplacian, Factors) {
        let f = Factors {
            g: array![[1.0]],
            h: array![[1.0]],
            v: array![[3.0]],
            b: array![[1.0]],
        };
        (array![[2.0]], array![[1.0]], GraphLaplacian::zeros(1), f)
    }

    #[test]
    fn frobenius() {
        assert_eq!(frobenius_norm_sq(&Array2::zeros((2, 3))), 0.0);
        assert_eq!(frobenius_norm_sq(&Array2::eye(3)), 3.0);
        assert_eq!(frobenius_norm_sq(&array![[1.0, 2.0], [3.0, 4.0]]), 30.0);
    }

    #[test]
    fn scalar_objective_and_gradients() {
        let (x, y, l, f) = scalar_case();
        let p = Problem::new(&x, &y, &l, 0.5, 1.0).unwrap();
        assert_eq!(objective(&p, &f).unwrap(), 3.0);
        let g = gradients(&p, &f).unwrap();
        assert_eq!(
            (g.g[[0, 0]], g.h[[0, 0]], g.v[[0, 0]], g.b[[0, 0]]),
            (-4.0, -4.0, 4.0, 6.0)
        );
    }

    #[test]
    fn only_label_term_survives_at_zero() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [0.5, 0.0]];
        let y = array![[1.0, 0.0], [1.0, 1.0], [0.0, 0.0]];
        let l = GraphLaplacian::zeros(3);
        let f = Factors {
            g: Array2::zeros((2, 1)),
            h: Array2::zeros((2, 1)),
            v: Array2::zeros((3, 1)),
            b: Array2::zeros((1, 2)),
        };
        let p = Problem::new(&x, &y, &l, 2.5, 0.0).unwrap();
        assert_eq!(objective(&p, &f).unwrap(), 2.5 * 3.0);
    }

    fn exact_fit() -> (Array2<f64>, Array2<f64>, Factors) {
        // X W = V and V B = Y
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let g = array![[1.0], [2.0]];
        let h = array![[0.5], [1.0]];
        let v = x.dot(&(&g * &h));
        let b = array![[1.0, 2.0]];
        let y = v.dot(&b);
        (x, y, Factors { g, h, v, b })
    }

    #[test]
    fn exact_fit_is_stationary() {
        let (x, y, f) = exact_fit();
        let l = GraphLaplacian::zeros(3);
        let p = Problem::new(&x, &y, &l, 1.0, 0.0).unwrap();
        assert_eq!(objective(&p, &f).unwrap(), 0.0);
        let g = gradients(&p, &f).unwrap();
        for m in [&g.g, &g.h, &g.v, &g.b] {
            assert!(m.iter().all(|&v| v == 0.0));
        }
        let mut model = MfsirModel::start(f.clone(), &p).unwrap();
        step(&mut model, &p, 0.3).unwrap();
        assert_eq!(model.factors, f);
        assert_eq!(model.objective_history, vec![0.0, 0.0]);
    }

    #[test]
    fn projection() {
        assert_eq!(
            project_nonneg(&array![[-1.0, 2.0], [0.0, -3.0]]),
            array![[0.0, 2.0], [0.0, 0.0]]
        );
        let a = array![[1.0, 0.0], [2.0, 3.0]];
        assert_eq!(project_nonneg(&a), a);
        let d = array![[-0.5, 0.25], [4.0, -1e-300]];
        assert_eq!(project_nonneg(&project_nonneg(&d)), project_nonneg(&d));
    }

    #[test]
    fn initialization() {
        let cfg = MfsirConfig {
            seed: 9,
            ..Default::default()
        };
        let f = init_factors(&cfg, 7, 5, 11, 2);
        assert_eq!(
            (f.g.dim(), f.h.dim(), f.v.dim(), f.b.dim()),
            ((7, 2), (7, 2), (11, 2), (2, 5))
        );
        for m in [&f.g, &f.h, &f.v, &f.b] {
            assert!(m.iter().all(|v| v.abs() < 1e-5));
        }
        assert!(f.g.iter().all(|&v| v >= 0.0));
        assert!(f.v.iter().chain(&f.b).all(|&v| v >= 0.0));
        assert_eq!(init_factors(&cfg, 7, 5, 11, 2), f);

        let signed = init_factors(
            &MfsirConfig {
                init_mode: InitMode::Signed,
                ..cfg
            },
            7,
            5,
            11,
            2,
        );
        assert!(signed.g.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn zero_step_size_only_extends_history() {
        let (x, y, l, f) = scalar_case();
        let p = Problem::new(&x, &y, &l, 0.5, 1.0).unwrap();
        let mut model = MfsirModel::start(f.clone(), &p).unwrap();
        step(&mut model, &p, 0.0).unwrap();
        assert_eq!(model.factors, f);
        assert_eq!(model.objective_history, vec![3.0, 3.0]);
        assert_eq!(model.iterations_run, 1);
    }

    #[test]
    fn sequential_updates() {
        let (x, y, l, f) = scalar_case();
        let p = Problem::new(&x, &y, &l, 0.5, 1.0).unwrap();
        let mut model = MfsirModel::start(f, &p).unwrap();
        step(&mut model, &p, 0.01).unwrap();
        // G: 1 - 0.01 * (-4)
        assert_relative_eq!(model.factors.g[[0, 0]], 1.04, max_relative = 1e-14);
        // H sees the new G: residual 2*1.04 - 3 = -0.92, grad = 1.04 * 2 * 2 * -0.92
        let grad_h = 1.04 * 2.0 * 2.0 * (2.0 * 1.04 - 3.0);
        assert_relative_eq!(
            model.factors.h[[0, 0]],
            1.0 - 0.01 * grad_h,
            max_relative = 1e-14
        );
        let (g, h) = (model.factors.g[[0, 0]], model.factors.h[[0, 0]]);
        let grad_v = 2.0 * ((3.0 - 2.0 * g * h) + 0.5 * (3.0 - 1.0));
        let v = 3.0 - 0.01 * grad_v;
        assert_relative_eq!(model.factors.v[[0, 0]], v, max_relative = 1e-14);
        let b = 1.0 - 0.01 * 2.0 * 0.5 * v * (v - 1.0);
        assert_relative_eq!(model.factors.b[[0, 0]], b, max_relative = 1e-14);
    }

    #[test]
    fn divergence_is_reported() {
        let (x, y, l, f) = scalar_case();
        let p = Problem::new(&x, &y, &l, 0.5, 1.0).unwrap();
        let mut model = MfsirModel::start(f, &p).unwrap();
        let cfg = MfsirConfig {
            eta: 1e3,
            t_max: 100,
            tol: 1e-300,
            ..Default::default()
        };
        match run(&mut model, &p, &cfg) {
            Err(Error::Diverged { iteration }) => assert!(iteration >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_iterations_returns_initial_state() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let cfg = MfsirConfig {
            t_max: 0,
            graph: GraphConfig {
                p: 1,
                ..Default::default()
            },
            ..Default::default()
        };
        let (model, ranking) = fit(&x, &y, &cfg).unwrap();
        assert_eq!(model.iterations_run, 0);
        assert!(!model.converged);
        assert_eq!(model.objective_history.len(), 1);
        let f = init_factors(&cfg, 2, 2, 3, 1);
        assert_eq!(model.factors, f);
        assert_eq!(ranking, rank_features(&f.g, &f.h).unwrap());
    }

    #[test]
    fn ranking_rules() {
        let g = array![[3.0, 0.0], [0.0, 1.0], [2.0, 0.0]];
        let h = Array2::ones((3, 2));
        let r = rank_features(&g, &h).unwrap();
        assert_eq!(r.order, vec![0, 2, 1]);
        assert_eq!(r.scores, vec![3.0, 1.0, 2.0]);

        let r = rank_features(&Array2::zeros((4, 2)), &Array2::ones((4, 2))).unwrap();
        assert_eq!(r.order, vec![0, 1, 2, 3]);
        assert!(r.scores.iter().all(|&s| s == 0.0));

        let scaled = rank_features(&(&g * 2.5), &h).unwrap();
        assert_eq!(scaled.order, vec![0, 2, 1]);
        assert_eq!(scaled.scores, vec![7.5, 2.5, 5.0]);

        assert!(rank_features(&g, &Array2::ones((2, 2))).is_err());
    }

    #[test]
    fn sparsity() {
        assert_eq!(sparsity_fraction(&Array2::zeros((3, 2)), 0.0), 1.0);
        assert_eq!(sparsity_fraction(&Array2::eye(3), 0.5), 0.0);
        let w = array![[1.0, 1.0], [0.0, 0.0], [2.0, 0.0], [0.0, 3.0]];
        assert_eq!(sparsity_fraction(&w, 1e-8), 0.25);
    }

    #[test]
    fn config_validation() {
        let cfg = MfsirConfig::default();
        assert_eq!(cfg.validate(6).unwrap(), 2);
        assert_eq!(cfg.validate(1).unwrap(), 1);
        assert_eq!(cfg.validate(2).unwrap(), 1);
        assert_eq!(default_latent_dim(14), 6);
        assert!(MfsirConfig {
            latent_dim: Some(6),
            ..cfg.clone()
        }
        .validate(6)
        .is_err());
        assert!(MfsirConfig {
            latent_dim: Some(0),
            ..cfg.clone()
        }
        .validate(6)
        .is_err());
        assert!(MfsirConfig {
            alpha: 0.0,
            ..cfg.clone()
        }
        .validate(6)
        .is_err());
        assert!(MfsirConfig {
            beta: -1.0,
            ..cfg.clone()
        }
        .validate(6)
        .is_err());
        assert!(MfsirConfig {
            varpi: 0.0,
            ..cfg.clone()
        }
        .validate(6)
        .is_err());
        assert!(MfsirConfig { tol: 0.0, ..cfg }.validate(6).is_err());
        assert_eq!("signed".parse::<InitMode>().unwrap(), InitMode::Signed);
        assert!("other".parse::<InitMode>().is_err());
    }

    #[test]
    fn stop_rule_uses_absolute_change() {
        assert!(!relative_change_converged(&[1.0], 1e-5));
        assert!(relative_change_converged(&[1.0, 1.0 - 1e-6], 1e-5));
        assert!(!relative_change_converged(&[1.0, 0.9], 1e-5));
        assert!(!relative_change_converged(&[1.0, 1.1], 1e-5));
        assert!(relative_change_converged(&[0.0, 0.0], 1e-5));
    }

    fn descent_problem() -> (Array2<f64>, Array2<f64>, GraphLaplacian) {
        let data = crate::synthetic::sparse_recovery(80, 20, 4, 4, 9).unwrap();
        let (d, _) = crate::dataset::standardize(&data.dataset);
        let cfg = MfsirConfig::default();
        let l = training_laplacian(d.x(), &cfg).unwrap();
        (d.x().clone(), d.y_f64(), l)
    }

    #[test]
    fn steps_stay_feasible_and_descend() {
        let (x, y, l) = descent_problem();
        let p = Problem::new(&x, &y, &l, 1.0, 1.0).unwrap();
        let cfg = MfsirConfig::default();
        let mut model = MfsirModel::start(init_factors(&cfg, 20, 4, 80, 2), &p).unwrap();
        for _ in 0..200 {
            step(&mut model, &p, 1e-4).unwrap();
            assert!(model.factors.v.iter().all(|&v| v >= 0.0));
            assert!(model.factors.b.iter().all(|&v| v >= 0.0));
        }
        for w in model.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
        assert!(model.final_objective() < model.objective_history[0]);
    }

    /// Flipping the signs of matching entries of G and H leaves G ⊙ H, and therefore the
    /// whole trajectory of W, V and B, bit-for-bit unchanged.
    #[test]
    fn sign_flips_shared_by_g_and_h_are_invisible() {
        let (x, y, l) = descent_problem();
        let p = Problem::new(&x, &y, &l, 1.0, 1.0).unwrap();
        let cfg = MfsirConfig {
            init_mode: InitMode::Signed,
            seed: 4,
            ..MfsirConfig::default()
        };
        let f = init_factors(&cfg, 20, 4, 80, 2);
        let mut flipped = f.clone();
        // Make G nonnegative, compensating in H.
        Zip::from(&mut flipped.g)
            .and(&mut flipped.h)
            .for_each(|g, h| {
                if *g < 0.0 {
                    *g = -*g;
                    *h = -*h;
                }
            });
        assert_eq!(flipped.coefficients(), f.coefficients());
        let mut a = MfsirModel::start(f, &p).unwrap();
        let mut b = MfsirModel::start(flipped, &p).unwrap();
        for _ in 0..300 {
            step(&mut a, &p, 1e-3).unwrap();
            step(&mut b, &p, 1e-3).unwrap();
        }
        assert_eq!(a.factors.coefficients(), b.factors.coefficients());
        assert_eq!((&a.factors.v, &a.factors.b), (&b.factors.v, &b.factors.b));
        assert_eq!(a.objective_history, b.objective_history);
        assert!(a.factors.g.iter().any(|&v| v < 0.0) && b.factors.g.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn feature_copying_the_label_ranks_first() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 60;
        let y = Array2::from_shape_fn((n, 1), |(i, _)| f64::from(u8::from(i % 3 == 0)));
        let x = Array2::from_shape_fn((n, 6), |(i, j)| {
            if j == 0 {
                y[[i, 0]]
            } else {
                rng.random_range(-1.0..1.0)
            }
        });
        let cfg = MfsirConfig {
            eta: 1e-3,
            t_max: 3000,
            tol: 1e-12,
            ..MfsirConfig::default()
        };
        let (_, ranking) = fit(&x, &y, &cfg).unwrap();
        assert_eq!(ranking.order[0], 0, "scores {:?}", ranking.scores);
        let runner_up = ranking.scores[ranking.order[1]];
        assert!(
            ranking.scores[0] > 10.0 * runner_up,
            "scores {:?}",
            ranking.scores
        );
    }
}
