//! Rank-based comparison of several algorithms over several datasets: average ranks,
//! the Friedman statistic with its F-distributed variant, and the Nemenyi critical
//! difference.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Critical values `q_0.05` of the Nemenyi test for 2..=10 algorithms
/// (studentized range statistic divided by √2).
pub const NEMENYI_Q05: [(usize, f64); 9] = [
    (2, 1.960),
    (3, 2.343),
    (4, 2.569),
    (5, 2.728),
    (6, 2.850),
    (7, 2.949),
    (8, 3.031),
    (9, 3.102),
    (10, 3.164),
];

pub fn nemenyi_q05(gamma: usize) -> Option<f64> {
    NEMENYI_Q05
        .iter()
        .find(|(g, _)| *g == gamma)
        .map(|(_, q)| *q)
}

/// Datasets (rows) × algorithms (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    values: Array2<f64>,
    higher_is_better: bool,
    algorithm_names: Vec<String>,
    dataset_names: Vec<String>,
}

impl MetricTable {
    pub fn new(
        values: Array2<f64>,
        higher_is_better: bool,
        algorithm_names: Vec<String>,
        dataset_names: Vec<String>,
    ) -> Result<Self> {
        let (theta, gamma) = values.dim();
        if theta < 2 || gamma < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 datasets and 2 algorithms, got {theta} x {gamma}"
            )));
        }
        if algorithm_names.len() != gamma || dataset_names.len() != theta {
            return Err(Error::shape("name lists do not match the table"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(
                "metric table contains non-finite values".into(),
            ));
        }
        Ok(Self {
            values,
            higher_is_better,
            algorithm_names,
            dataset_names,
        })
    }

    /// Table with generated names, handy for tests and examples.
    pub fn unnamed(values: Array2<f64>, higher_is_better: bool) -> Result<Self> {
        let (theta, gamma) = values.dim();
        Self::new(
            values,
            higher_is_better,
            (0..gamma).map(|j| format!("A{j}")).collect(),
            (0..theta).map(|i| format!("D{i}")).collect(),
        )
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn higher_is_better(&self) -> bool {
        self.higher_is_better
    }

    pub fn algorithm_names(&self) -> &[String] {
        &self.algorithm_names
    }

    pub fn dataset_names(&self) -> &[String] {
        &self.dataset_names
    }

    pub fn num_datasets(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_algorithms(&self) -> usize {
        self.values.ncols()
    }
}

/// Ranks within one row, best = 1, ties sharing the mean of their positions.
fn rank_row(row: &[f64], higher_is_better: bool) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = row[a].total_cmp(&row[b]);
        if higher_is_better {
            o.reverse()
        } else {
            o
        }
    });
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && row[idx[end]] == row[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    ranks
}

pub fn average_ranks(t: &MetricTable) -> Vec<f64> {
    let theta = t.num_datasets() as f64;
    let mut sums = vec![0.0; t.num_algorithms()];
    for row in t.values.rows() {
        let r = rank_row(&row.to_vec(), t.higher_is_better);
        for (s, v) in sums.iter_mut().zip(r) {
            *s += v;
        }
    }
    sums.into_iter().map(|s| s / theta).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub avg_ranks: Vec<f64>,
    pub chi2_f: f64,
    pub f_f: f64,
    pub df1: usize,
    pub df2: usize,
}

pub fn friedman(t: &MetricTable) -> Result<FriedmanResult> {
    let avg_ranks = average_ranks(t);
    let gamma = t.num_algorithms() as f64;
    let theta = t.num_datasets() as f64;
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi2_f =
        12.0 * theta / (gamma * (gamma + 1.0)) * (sum_sq - gamma * (gamma + 1.0).powi(2) / 4.0);
    let chi2_f = chi2_f.max(0.0);
    let denom = theta * (gamma - 1.0) - chi2_f;
    if denom.abs() <= 1e-12 * theta * gamma {
        return Err(Error::PerfectSeparation);
    }
    let f_f = (theta - 1.0) * chi2_f / denom;
    Ok(FriedmanResult {
        avg_ranks,
        chi2_f,
        f_f,
        df1: t.num_algorithms() - 1,
        df2: (t.num_algorithms() - 1) * (t.num_datasets() - 1),
    })
}

/// `CD = q_α · sqrt(γ(γ+1) / (6θ))`. With `q_alpha = None` the α = 0.05 table is used.
pub fn nemenyi_cd(gamma: usize, theta: usize, q_alpha: Option<f64>) -> Result<f64> {
    if gamma < 2 || theta < 1 {
        return Err(Error::invalid(format!(
            "need gamma >= 2 and theta >= 1, got {gamma}, {theta}"
        )));
    }
    let q = match q_alpha {
        Some(q) if q > 0.0 && q.is_finite() => q,
        Some(q) => return Err(Error::invalid(format!("q_alpha must be positive, got {q}"))),
        None => nemenyi_q05(gamma)
            .ok_or_else(|| Error::invalid(format!("no tabulated q_0.05 for {gamma} algorithms")))?,
    };
    let (g, th) = (gamma as f64, theta as f64);
    Ok(q * (g * (g + 1.0) / (6.0 * th)).sqrt())
}

/// `true` where two algorithms' average ranks differ by at least `cd`.
pub fn pairwise_significance(ranks: &[f64], cd: f64) -> Array2<bool> {
    let g = ranks.len();
    Array2::from_shape_fn((g, g), |(i, j)| i != j && (ranks[i] - ranks[j]).abs() >= cd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn ranks_examples() {
        let t = MetricTable::unnamed(array![[0.9, 0.5, 0.1], [0.8, 0.7, 0.2]], true).unwrap();
        assert_eq!(average_ranks(&t), vec![1.0, 2.0, 3.0]);
        let t = MetricTable::unnamed(Array2::from_elem((3, 4), 0.5), true).unwrap();
        assert_eq!(average_ranks(&t), vec![2.5; 4]);
        let t = MetricTable::unnamed(array![[1.0, 2.0, 3.0], [3.0, 2.0, 1.0]], false).unwrap();
        assert_eq!(average_ranks(&t), vec![2.0, 2.0, 2.0]);
        // direction flip
        let t = MetricTable::unnamed(array![[0.9, 0.5, 0.1], [0.8, 0.7, 0.2]], false).unwrap();
        assert_eq!(average_ranks(&t), vec![3.0, 2.0, 1.0]);
        assert_eq!(
            rank_row(&[1.0, 1.0, 0.0, 1.0], true),
            vec![2.0, 2.0, 4.0, 2.0]
        );
    }

    #[test]
    fn table_validation() {
        assert!(MetricTable::unnamed(array![[1.0, 2.0]], true).is_err());
        assert!(MetricTable::unnamed(array![[1.0], [2.0]], true).is_err());
        assert!(MetricTable::unnamed(array![[1.0, f64::NAN], [2.0, 1.0]], true).is_err());
    }

    #[test]
    fn friedman_examples() {
        let tied = MetricTable::unnamed(Array2::from_elem((4, 3), 1.0), true).unwrap();
        let r = friedman(&tied).unwrap();
        assert_eq!((r.chi2_f, r.f_f), (0.0, 0.0));
        assert_eq!((r.df1, r.df2), (2, 6));

        let sep =
            MetricTable::unnamed(Array2::from_shape_fn((4, 3), |(_, j)| j as f64), false).unwrap();
        assert!(matches!(friedman(&sep), Err(Error::PerfectSeparation)));
    }

    #[test]
    fn cd_examples() {
        let cd = nemenyi_cd(5, 10, Some(2.728)).unwrap();
        assert!((cd - 1.92).abs() <= 0.02, "{cd}");
        assert_eq!(nemenyi_cd(5, 10, None).unwrap(), cd);
        assert!(nemenyi_cd(5, 10, Some(0.0)).is_err());
        assert!(nemenyi_cd(11, 10, None).is_err());
        assert!(nemenyi_cd(1, 10, Some(2.0)).is_err());
        assert_relative_eq!(
            nemenyi_cd(4, 20, None).unwrap() * 0.5,
            nemenyi_cd(4, 80, None).unwrap()
        );
    }

    #[test]
    fn significance() {
        let s = pairwise_significance(&[1.0, 2.5], 1.5);
        assert!(s[[0, 1]] && s[[1, 0]] && !s[[0, 0]]);
        assert!(!pairwise_significance(&[2.0; 4], 0.1).iter().any(|&b| b));
        let s = pairwise_significance(&[1.0, 2.0, 4.0], 1.5);
        assert!(s[[0, 2]] && s[[1, 2]] && !s[[0, 1]]);
    }

    fn table_strategy() -> impl Strategy<Value = Array2<f64>> {
        (2usize..8, 2usize..7).prop_flat_map(|(theta, gamma)| {
            proptest::collection::vec(0i32..5, theta * gamma).prop_map(move |v| {
                Array2::from_shape_vec((theta, gamma), v.into_iter().map(f64::from).collect())
                    .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn rank_sum_is_preserved(values in table_strategy(), hib in any::<bool>()) {
            let gamma = values.ncols() as f64;
            let t = MetricTable::unnamed(values, hib).unwrap();
            let s: f64 = average_ranks(&t).iter().sum();
            prop_assert!((s - gamma * (gamma + 1.0) / 2.0).abs() < 1e-9);
        }

        #[test]
        fn monotone_transform_keeps_ranks(values in table_strategy()) {
            let a = MetricTable::unnamed(values.clone(), true).unwrap();
            let b = MetricTable::unnamed(values.mapv(|v| (v * 0.7).exp() + 3.0), true).unwrap();
            prop_assert_eq!(average_ranks(&a), average_ranks(&b));
        }

        #[test]
        fn column_permutation(values in table_strategy(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let gamma = values.ncols();
            let mut perm: Vec<usize> = (0..gamma).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted = values.select(ndarray::Axis(1), &perm);
            let a = friedman(&MetricTable::unnamed(values, false).unwrap());
            let b = friedman(&MetricTable::unnamed(permuted, false).unwrap());
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    for (k, &p) in perm.iter().enumerate() {
                        prop_assert!((b.avg_ranks[k] - a.avg_ranks[p]).abs() < 1e-12);
                    }
                    prop_assert!((a.chi2_f - b.chi2_f).abs() < 1e-9);
                    prop_assert!((a.f_f - b.f_f).abs() < 1e-9 * a.f_f.abs().max(1.0));
                }
                (Err(Error::PerfectSeparation), Err(Error::PerfectSeparation)) => {}
                other => prop_assert!(false, "inconsistent results {:?}", other),
            }
        }
    }
}
