//! Synthetic multi-label data with a known set of informative features.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::MultiLabelDataset;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct SparseRecoveryData {
    pub dataset: MultiLabelDataset,
    /// Indices of the features the labels depend on, ascending.
    pub informative: Vec<usize>,
}

/// `n × m` unit-variance uniform features; each of the `q` labels thresholds a random
/// signed combination of the same `k` informative features. The remaining columns are
/// independent noise.
pub fn sparse_recovery(
    n: usize,
    m: usize,
    k: usize,
    q: usize,
    seed: u64,
) -> Result<SparseRecoveryData> {
    assert!(k >= 1 && k <= m, "need 1 <= k <= m");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_width = 3f64.sqrt();
    let x = Array2::from_shape_simple_fn((n, m), || rng.random_range(-half_width..half_width));
    let mut informative = sample(&mut rng, m, k).into_vec();
    informative.sort_unstable();
    let weights = Array2::from_shape_simple_fn((k, q), || {
        let magnitude = rng.random_range(0.5..1.5);
        if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    });
    let y = Array2::from_shape_fn((n, q), |(i, j)| {
        let s: f64 = informative
            .iter()
            .enumerate()
            .map(|(a, &f)| weights[[a, j]] * x[[i, f]])
            .sum();
        u8::from(s > 0.0)
    });
    Ok(SparseRecoveryData {
        dataset: MultiLabelDataset::from_arrays(format!("synthetic-{seed}"), x, y)?,
        informative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_determinism() {
        let a = sparse_recovery(100, 50, 5, 4, 3).unwrap();
        assert_eq!(a.dataset.x().dim(), (100, 50));
        assert_eq!(a.dataset.y().dim(), (100, 4));
        assert_eq!(a.informative.len(), 5);
        let b = sparse_recovery(100, 50, 5, 4, 3).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.informative, b.informative);
        // every label has both classes
        for col in a.dataset.y().columns() {
            let pos = col.iter().filter(|&&v| v == 1).count();
            assert!(pos > 0 && pos < 100);
        }
    }
}
