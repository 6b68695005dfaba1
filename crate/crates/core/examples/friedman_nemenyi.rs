//! Ranks five algorithms over ten datasets, runs the Friedman test and computes the
//! Nemenyi critical difference at α = 0.05.
//!
//! ```text
//! cargo run --example friedman_nemenyi
//! ```

use mfsir::stats::{friedman, nemenyi_cd, pairwise_significance, MetricTable};
use ndarray::Array2;

fn main() -> mfsir::Result<()> {
    let algorithms = ["A", "B", "C", "D", "E"];
    // Hamming loss per dataset (rows) and algorithm (columns); A is usually best.
    let values = Array2::from_shape_fn((10, 5), |(i, j)| {
        0.20 + 0.01 * j as f64 + 0.013 * ((i * 7 + j * 3) % 5) as f64
    });
    let table = MetricTable::new(
        values,
        false,
        algorithms.iter().map(|s| s.to_string()).collect(),
        (0..10).map(|i| format!("dataset{i}")).collect(),
    )?;
    let f = friedman(&table)?;
    let cd = nemenyi_cd(5, 10, Some(2.728))?;
    for (a, r) in algorithms.iter().zip(&f.avg_ranks) {
        println!("{a}: average rank {r:.2}");
    }
    println!(
        "chi2_F = {:.3}, F_F = {:.3} on ({}, {}) degrees of freedom",
        f.chi2_f, f.f_f, f.df1, f.df2
    );
    println!("CD = {cd:.3}");
    let sig = pairwise_significance(&f.avg_ranks, cd);
    for i in 0..5 {
        for j in i + 1..5 {
            if sig[[i, j]] {
                println!(
                    "{} and {} differ significantly",
                    algorithms[i], algorithms[j]
                );
            }
        }
    }
    Ok(())
}
