//! Builds the heat-kernel kNN similarity graph and its Laplacian, and checks the
//! identity `tr(Vᵀ L V) = ½ Σᵢⱼ Sᵢⱼ |vᵢ - vⱼ|²` that makes the manifold term a
//! smoothness penalty.
//!
//! ```text
//! cargo run --example graph_laplacian
//! ```

use mfsir::graph::{build_laplacian, build_similarity_with, manifold_term, GraphConfig};
use ndarray::array;

fn main() -> mfsir::Result<()> {
    // Two small clusters on a line.
    let x = array![[0.0], [0.2], [0.5], [5.0], [5.3], [5.4]];
    let graph = build_similarity_with(
        &x,
        &GraphConfig {
            p: 2,
            ..Default::default()
        },
    )?;
    println!("adaptive lambda = {:.4}", graph.lambda());
    println!("S =\n{:.3}", graph.matrix());

    let l = build_laplacian(&graph);
    println!("L =\n{:.3}", l.matrix());

    let v = array![
        [1.0, 0.0],
        [0.9, 0.1],
        [0.8, 0.1],
        [0.0, 1.0],
        [0.1, 0.9],
        [0.0, 0.8]
    ];
    let trace = manifold_term(&v, &l)?;
    let s = graph.matrix();
    let mut pairwise = 0.0;
    for i in 0..v.nrows() {
        for j in 0..v.nrows() {
            let d = &v.row(i) - &v.row(j);
            pairwise += 0.5 * s[[i, j]] * d.dot(&d);
        }
    }
    println!("tr(V^T L V) = {trace:.12}");
    println!("pairwise    = {pairwise:.12}");
    Ok(())
}
