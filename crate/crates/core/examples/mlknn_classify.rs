//! Trains ML-kNN on one half of a synthetic dataset and scores the other half.
//!
//! ```text
//! cargo run --release --example mlknn_classify
//! ```

use mfsir::metrics::evaluate;
use mfsir::mlknn::{mlknn_fit, mlknn_predict};
use mfsir::synthetic::sparse_recovery;

fn main() -> mfsir::Result<()> {
    let d = sparse_recovery(400, 8, 3, 3, 5)?.dataset;
    let train = d.subset_rows(&(0..300).collect::<Vec<_>>())?;
    let test = d.subset_rows(&(300..400).collect::<Vec<_>>())?;

    let model = mlknn_fit(&train, 10, 1.0)?;
    println!("label priors: {:.3}", model.priors);
    println!(
        "P(c positive neighbours | label 0 on), c = 0..=10:\n{:.3}",
        model.cond.row(0)
    );

    let out = mlknn_predict(&model, test.x())?;
    println!(
        "first test instance: scores {:.3}, truth {}",
        out.scores.row(0),
        test.y().row(0)
    );
    let r = evaluate(&out.predictions, &out.scores, test.y())?;
    println!(
        "hamming loss {:.4}, ranking loss {:.4}, macro-AUC {:.4}, macro-F1 {:.4}",
        r.hamming_loss, r.ranking_loss, r.macro_auc, r.macro_f1
    );
    Ok(())
}
