//! Computes the four evaluation metrics on a hand-written example, including the
//! degenerate rows and columns that ranking loss and macro-AUC skip.
//!
//! ```text
//! cargo run --example multilabel_metrics
//! ```

use mfsir::metrics::{evaluate, hamming_loss, macro_auc, macro_f1, ranking_loss, EvaluationResult};
use ndarray::array;

fn main() -> mfsir::Result<()> {
    let truth = array![[1u8, 0, 1], [0, 1, 0], [1, 1, 1], [0, 0, 1]];
    let scores = array![
        [0.9, 0.2, 0.6],
        [0.4, 0.7, 0.5],
        [0.8, 0.3, 0.9],
        [0.1, 0.6, 0.4]
    ];
    let pred = scores.mapv(|s| u8::from(s > 0.5));

    println!("hamming loss  {:.4}", hamming_loss(&pred, &truth)?);
    let rl = ranking_loss(&scores, &truth)?;
    println!(
        "ranking loss  {:.4} ({} all-positive/all-negative instance skipped)",
        rl.value, rl.skipped
    );
    let auc = macro_auc(&scores, &truth)?;
    println!(
        "macro-AUC     {:.4} ({} degenerate label skipped)",
        auc.value, auc.skipped
    );
    println!("macro-F1      {:.4}", macro_f1(&pred, &truth)?);

    let r = evaluate(&pred, &scores, &truth)?;
    println!("{}", EvaluationResult::CSV_HEADER);
    println!("{}", r.csv_row("demo", "hand", 1.0, 0));
    Ok(())
}
