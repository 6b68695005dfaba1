//! Multi-label evaluation metrics.
//!
//! Ranking loss and macro-AUC skip degenerate instances/labels (all-positive or
//! all-negative) and report how many were skipped.

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationResult {
    pub hamming_loss: f64,
    pub ranking_loss: f64,
    pub macro_auc: f64,
    pub macro_f1: f64,
    pub skipped_instances: usize,
    pub skipped_labels: usize,
}

impl EvaluationResult {
    pub const CSV_HEADER: &'static str =
        "dataset,algorithm,fraction,fold,hl,rl,mauc,mf1,skipped_i,skipped_l";

    pub fn csv_row(&self, dataset: &str, algorithm: &str, fraction: f64, fold: usize) -> String {
        format!(
            "{dataset},{algorithm},{fraction},{fold},{},{},{},{},{},{}",
            self.hamming_loss,
            self.ranking_loss,
            self.macro_auc,
            self.macro_f1,
            self.skipped_instances,
            self.skipped_labels
        )
    }
}

/// A metric value with the number of degenerate rows or columns excluded from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averaged {
    pub value: f64,
    pub skipped: usize,
}

fn same_shape<A, B>(a: &Array2<A>, b: &Array2<B>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::shape(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    if a.is_empty() {
        return Err(Error::shape("empty matrices"));
    }
    Ok(())
}

pub fn hamming_loss(pred: &Array2<u8>, truth: &Array2<u8>) -> Result<f64> {
    same_shape(pred, truth)?;
    let wrong = pred.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / pred.len() as f64)
}

pub fn ranking_loss(scores: &Array2<f64>, truth: &Array2<u8>) -> Result<Averaged> {
    same_shape(scores, truth)?;
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for (s, t) in scores.rows().into_iter().zip(truth.rows()) {
        let rel: Vec<f64> = s
            .iter()
            .zip(t)
            .filter(|(_, &y)| y == 1)
            .map(|(&v, _)| v)
            .collect();
        let irr: Vec<f64> = s
            .iter()
            .zip(t)
            .filter(|(_, &y)| y == 0)
            .map(|(&v, _)| v)
            .collect();
        if rel.is_empty() || irr.is_empty() {
            skipped += 1;
            continue;
        }
        let bad = rel
            .iter()
            .map(|&a| irr.iter().filter(|&&b| a <= b).count())
            .sum::<usize>();
        total += bad as f64 / (rel.len() * irr.len()) as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::Data(
            "ranking loss undefined: every instance is degenerate".into(),
        ));
    }
    Ok(Averaged {
        value: total / used as f64,
        skipped,
    })
}

pub fn macro_auc(scores: &Array2<f64>, truth: &Array2<u8>) -> Result<Averaged> {
    same_shape(scores, truth)?;
    let mut total = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for (s, t) in scores.columns().into_iter().zip(truth.columns()) {
        let pos: Vec<f64> = s
            .iter()
            .zip(t)
            .filter(|(_, &y)| y == 1)
            .map(|(&v, _)| v)
            .collect();
        let neg: Vec<f64> = s
            .iter()
            .zip(t)
            .filter(|(_, &y)| y == 0)
            .map(|(&v, _)| v)
            .collect();
        if pos.is_empty() || neg.is_empty() {
            skipped += 1;
            continue;
        }
        let good = pos
            .iter()
            .map(|&a| neg.iter().filter(|&&b| a >= b).count())
            .sum::<usize>();
        total += good as f64 / (pos.len() * neg.len()) as f64;
        used += 1;
    }
    if used == 0 {
        return Err(Error::Data(
            "macro-AUC undefined: every label is degenerate".into(),
        ));
    }
    Ok(Averaged {
        value: total / used as f64,
        skipped,
    })
}

/// Mean over labels of `2TP / (2TP + FP + FN)`, with `0/0 = 0`.
pub fn macro_f1(pred: &Array2<u8>, truth: &Array2<u8>) -> Result<f64> {
    same_shape(pred, truth)?;
    let q = pred.ncols();
    let sum: f64 = (0..q)
        .map(|j| {
            let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
            for (&p, &t) in pred.column(j).iter().zip(truth.column(j)) {
                match (p, t) {
                    (1, 1) => tp += 1,
                    (1, 0) => fp += 1,
                    (0, 1) => fneg += 1,
                    _ => {}
                }
            }
            let denom = 2 * tp + fp + fneg;
            if denom == 0 {
                0.0
            } else {
                (2 * tp) as f64 / denom as f64
            }
        })
        .sum();
    Ok(sum / q as f64)
}

pub fn evaluate(
    pred: &Array2<u8>,
    scores: &Array2<f64>,
    truth: &Array2<u8>,
) -> Result<EvaluationResult> {
    let rl = ranking_loss(scores, truth)?;
    let auc = macro_auc(scores, truth)?;
    Ok(EvaluationResult {
        hamming_loss: hamming_loss(pred, truth)?,
        ranking_loss: rl.value,
        macro_auc: auc.value,
        macro_f1: macro_f1(pred, truth)?,
        skipped_instances: rl.skipped,
        skipped_labels: auc.skipped,
    })
}
