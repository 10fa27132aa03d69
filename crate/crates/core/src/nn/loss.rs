//! Per-task losses and the masked, weighted multi-task objective
//!
//! `sum_k alpha_k / |I_k| * sum_{i in I_k} L_k(y_i^k, f_k(G_i))`.

use super::batch::Batch;
use super::config::{LossKind, TaskSpec};
use super::tensor::Tensor;
use crate::{Error, Result};

/// Loss of one example and its gradient w.r.t. the head output.
///
/// Squared error: `(y_hat - y)^2`. Cross-entropy: `-log softmax(z)[y]`.
pub fn example_loss(task: &TaskSpec, output: &[f64], label: f64) -> (f64, Vec<f64>) {
    match task.loss {
        LossKind::SquaredError => {
            let diff = output[0] - label;
            (diff * diff, vec![2.0 * diff])
        }
        LossKind::SoftmaxCrossEntropy => {
            let class = label as usize;
            let max = output.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = output.iter().map(|z| (z - max).exp()).collect();
            let total: f64 = exps.iter().sum();
            let log_norm = max + total.ln();
            let grad = exps
                .iter()
                .enumerate()
                .map(|(c, e)| e / total - if c == class { 1.0 } else { 0.0 })
                .collect();
            (log_norm - output[class], grad)
        }
    }
}

/// Weighted sum over tasks of the mean loss over each task's labeled rows.
///
/// A task without labeled rows in the batch contributes nothing; a batch
/// without labels for any task is an error.
pub fn multitask_loss(outputs: &[Tensor], batch: &Batch, tasks: &[TaskSpec]) -> Result<f64> {
    batch.validate(tasks)?;
    if outputs.len() != tasks.len() {
        return Err(Error::Shape(format!(
            "{} outputs for {} tasks",
            outputs.len(),
            tasks.len()
        )));
    }
    let counts = batch.label_counts();
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Data("all task masks are empty".into()));
    }
    let mut total = 0.0;
    for (t, task) in tasks.iter().enumerate() {
        if counts[t] == 0 {
            continue;
        }
        let out = &outputs[t];
        if out.shape() != [batch.len(), task.output_units()] {
            return Err(Error::Shape(format!(
                "task {} output shape {:?}",
                task.name,
                out.shape()
            )));
        }
        let labels = &batch.labels[t];
        let sum: f64 = (0..batch.len())
            .filter(|&i| labels.mask[i])
            .map(|i| example_loss(task, out.row(i), labels.values[i]).0)
            .sum();
        total += task.weight * sum / counts[t] as f64;
    }
    Ok(total)
}
