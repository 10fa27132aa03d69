use serde::{Deserialize, Serialize};

use super::batch::Example;
use super::config::TaskKind;
use super::net::MultiTaskNet;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Mean squared error in label units.
    Mse,
    /// Fraction of correctly classified examples.
    Accuracy,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Accuracy => "accuracy",
        }
    }

    /// Whether `a` is a better score than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            MetricKind::Mse => a < b,
            MetricKind::Accuracy => a > b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetric {
    pub task: String,
    pub metric: MetricKind,
    pub value: f64,
    /// Number of labeled examples scored.
    pub count: usize,
}

/// Index of the largest logit; the lowest index wins exact ties.
pub fn argmax(logits: &[f64]) -> usize {
    let mut best = 0;
    for (i, &z) in logits.iter().enumerate().skip(1) {
        if z > logits[best] {
            best = i;
        }
    }
    best
}

/// Scores every task of `net` on the examples that carry its label.
pub fn evaluate(net: &MultiTaskNet, examples: &[Example], exec: Exec) -> Result<Vec<TaskMetric>> {
    let predictions = exec.try_map(examples, |e| net.predict(&e.input))?;
    net.tasks()
        .iter()
        .enumerate()
        .map(|(t, task)| {
            let mut count = 0usize;
            let mut total = 0.0;
            for (e, pred) in examples.iter().zip(&predictions) {
                let Some(y) = e.targets.get(t).copied().flatten() else { continue };
                count += 1;
                match task.kind {
                    TaskKind::Regression => {
                        let d = pred[t][0] - y;
                        total += d * d;
                    }
                    TaskKind::Classification { .. } => {
                        if argmax(&pred[t]) as f64 == y {
                            total += 1.0;
                        }
                    }
                }
            }
            if count == 0 {
                return Err(Error::Data(format!("task {} has no labeled examples", task.name)));
            }
            Ok(TaskMetric {
                task: task.name.clone(),
                metric: match task.kind {
                    TaskKind::Regression => MetricKind::Mse,
                    TaskKind::Classification { .. } => MetricKind::Accuracy,
                },
                value: total / count as f64,
                count,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.0, 0.0]), 0);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[-1.0]), 0);
    }

    #[test]
    fn metric_ordering() {
        assert!(MetricKind::Mse.better(0.1, 0.2));
        assert!(MetricKind::Accuracy.better(0.9, 0.8));
        assert!(!MetricKind::Accuracy.better(0.8, 0.8));
    }
}
