use super::config::{TaskKind, TaskSpec};
use super::net::TargetScaler;
use super::tensor::Tensor;
use crate::{Error, Result};

/// Labels for one task across a batch. `mask[i]` marks membership of row
/// `i` in the task's labeled set; `values[i]` is ignored when unmasked.
/// Classification labels are class indices stored as reals.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskLabels {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// `[batch, 1, bins, steps]`.
    pub inputs: Tensor,
    /// One entry per task, in task order.
    pub labels: Vec<TaskLabels>,
}

/// A featurized example with one optional target per task.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: Vec<f64>,
    pub targets: Vec<Option<f64>>,
}

impl Batch {
    /// Stacks examples, standardizing regression targets with `scalers`.
    pub fn from_examples(examples: &[&Example], tasks: &[TaskSpec], scalers: &[TargetScaler], bins: usize, steps: usize) -> Result<Batch> {
        let n = examples.len();
        let mut data = Vec::with_capacity(n * bins * steps);
        for e in examples {
            if e.input.len() != bins * steps {
                return Err(Error::Shape(format!(
                    "example input has {} values, expected {}",
                    e.input.len(),
                    bins * steps
                )));
            }
            if e.targets.len() != tasks.len() {
                return Err(Error::Shape(format!(
                    "example has {} targets for {} tasks",
                    e.targets.len(),
                    tasks.len()
                )));
            }
            data.extend_from_slice(&e.input);
        }
        let labels = tasks
            .iter()
            .enumerate()
            .map(|(t, task)| {
                let mut values = Vec::with_capacity(n);
                let mut mask = Vec::with_capacity(n);
                for e in examples {
                    match e.targets[t] {
                        Some(y) => {
                            values.push(if task.is_regression() { scalers[t].standardize(y) } else { y });
                            mask.push(true);
                        }
                        None => {
                            values.push(0.0);
                            mask.push(false);
                        }
                    }
                }
                TaskLabels { values, mask }
            })
            .collect();
        Ok(Batch {
            inputs: Tensor::from_vec(&[n, 1, bins, steps], data)?,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.shape().first().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|I_k ∩ batch|` per task.
    pub fn label_counts(&self) -> Vec<usize> {
        self.labels
            .iter()
            .map(|l| l.mask.iter().filter(|&&m| m).count())
            .collect()
    }

    pub fn validate(&self, tasks: &[TaskSpec]) -> Result<()> {
        let n = self.len();
        if self.labels.len() != tasks.len() {
            return Err(Error::Shape(format!(
                "{} label sets for {} tasks",
                self.labels.len(),
                tasks.len()
            )));
        }
        for (labels, task) in self.labels.iter().zip(tasks) {
            if labels.values.len() != n || labels.mask.len() != n {
                return Err(Error::Shape(format!("labels of task {} do not cover the batch", task.name)));
            }
            for (&y, _) in labels.values.iter().zip(&labels.mask).filter(|(_, &m)| m) {
                if !y.is_finite() {
                    return Err(Error::NonFinite(format!("label of task {}", task.name)));
                }
                if let TaskKind::Classification { num_classes } = task.kind {
                    if y < 0.0 || y.fract() != 0.0 || y >= num_classes as f64 {
                        return Err(Error::Data(format!(
                            "label {y} is not a class of task {} ({num_classes} classes)",
                            task.name
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            if !self.labels.iter().any(|l| l.mask[i]) {
                return Err(Error::Data(format!("batch row {i} has no label for any task")));
            }
        }
        Ok(())
    }
}
