//! Labeled graph datasets: synthetic corpora, TU benchmark parsing, splits,
//! folds and the JSONL on-disk format.

mod io;
mod split;
mod synthetic;
mod tu;

pub use io::{load_dataset, read_dataset, save_dataset, write_dataset, DATASET_FORMAT_VERSION};
pub use split::{kfold, kfold_indices, split, split_indices, SplitIndices, SplitSpec};
pub use synthetic::{generate_synthetic, generate_synthetic_with, SyntheticModel};
pub use tu::parse_tu;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{density, diameter, Graph};
use crate::nn::{Example, TaskKind, TaskSpec};
use crate::spectral::{featurize, HksConfig};
use crate::{Error, Exec, Result};

pub const DENSITY: &str = "density";
pub const DIAMETER: &str = "diameter";
pub const CLASS: &str = "class";

/// Name and kind of a label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInfo {
    pub name: String,
    #[serde(flatten)]
    pub kind: TaskKind,
}

impl TaskInfo {
    pub fn regression(name: &str) -> Self {
        TaskInfo {
            name: name.into(),
            kind: TaskKind::Regression,
        }
    }

    /// Task spec for training with weight `weight`.
    pub fn spec(&self, weight: f64) -> TaskSpec {
        match self.kind {
            TaskKind::Regression => TaskSpec::regression(&self.name, weight),
            TaskKind::Classification { num_classes } => {
                TaskSpec::classification(&self.name, num_classes, weight)
            }
        }
    }
}

/// A graph with its (partial) labels; classification labels hold the class
/// index as a real.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub graph: Graph,
    pub labels: BTreeMap<String, f64>,
}

impl LabeledExample {
    /// The graph plus its density (if `n >= 2`) and diameter labels.
    pub fn with_metric_labels(graph: Graph) -> Self {
        let mut labels = BTreeMap::new();
        if let Ok(d) = density(&graph) {
            labels.insert(DENSITY.to_string(), d);
        }
        if let Ok(d) = diameter(&graph) {
            labels.insert(DIAMETER.to_string(), d as f64);
        }
        LabeledExample { graph, labels }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub tasks: Vec<TaskInfo>,
    pub examples: Vec<LabeledExample>,
}

impl LabeledDataset {
    pub fn new(tasks: Vec<TaskInfo>, examples: Vec<LabeledExample>) -> Result<Self> {
        let ds = LabeledDataset { tasks, examples };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn task(&self, name: &str) -> Option<&TaskInfo> {
        self.tasks.iter().find(|t| t.name == name)
    }

    pub fn require_task(&self, name: &str) -> Result<&TaskInfo> {
        self.task(name).ok_or_else(|| {
            let known: Vec<&str> = self.tasks.iter().map(|t| t.name.as_str()).collect();
            Error::Data(format!("unknown task {name:?}; dataset has {known:?}"))
        })
    }

    pub fn graphs(&self) -> Vec<Graph> {
        self.examples.iter().map(|e| e.graph.clone()).collect()
    }

    /// Same catalog, examples picked by index in the given order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            tasks: self.tasks.clone(),
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.tasks.iter().enumerate() {
            if self.tasks[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::Data(format!("duplicate task {}", t.name)));
            }
        }
        for (i, e) in self.examples.iter().enumerate() {
            for (name, &y) in &e.labels {
                let task = self.task(name).ok_or_else(|| {
                    Error::Data(format!("example {i}: label {name:?} not in task catalog"))
                })?;
                if !y.is_finite() {
                    return Err(Error::Data(format!("example {i}: label {name} is not finite")));
                }
                if let TaskKind::Classification { num_classes } = task.kind {
                    if y < 0.0 || y.fract() != 0.0 || y >= num_classes as f64 {
                        return Err(Error::Data(format!(
                            "example {i}: {y} is not a class index below {num_classes}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Flattened `[bins, steps]` HKS histograms, one row per example.
    pub fn featurize(&self, cfg: &HksConfig, exec: Exec) -> Result<Vec<Vec<f64>>> {
        cfg.validate()?;
        exec.try_map(&self.examples, |e| featurize(&e.graph, cfg).map(|h| h.values))
    }

    /// Training examples pairing `features[i]` with the labels of
    /// `examples[i]` for `tasks`, in task order.
    pub fn to_examples(&self, features: &[Vec<f64>], tasks: &[TaskSpec]) -> Result<Vec<Example>> {
        if features.len() != self.examples.len() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} examples",
                features.len(),
                self.examples.len()
            )));
        }
        for t in tasks {
            self.require_task(&t.name)?;
        }
        Ok(self
            .examples
            .iter()
            .zip(features)
            .map(|(e, x)| Example {
                input: x.clone(),
                targets: tasks.iter().map(|t| e.labels.get(&t.name).copied()).collect(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_catalog_and_class_errors() {
        let mut labels = BTreeMap::new();
        labels.insert("class".to_string(), 2.0);
        let ex = LabeledExample {
            graph: Graph::path(3),
            labels,
        };
        let tasks = vec![TaskInfo {
            name: CLASS.into(),
            kind: TaskKind::Classification { num_classes: 2 },
        }];
        assert!(LabeledDataset::new(tasks.clone(), vec![ex.clone()]).is_err());
        assert!(LabeledDataset::new(vec![TaskInfo::regression(DENSITY)], vec![ex.clone()]).is_err());
        let mut ok = ex;
        ok.labels.insert("class".into(), 1.0);
        assert!(LabeledDataset::new(tasks, vec![ok]).is_ok());
    }

    #[test]
    fn metric_labels() {
        let e = LabeledExample::with_metric_labels(Graph::star(5));
        assert_eq!(e.labels[DENSITY], 0.4);
        assert_eq!(e.labels[DIAMETER], 2.0);
        let e = LabeledExample::with_metric_labels(Graph::empty(1));
        assert!(!e.labels.contains_key(DENSITY));
        assert_eq!(e.labels[DIAMETER], 0.0);
    }
}
