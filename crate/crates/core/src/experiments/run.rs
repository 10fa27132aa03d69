use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::data::{LabeledDataset, SplitIndices};
use crate::nn::{evaluate, train, Example, MetricKind, MultiTaskNet, TaskSpec};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetric {
    pub split: String,
    pub task: String,
    pub metric: MetricKind,
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub main_task: String,
    pub aux_tasks: Vec<String>,
    pub seed: u64,
    pub main_task_budget: Option<usize>,
    pub metrics: Vec<SplitMetric>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn metric(&self, split: &str, task: &str) -> Option<&SplitMetric> {
        self.metrics.iter().find(|m| m.split == split && m.task == task)
    }

    pub fn main_metric(&self, split: &str) -> Option<&SplitMetric> {
        self.metric(split, &self.main_task)
    }
}

/// A finished run and the model it produced.
#[derive(Debug, Clone)]
pub struct Run {
    pub record: RunRecord,
    pub net: MultiTaskNet,
}

/// Main task first, then the auxiliaries, with the configured weights.
pub fn task_specs(ds: &LabeledDataset, main: &str, aux: &[String], cfg: &ExperimentConfig) -> Result<Vec<TaskSpec>> {
    if aux.iter().any(|a| a == main) {
        return Err(Error::Config(format!("{main} is both main and auxiliary task")));
    }
    std::iter::once((main, cfg.main_weight))
        .chain(aux.iter().map(|a| (a.as_str(), cfg.aux_weight)))
        .map(|(name, w)| Ok(ds.require_task(name)?.spec(w)))
        .collect()
}

fn examples(
    ds: &LabeledDataset,
    features: &[Vec<f64>],
    indices: &[usize],
    tasks: &[TaskSpec],
    main_budget: Option<usize>,
) -> Vec<Example> {
    indices
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let labels = &ds.examples[i].labels;
            let targets = tasks
                .iter()
                .enumerate()
                .map(|(t, spec)| {
                    if t == 0 && main_budget.is_some_and(|s| pos >= s) {
                        None
                    } else {
                        labels.get(&spec.name).copied()
                    }
                })
                .collect();
            Example {
                input: features[i].clone(),
                targets,
            }
        })
        .collect()
}

/// Trains one model on `split.train` (early stopping on `split.val`) and
/// scores every task on all three parts. With a budget `s`, only the first
/// `s` train examples contribute main-task labels.
#[allow(clippy::too_many_arguments)]
pub fn run_once(
    ds: &LabeledDataset,
    features: &[Vec<f64>],
    split: &SplitIndices,
    budget: Option<usize>,
    main: &str,
    aux: &[String],
    cfg: &ExperimentConfig,
    seed: u64,
    exec: Exec,
) -> Result<Run> {
    let start = Instant::now();
    cfg.validate()?;
    if features.len() != ds.len() {
        return Err(Error::Shape(format!("{} feature rows for {} examples", features.len(), ds.len())));
    }
    if let Some(s) = budget {
        if s == 0 || s > split.train.len() {
            return Err(Error::Data(format!("budget {s} outside 1..={}", split.train.len())));
        }
    }
    let tasks = task_specs(ds, main, aux, cfg)?;
    let train_set = examples(ds, features, &split.train, &tasks, budget);
    let val_set = examples(ds, features, &split.val, &tasks, None);
    let test_set = examples(ds, features, &split.test, &tasks, None);

    let mut net = MultiTaskNet::new(cfg.net_config(tasks, seed))?;
    let schedule = crate::nn::Schedule { exec, ..cfg.schedule };
    let history = train(&mut net, &train_set, &val_set, &schedule)?;

    let mut metrics = Vec::new();
    for (name, set) in [("train", &train_set), ("val", &val_set), ("test", &test_set)] {
        for m in evaluate(&net, set, exec)? {
            if !m.value.is_finite() {
                return Err(Error::NonFinite(format!("{name} {} metric", m.task)));
            }
            metrics.push(SplitMetric {
                split: name.into(),
                task: m.task,
                metric: m.metric,
                value: m.value,
                count: m.count,
            });
        }
    }
    let record = RunRecord {
        config: cfg.clone(),
        main_task: main.into(),
        aux_tasks: aux.to_vec(),
        seed,
        main_task_budget: budget,
        metrics,
        best_epoch: history.best_epoch,
        epochs_run: history.epochs.len(),
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Run { record, net })
}
