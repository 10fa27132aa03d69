//! Minibatch Adam training with validation-based early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamConfig;
use super::batch::{Batch, Example};
use super::config::TaskKind;
use super::loss::example_loss;
use super::net::{MultiTaskNet, TargetScaler};
use crate::{Error, Exec, Result};

/// Generator stream used for epoch shuffling; streams `0..=tasks` seed the
/// weights.
const SHUFFLE_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop after this many epochs without a new best validation loss.
    pub patience: usize,
    pub adam: AdamConfig,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            batch_size: 32,
            max_epochs: 200,
            patience: 10,
            adam: AdamConfig::default(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

fn fit_scalers(net: &MultiTaskNet, examples: &[Example]) -> Vec<TargetScaler> {
    net.tasks()
        .iter()
        .enumerate()
        .map(|(t, task)| match task.kind {
            TaskKind::Regression => {
                let values: Vec<f64> = examples.iter().filter_map(|e| e.targets[t]).collect();
                TargetScaler::fit(&values)
            }
            TaskKind::Classification { .. } => TargetScaler::IDENTITY,
        })
        .collect()
}

fn check_examples(net: &MultiTaskNet, examples: &[Example], what: &str) -> Result<()> {
    let len = net.config().input_len();
    let tasks = net.tasks().len();
    for (i, e) in examples.iter().enumerate() {
        if e.input.len() != len || e.targets.len() != tasks {
            return Err(Error::Shape(format!(
                "{what} example {i}: {} inputs / {} targets, expected {len} / {tasks}",
                e.input.len(),
                e.targets.len()
            )));
        }
    }
    Ok(())
}

/// Weighted multi-task loss over a whole example set in standardized units,
/// each task averaged over the examples that carry its label.
pub fn dataset_loss(net: &MultiTaskNet, examples: &[Example], exec: Exec) -> Result<f64> {
    check_examples(net, examples, "evaluation")?;
    let tasks = net.tasks();
    let scalers = net.scalers();
    let per_example = exec.map(examples, |e| {
        let out = net.raw_outputs(&e.input);
        tasks
            .iter()
            .enumerate()
            .map(|(t, task)| {
                e.targets[t].map(|y| {
                    let y = if task.is_regression() { scalers[t].standardize(y) } else { y };
                    example_loss(task, &out[t], y).0
                })
            })
            .collect::<Vec<_>>()
    });
    let mut sums = vec![0.0; tasks.len()];
    let mut counts = vec![0usize; tasks.len()];
    for losses in &per_example {
        for (t, l) in losses.iter().enumerate() {
            if let Some(l) = l {
                sums[t] += l;
                counts[t] += 1;
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::Data("no labels for any task".into()));
    }
    Ok(tasks
        .iter()
        .enumerate()
        .filter(|(t, _)| counts[*t] > 0)
        .map(|(t, task)| task.weight * sums[t] / counts[t] as f64)
        .sum())
}

/// Trains `net` in place and leaves it holding the parameters of the epoch
/// with the lowest validation loss.
///
/// Regression targets are standardized with statistics of the labeled
/// training examples. Training rows that carry no label for a positively
/// weighted task are skipped. Each epoch shuffles the full training list
/// with the run generator before filtering, so runs that differ only in
/// their task set visit the shared rows in the same order.
pub fn train(net: &mut MultiTaskNet, train_set: &[Example], val_set: &[Example], schedule: &Schedule) -> Result<History> {
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Data("training and validation sets must be non-empty".into()));
    }
    if schedule.batch_size == 0 || schedule.max_epochs == 0 {
        return Err(Error::Config("batch size and max epochs must be positive".into()));
    }
    check_examples(net, train_set, "training")?;
    check_examples(net, val_set, "validation")?;
    net.set_scalers(fit_scalers(net, train_set))?;

    let weighted: Vec<bool> = net.tasks().iter().map(|t| t.weight > 0.0).collect();
    let eligible: Vec<bool> = train_set
        .iter()
        .map(|e| e.targets.iter().zip(&weighted).any(|(y, &w)| w && y.is_some()))
        .collect();
    if !eligible.iter().any(|&e| e) {
        return Err(Error::Data("no training example is labeled for a weighted task".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(net.config().rng_seed);
    rng.set_stream(SHUFFLE_STREAM);
    let (bins, steps) = (net.config().input_bins, net.config().input_steps);
    let tasks = net.tasks().to_vec();

    let mut history = History {
        epochs: Vec::new(),
        best_epoch: 0,
        best_val_loss: f64::INFINITY,
    };
    let mut best_params = net.params().to_vec();
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=schedule.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut rng);
        let rows: Vec<&Example> = order
            .iter()
            .filter(|&&i| eligible[i])
            .map(|&i| &train_set[i])
            .collect();
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for chunk in rows.chunks(schedule.batch_size) {
            let batch = Batch::from_examples(chunk, &tasks, net.scalers(), bins, steps)?;
            let (loss, grads) = net
                .loss_and_gradients(&batch, schedule.exec)
                .map_err(|e| match e {
                    Error::NonFinite(_) => Error::Divergence { epoch, loss: f64::NAN },
                    other => other,
                })?;
            net.adam_step(&grads, &schedule.adam)?;
            loss_sum += loss;
            batches += 1;
        }
        let train_loss = loss_sum / batches as f64;
        let val_loss = dataset_loss(net, val_set, schedule.exec)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                loss: if train_loss.is_finite() { val_loss } else { train_loss },
            });
        }
        log::debug!("epoch {epoch}: train {train_loss:.6} val {val_loss:.6}");
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
        });
        if val_loss < history.best_val_loss {
            history.best_val_loss = val_loss;
            history.best_epoch = epoch;
            best_params.clone_from_slice(net.params());
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= schedule.patience {
            break;
        }
    }
    net.params_mut().clone_from_slice(&best_params);
    Ok(history)
}
