use serde::{Deserialize, Serialize};

use super::{mean_stderr, random_search, run_once, ExperimentConfig, MeanStderr, SearchReport, SearchSpace};
use crate::data::{kfold_indices, LabeledDataset, SplitIndices};
use crate::nn::MetricKind;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSpec {
    pub folds: usize,
    pub seed: u64,
    pub main_task: String,
    pub aux_tasks: Vec<String>,
    /// Tune on the first fold only, then replay the winner on every fold.
    pub search: Option<SearchSpace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
    pub value: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: ExperimentConfig,
    pub aux_tasks: Vec<String>,
    pub metric: MetricKind,
    pub folds: Vec<FoldResult>,
    #[serde(flatten)]
    pub stats: MeanStderr,
    pub search: Option<SearchReport>,
}

/// Fold `i` is the test set; the last ninth of the remaining (shuffled)
/// examples is held out for early stopping.
fn fold_split(train: Vec<usize>, test: Vec<usize>) -> Result<SplitIndices> {
    let val_len = (train.len() / 9).max(1);
    if val_len >= train.len() {
        return Err(Error::Data(format!("training fold of {} examples is too small", train.len())));
    }
    let cut = train.len() - val_len;
    Ok(SplitIndices {
        val: train[cut..].to_vec(),
        train: train[..cut].to_vec(),
        test,
    })
}

pub fn cross_validate(ds: &LabeledDataset, spec: &CvSpec, cfg: &ExperimentConfig, exec: Exec) -> Result<CvReport> {
    let splits = kfold_indices(ds.len(), spec.folds, spec.seed)?
        .into_iter()
        .map(|(train, test)| fold_split(train, test))
        .collect::<Result<Vec<_>>>()?;

    let (config, aux, search) = match &spec.search {
        Some(space) => {
            let report = random_search(ds, &splits[0], &spec.main_task, &spec.aux_tasks, cfg, space, spec.seed, exec)?;
            let best = report.best();
            (best.config.clone(), best.aux_tasks.clone(), Some(report))
        }
        None => (cfg.clone(), spec.aux_tasks.clone(), None),
    };

    let features = ds.featurize(&config.hks, exec)?;
    let indexed: Vec<(usize, &SplitIndices)> = splits.iter().enumerate().collect();
    let results = exec.try_map(&indexed, |&(i, split)| {
            let run = run_once(ds, &features, split, None, &spec.main_task, &aux, &config, spec.seed.wrapping_add(i as u64), exec)?;
            let m = run.record.main_metric("test").expect("main task is always scored");
            log::info!("fold {i}: test {} = {}", m.metric.name(), m.value);
            let fold = FoldResult {
                fold: i,
                train_size: split.train.len(),
                val_size: split.val.len(),
                test_size: split.test.len(),
                value: m.value,
                best_epoch: run.record.best_epoch,
            };
            Ok::<_, Error>((fold, m.metric))
        })?;
    let metric = results[0].1;
    let folds: Vec<FoldResult> = results.into_iter().map(|(f, _)| f).collect();
    let values: Vec<f64> = folds.iter().map(|f| f.value).collect();
    Ok(CvReport {
        config,
        aux_tasks: aux,
        metric,
        stats: mean_stderr(&values).expect("at least two folds"),
        folds,
        search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_split_holds_out_a_ninth() {
        let s = fold_split((0..90).collect(), vec![90]).unwrap();
        assert_eq!((s.train.len(), s.val.len()), (80, 10));
        assert_eq!(s.val[0], 80);
        assert!(fold_split(vec![1], vec![0]).is_err());
    }
}
