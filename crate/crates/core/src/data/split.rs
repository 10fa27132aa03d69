use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::{Error, Result};

/// Smallest dataset `split` accepts.
pub const MIN_SPLIT_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    /// Task whose labels are budgeted.
    pub main_task: Option<String>,
    /// Number of leading train examples that keep the main-task label.
    pub main_task_budget: Option<usize>,
    pub shuffle_seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            val_fraction: 0.1,
            test_fraction: 0.1,
            main_task: None,
            main_task_budget: None,
            shuffle_seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(shuffle_seed: u64) -> Self {
        SplitSpec {
            shuffle_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.val_fraction, self.test_fraction];
        if f.iter().any(|x| !(0.0..=1.0).contains(x)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions {f:?} must be in [0,1] and sum to 1")));
        }
        if self.main_task_budget.is_some() && self.main_task.is_none() {
            return Err(Error::Config("main_task_budget needs main_task".into()));
        }
        Ok(())
    }
}

/// Positions into the original dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

fn cut(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64 + 1e-9).floor() as usize).min(n)
}

/// Shuffles `0..n` and cuts it at the train and train+val fractions.
/// Budgets are not applied here.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    if n < MIN_SPLIT_SIZE {
        return Err(Error::Data(format!("split needs at least {MIN_SPLIT_SIZE} examples, got {n}")));
    }
    let idx = shuffled(n, spec.shuffle_seed);
    let a = cut(spec.train_fraction, n);
    let b = cut(spec.train_fraction + spec.val_fraction, n).max(a);
    let out = SplitIndices {
        train: idx[..a].to_vec(),
        val: idx[a..b].to_vec(),
        test: idx[b..].to_vec(),
    };
    if let Some(s) = spec.main_task_budget {
        if s > out.train.len() {
            return Err(Error::Data(format!(
                "main-task budget {s} exceeds train size {}",
                out.train.len()
            )));
        }
    }
    Ok(out)
}

/// Train/val/test datasets. With a budget `s`, only the first `s` train
/// examples keep the main-task label; other labels are untouched.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    if let Some(t) = &spec.main_task {
        ds.require_task(t)?;
    }
    let ix = split_indices(ds.len(), spec)?;
    let mut train = ds.subset(&ix.train);
    if let (Some(task), Some(s)) = (&spec.main_task, spec.main_task_budget) {
        for e in &mut train.examples[s..] {
            e.labels.remove(task);
        }
    }
    Ok((train, ds.subset(&ix.val), ds.subset(&ix.test)))
}

/// `(train, test)` index pairs; earlier folds take the remainder.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 || n < k {
        return Err(Error::Config(format!("kfold needs k >= 2 and n >= k (k={k}, n={n})")));
    }
    let idx = shuffled(n, seed);
    let (base, rem) = (n / k, n % k);
    let mut start = 0;
    Ok((0..k)
        .map(|i| {
            let end = start + base + usize::from(i < rem);
            let test = idx[start..end].to_vec();
            let train = idx[..start].iter().chain(&idx[end..]).copied().collect();
            start = end;
            (train, test)
        })
        .collect())
}

pub fn kfold(ds: &LabeledDataset, k: usize, seed: u64) -> Result<Vec<(LabeledDataset, LabeledDataset)>> {
    Ok(kfold_indices(ds.len(), k, seed)?
        .into_iter()
        .map(|(tr, te)| (ds.subset(&tr), ds.subset(&te)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_floor_rule() {
        let s = split_indices(10, &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
        let s = split_indices(17, &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (13, 2, 2));
        assert!(split_indices(9, &SplitSpec::default()).is_err());
    }

    #[test]
    fn budget_over_train_size_fails() {
        let spec = SplitSpec {
            main_task: Some("x".into()),
            main_task_budget: Some(9),
            ..SplitSpec::default()
        };
        assert!(split_indices(10, &spec).is_err());
    }

    #[test]
    fn fold_sizes() {
        let f = kfold_indices(10, 3, 0).unwrap();
        let sizes: Vec<usize> = f.iter().map(|(_, t)| t.len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        assert!(f.iter().all(|(tr, te)| tr.len() + te.len() == 10));
        assert!(kfold_indices(3, 4, 0).is_err());
        assert!(kfold_indices(3, 1, 0).is_err());
    }

    #[test]
    fn bad_fractions() {
        let spec = SplitSpec {
            train_fraction: 0.7,
            ..SplitSpec::default()
        };
        assert!(spec.validate().is_err());
    }
}
