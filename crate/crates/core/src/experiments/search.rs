use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{run_once, ExperimentConfig, RunRecord};
use crate::data::{LabeledDataset, SplitIndices};
use crate::nn::TaskSpec;
use crate::{Error, Exec, Result};

const MAX_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub steps: Vec<usize>,
    pub bins: Vec<usize>,
    /// Natural-log bounds for `t_min`, sampled uniformly.
    pub log_t_min: (f64, f64),
    pub log_t_max: (f64, f64),
    pub kernels: Vec<usize>,
    /// If non-empty, each trial uses one of these as its only auxiliary task.
    pub aux_choices: Vec<String>,
    /// If non-empty, each trial draws its auxiliary weight from this list.
    pub aux_weights: Vec<f64>,
    pub num_trials: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            steps: vec![16, 32, 64, 128],
            bins: vec![16, 32, 64, 128],
            log_t_min: (-6.0, 1.0),
            log_t_max: (2.0, 6.0),
            kernels: vec![3, 5, 7],
            aux_choices: Vec::new(),
            aux_weights: Vec::new(),
            num_trials: 20,
        }
    }
}

/// One sampled point of the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub config: ExperimentConfig,
    /// Set when the space chooses the auxiliary task.
    pub aux_task: Option<String>,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(Error::Config("search needs at least one trial".into()));
        }
        if self.steps.is_empty() || self.bins.is_empty() || self.kernels.is_empty() {
            return Err(Error::Config("search space has an empty choice list".into()));
        }
        let (a, b) = self.log_t_min;
        let (c, d) = self.log_t_max;
        if !(a <= b && b < c && c <= d) || ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(Error::Config(format!(
                "time ranges [{a}, {b}] and [{c}, {d}] must be ordered and disjoint"
            )));
        }
        Ok(())
    }

    fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
        if lo == hi {
            lo.exp()
        } else {
            rng.random_range(lo..hi).exp()
        }
    }

    /// The trial sequence for `seed`; shape choices that collapse the network
    /// are redrawn.
    pub fn sample(&self, base: &ExperimentConfig, seed: u64) -> Result<Vec<TrialConfig>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.num_trials)
            .map(|_| {
                let mut cfg = base.clone();
                let mut feasible = false;
                for _ in 0..MAX_RESAMPLES {
                    cfg.hks.num_steps = *self.steps.choose(&mut rng).unwrap();
                    cfg.hks.num_bins = *self.bins.choose(&mut rng).unwrap();
                    cfg.kernel1 = *self.kernels.choose(&mut rng).unwrap();
                    cfg.kernel2 = *self.kernels.choose(&mut rng).unwrap();
                    if cfg.net_config(vec![TaskSpec::regression("main", 1.0)], 0).validate().is_ok() {
                        feasible = true;
                        break;
                    }
                }
                if !feasible {
                    return Err(Error::Config("no feasible shape in the search space".into()));
                }
                cfg.hks.t_min = Self::log_uniform(&mut rng, self.log_t_min);
                cfg.hks.t_max = Self::log_uniform(&mut rng, self.log_t_max);
                let aux_task = self.aux_choices.choose(&mut rng).cloned();
                if let Some(&w) = self.aux_weights.choose(&mut rng) {
                    cfg.aux_weight = w;
                }
                Ok(TrialConfig { config: cfg, aux_task })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub config: ExperimentConfig,
    pub aux_tasks: Vec<String>,
    pub record: Option<RunRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub trials: Vec<TrialRecord>,
    /// Index into `trials`.
    pub best: usize,
}

impl SearchReport {
    pub fn best(&self) -> &TrialRecord {
        &self.trials[self.best]
    }
}

/// Trains every sampled configuration on `split` and keeps the one with the
/// best main-task validation metric (earliest trial on ties). Failed trials
/// are recorded and skipped.
#[allow(clippy::too_many_arguments)]
pub fn random_search(
    ds: &LabeledDataset,
    split: &SplitIndices,
    main: &str,
    aux: &[String],
    base: &ExperimentConfig,
    space: &SearchSpace,
    seed: u64,
    exec: Exec,
) -> Result<SearchReport> {
    let mut trials = Vec::with_capacity(space.num_trials);
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in space.sample(base, seed)?.into_iter().enumerate() {
        let aux_tasks = match &t.aux_task {
            Some(a) => vec![a.clone()],
            None => aux.to_vec(),
        };
        let outcome = ds
            .featurize(&t.config.hks, exec)
            .and_then(|x| run_once(ds, &x, split, None, main, &aux_tasks, &t.config, seed, exec));
        let (record, error) = match outcome {
            Ok(run) => {
                let m = run.record.main_metric("val").expect("main task is always scored");
                if best.is_none_or(|(_, v)| m.metric.better(m.value, v)) {
                    best = Some((i, m.value));
                }
                log::info!("trial {i}: val {} = {}", m.metric.name(), m.value);
                (Some(run.record), None)
            }
            Err(e) => {
                log::warn!("trial {i} failed: {e}");
                (None, Some(e.to_string()))
            }
        };
        trials.push(TrialRecord {
            trial: i,
            config: t.config,
            aux_tasks,
            record,
            error,
        });
    }
    match best {
        Some((best, _)) => Ok(SearchReport { trials, best }),
        None => Err(Error::AllTrialsFailed(space.num_trials)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_range_and_feasible() {
        let space = SearchSpace {
            num_trials: 1000,
            ..SearchSpace::default()
        };
        let trials = space.sample(&ExperimentConfig::default(), 3).unwrap();
        for t in &trials {
            let h = &t.config.hks;
            assert!(h.t_min >= (-6.0f64).exp() && h.t_min <= 1.0f64.exp());
            assert!(h.t_max >= 2.0f64.exp() && h.t_max <= 6.0f64.exp());
            assert!(h.t_min < h.t_max);
            assert!(t.config.validate().is_ok());
        }
        // Some draws of (B or T = 16, kernels 7 and 7) must have been redrawn.
        assert!(trials.iter().all(|t| !(t.config.hks.num_bins == 16 && t.config.kernel1 == 7 && t.config.kernel2 == 7)));
        assert_eq!(trials, space.sample(&ExperimentConfig::default(), 3).unwrap());
        assert_ne!(trials, space.sample(&ExperimentConfig::default(), 4).unwrap());
    }

    #[test]
    fn aux_choice_and_weights_are_drawn() {
        let space = SearchSpace {
            aux_choices: vec!["density".into(), "diameter".into()],
            aux_weights: vec![0.1, 0.5, 1.0],
            num_trials: 50,
            ..SearchSpace::default()
        };
        let trials = space.sample(&ExperimentConfig::default(), 0).unwrap();
        assert!(trials.iter().any(|t| t.aux_task.as_deref() == Some("density")));
        assert!(trials.iter().any(|t| t.aux_task.as_deref() == Some("diameter")));
        assert!(trials.iter().all(|t| [0.1, 0.5, 1.0].contains(&t.config.aux_weight)));
    }

    #[test]
    fn zero_trials_rejected() {
        let space = SearchSpace {
            num_trials: 0,
            ..SearchSpace::default()
        };
        assert!(space.sample(&ExperimentConfig::default(), 0).is_err());
    }
}
