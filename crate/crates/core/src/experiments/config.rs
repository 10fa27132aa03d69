use serde::{Deserialize, Serialize};

use crate::nn::{ConvSpec, NetConfig, Schedule, TaskSpec, DEFAULT_FC_SHARED_UNITS, DEFAULT_FILTERS, DEFAULT_HEAD_UNITS};
use crate::spectral::HksConfig;
use crate::{Error, Result};

/// Everything needed to replay a run apart from data and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hks: HksConfig,
    pub kernel1: usize,
    pub kernel2: usize,
    pub filters: usize,
    pub fc_shared_units: usize,
    pub head_units: usize,
    pub main_weight: f64,
    /// Weight given to every auxiliary task.
    pub aux_weight: f64,
    pub schedule: Schedule,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            hks: HksConfig::default(),
            kernel1: 3,
            kernel2: 3,
            filters: DEFAULT_FILTERS,
            fc_shared_units: DEFAULT_FC_SHARED_UNITS,
            head_units: DEFAULT_HEAD_UNITS,
            main_weight: 1.0,
            aux_weight: 0.5,
            schedule: Schedule::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn net_config(&self, tasks: Vec<TaskSpec>, seed: u64) -> NetConfig {
        NetConfig {
            input_bins: self.hks.num_bins,
            input_steps: self.hks.num_steps,
            conv1: ConvSpec::square(self.kernel1, self.filters),
            conv2: ConvSpec::square(self.kernel2, self.filters),
            fc_shared_units: self.fc_shared_units,
            head_units: self.head_units,
            tasks,
            rng_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hks.validate()?;
        if !(self.main_weight > 0.0 && self.main_weight.is_finite()) {
            return Err(Error::Config(format!("main_weight must be positive, got {}", self.main_weight)));
        }
        if !(self.aux_weight >= 0.0 && self.aux_weight.is_finite()) {
            return Err(Error::Config(format!("aux_weight must be nonnegative, got {}", self.aux_weight)));
        }
        if self.schedule.batch_size == 0 || self.schedule.max_epochs == 0 {
            return Err(Error::Config("batch_size and max_epochs must be positive".into()));
        }
        self.net_config(vec![TaskSpec::regression("main", 1.0)], 0).validate()
    }
}
