use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TaskKind {
    Regression,
    Classification { num_classes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SquaredError,
    SoftmaxCrossEntropy,
}

/// One prediction task: its head shape, loss and weight in the total loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    pub weight: f64,
    pub loss: LossKind,
}

impl TaskSpec {
    pub fn regression(name: impl Into<String>, weight: f64) -> Self {
        TaskSpec {
            name: name.into(),
            kind: TaskKind::Regression,
            weight,
            loss: LossKind::SquaredError,
        }
    }

    pub fn classification(name: impl Into<String>, num_classes: usize, weight: f64) -> Self {
        TaskSpec {
            name: name.into(),
            kind: TaskKind::Classification { num_classes },
            weight,
            loss: LossKind::SoftmaxCrossEntropy,
        }
    }

    pub fn output_units(&self) -> usize {
        match self.kind {
            TaskKind::Regression => 1,
            TaskKind::Classification { num_classes } => num_classes,
        }
    }

    pub fn is_regression(&self) -> bool {
        self.kind == TaskKind::Regression
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.loss) {
            (TaskKind::Regression, LossKind::SquaredError) => {}
            (TaskKind::Classification { num_classes }, LossKind::SoftmaxCrossEntropy) => {
                if num_classes < 2 {
                    return Err(Error::Config(format!(
                        "task {} needs at least 2 classes",
                        self.name
                    )));
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "task {}: regression pairs with squared error, classification with cross-entropy",
                    self.name
                )))
            }
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::Config(format!(
                "task {} weight {} must be finite and >= 0",
                self.name, self.weight
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub filters: usize,
}

impl ConvSpec {
    pub fn square(kernel: usize, filters: usize) -> Self {
        ConvSpec {
            kernel_h: kernel,
            kernel_w: kernel,
            filters,
        }
    }
}

pub const ALLOWED_KERNELS: [usize; 3] = [3, 5, 7];
pub const DEFAULT_FILTERS: usize = 8;
pub const DEFAULT_FC_SHARED_UNITS: usize = 60;
pub const DEFAULT_HEAD_UNITS: usize = 40;

/// Spatial size after a valid convolution followed by 2x2 floor pooling.
/// A dimension of length 1 pools to 1 (the window is clipped).
pub fn conv_pool_len(input: usize, kernel: usize) -> usize {
    if input < kernel {
        0
    } else {
        pool_len(input - kernel + 1)
    }
}

pub fn pool_len(input: usize) -> usize {
    if input == 1 {
        1
    } else {
        input / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Input height (histogram bins).
    pub input_bins: usize,
    /// Input width (HKS time steps).
    pub input_steps: usize,
    pub conv1: ConvSpec,
    pub conv2: ConvSpec,
    pub fc_shared_units: usize,
    pub head_units: usize,
    pub tasks: Vec<TaskSpec>,
    pub rng_seed: u64,
}

impl NetConfig {
    /// Defaults for filter count and dense widths.
    pub fn new(input_bins: usize, input_steps: usize, kernel1: usize, kernel2: usize, tasks: Vec<TaskSpec>, rng_seed: u64) -> Self {
        NetConfig {
            input_bins,
            input_steps,
            conv1: ConvSpec::square(kernel1, DEFAULT_FILTERS),
            conv2: ConvSpec::square(kernel2, DEFAULT_FILTERS),
            fc_shared_units: DEFAULT_FC_SHARED_UNITS,
            head_units: DEFAULT_HEAD_UNITS,
            tasks,
            rng_seed,
        }
    }

    /// `(channels, height, width)` after both conv+pool stages.
    pub fn trunk_feature_shape(&self) -> (usize, usize, usize) {
        let h = conv_pool_len(conv_pool_len(self.input_bins, self.conv1.kernel_h), self.conv2.kernel_h);
        let w = conv_pool_len(conv_pool_len(self.input_steps, self.conv1.kernel_w), self.conv2.kernel_w);
        (self.conv2.filters, h, w)
    }

    pub fn flattened_len(&self) -> usize {
        let (c, h, w) = self.trunk_feature_shape();
        c * h * w
    }

    pub fn input_len(&self) -> usize {
        self.input_bins * self.input_steps
    }

    pub fn task_index(&self, name: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        for conv in [self.conv1, self.conv2] {
            if conv.kernel_h != conv.kernel_w || !ALLOWED_KERNELS.contains(&conv.kernel_h) {
                return Err(Error::Config(format!(
                    "kernels must be square with size in {ALLOWED_KERNELS:?}, got {}x{}",
                    conv.kernel_h, conv.kernel_w
                )));
            }
            if conv.filters == 0 {
                return Err(Error::Config("convolution needs at least one filter".into()));
            }
        }
        if self.fc_shared_units == 0 || self.head_units == 0 {
            return Err(Error::Config("dense layers need at least one unit".into()));
        }
        let (_, h, w) = self.trunk_feature_shape();
        if h == 0 || w == 0 {
            return Err(Error::Config(format!(
                "input {}x{} collapses to zero size with kernels {} and {}",
                self.input_bins, self.input_steps, self.conv1.kernel_h, self.conv2.kernel_h
            )));
        }
        if self.tasks.is_empty() {
            return Err(Error::Config("at least one task is required".into()));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            t.validate()?;
            if self.tasks[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::Config(format!("duplicate task {}", t.name)));
            }
        }
        if !self.tasks.iter().any(|t| t.weight > 0.0) {
            return Err(Error::Config("at least one task needs a positive weight".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_arithmetic_8x8_k3() {
        // 8 -> conv 6 -> pool 3 -> conv 1 -> pool 1.
        assert_eq!(conv_pool_len(8, 3), 3);
        assert_eq!(conv_pool_len(3, 3), 1);
        let cfg = NetConfig::new(8, 8, 3, 3, vec![TaskSpec::regression("y", 1.0)], 0);
        assert_eq!(cfg.trunk_feature_shape(), (8, 1, 1));
        cfg.validate().unwrap();
        assert_eq!(conv_pool_len(7, 3), 2);
        assert_eq!(conv_pool_len(2, 3), 0);
        let cfg = NetConfig::new(16, 16, 7, 7, vec![TaskSpec::regression("y", 1.0)], 0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_rejects_bad_tasks_and_kernels() {
        let base = NetConfig::new(16, 16, 3, 3, vec![TaskSpec::regression("y", 1.0)], 0);
        let mut c = base.clone();
        c.conv1.kernel_h = 4;
        c.conv1.kernel_w = 4;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tasks = vec![TaskSpec::regression("y", 0.0)];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tasks.push(TaskSpec::regression("y", 1.0));
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tasks[0].loss = LossKind::SoftmaxCrossEntropy;
        assert!(c.validate().is_err());
        let mut c = base;
        c.tasks = vec![TaskSpec::classification("c", 1, 1.0)];
        assert!(c.validate().is_err());
    }
}
