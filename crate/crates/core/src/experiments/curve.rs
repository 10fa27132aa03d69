use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{mean_stderr, run_once, ExperimentConfig, MeanStderr, RunRecord};
use crate::data::{split_indices, LabeledDataset, SplitSpec};
use crate::nn::{MetricKind, TaskKind};
use crate::{Error, Exec, Result};

pub const CSV_HEADER: &str = "variant,main_task,train_size,seed,metric_name,metric_value,best_epoch,wall_seconds";
const SUMMARY_HEADER: &str = "variant,main_task,train_size,metric_name,n,mean,stderr";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Main task only.
    Single,
    /// Main task plus auxiliaries on a shared trunk.
    Multi,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Single => "single",
            Variant::Multi => "multi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurveSpec {
    pub main_task: String,
    pub aux_tasks: Vec<String>,
    /// Main-task label budgets, strictly increasing.
    pub sizes: Vec<usize>,
    /// Each seed fixes both the split shuffle and the weight initialization.
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
}

impl LearningCurveSpec {
    /// Both variants, seeds `0..num_seeds`.
    pub fn new(main_task: &str, aux_tasks: &[&str], sizes: Vec<usize>, num_seeds: u64) -> Self {
        LearningCurveSpec {
            main_task: main_task.into(),
            aux_tasks: aux_tasks.iter().map(|s| s.to_string()).collect(),
            sizes,
            seeds: (0..num_seeds).collect(),
            variants: vec![Variant::Single, Variant::Multi],
        }
    }

    fn validate(&self, ds: &LabeledDataset) -> Result<()> {
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("sizes {:?} must be positive and strictly increasing", self.sizes)));
        }
        if self.seeds.is_empty() || self.variants.is_empty() {
            return Err(Error::Config("learning curve needs at least one seed and one variant".into()));
        }
        if self.variants.contains(&Variant::Multi) && self.aux_tasks.is_empty() {
            return Err(Error::Config("multi-task variant needs auxiliary tasks".into()));
        }
        ds.require_task(&self.main_task)?;
        for a in &self.aux_tasks {
            ds.require_task(a)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub variant: Variant,
    pub main_task: String,
    pub train_size: usize,
    pub seed: u64,
    pub metric: MetricKind,
    /// Main-task test metric; absent if the cell failed.
    pub value: Option<f64>,
    pub best_epoch: Option<usize>,
    pub wall_seconds: f64,
    pub error: Option<String>,
    pub record: Option<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub variant: Variant,
    pub train_size: usize,
    pub metric: MetricKind,
    #[serde(flatten)]
    pub stats: MeanStderr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub spec: LearningCurveSpec,
    /// Sorted by variant, size, seed.
    pub rows: Vec<CurveRow>,
    pub summary: Vec<CurveSummary>,
}

impl CurveTable {
    pub fn summary_for(&self, variant: Variant, train_size: usize) -> Option<&CurveSummary> {
        self.summary
            .iter()
            .find(|s| s.variant == variant && s.train_size == train_size)
    }

    pub fn value(&self, variant: Variant, train_size: usize, seed: u64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.train_size == train_size && r.seed == seed)
            .and_then(|r| r.value)
    }

    /// One line per cell. Wall-clock times are left blank unless
    /// `with_time`, keeping the output reproducible byte for byte.
    pub fn to_csv(&self, with_time: bool) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let value = r.value.map(|v| v.to_string()).unwrap_or_default();
            let epoch = r.best_epoch.map(|e| e.to_string()).unwrap_or_default();
            let time = if with_time { format!("{:.3}", r.wall_seconds) } else { String::new() };
            writeln!(
                out,
                "{},{},{},{},{},{value},{epoch},{time}",
                r.variant.name(),
                r.main_task,
                r.train_size,
                r.seed,
                r.metric.name()
            )
            .unwrap();
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for s in &self.summary {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.variant.name(),
                self.spec.main_task,
                s.train_size,
                s.metric.name(),
                s.stats.n,
                s.stats.mean,
                s.stats.stderr
            )
            .unwrap();
        }
        out
    }
}

/// Trains every (variant, size, seed) cell and reports the main-task test
/// metric. For a given size and seed both variants see the same split, the
/// same main-task labels and the same trunk initialization. A failed cell is
/// logged and recorded; the others still run.
pub fn learning_curve(ds: &LabeledDataset, spec: &LearningCurveSpec, cfg: &ExperimentConfig, exec: Exec) -> Result<CurveTable> {
    spec.validate(ds)?;
    cfg.validate()?;
    let metric = match ds.require_task(&spec.main_task)?.kind {
        TaskKind::Regression => MetricKind::Mse,
        TaskKind::Classification { .. } => MetricKind::Accuracy,
    };
    let largest = *spec.sizes.last().unwrap();
    let splits = spec
        .seeds
        .iter()
        .map(|&seed| {
            let s = split_indices(ds.len(), &SplitSpec::with_seed(seed))?;
            if largest > s.train.len() {
                return Err(Error::Data(format!(
                    "size {largest} exceeds train split of {} examples",
                    s.train.len()
                )));
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    let features = ds.featurize(&cfg.hks, exec)?;

    let mut cells = Vec::new();
    for &variant in &spec.variants {
        for &size in &spec.sizes {
            for k in 0..spec.seeds.len() {
                cells.push((variant, size, k));
            }
        }
    }
    let mut rows = exec.map(&cells, |&(variant, size, k)| {
        let seed = spec.seeds[k];
        let aux: &[String] = match variant {
            Variant::Single => &[],
            Variant::Multi => &spec.aux_tasks,
        };
        let outcome = run_once(ds, &features, &splits[k], Some(size), &spec.main_task, aux, cfg, seed, exec);
        let mut row = CurveRow {
            variant,
            main_task: spec.main_task.clone(),
            train_size: size,
            seed,
            metric,
            value: None,
            best_epoch: None,
            wall_seconds: 0.0,
            error: None,
            record: None,
        };
        match outcome {
            Ok(run) => {
                let m = run.record.main_metric("test").expect("main task is always scored");
                log::info!("{} s={size} seed={seed}: test {} = {}", variant.name(), metric.name(), m.value);
                row.value = Some(m.value);
                row.best_epoch = Some(run.record.best_epoch);
                row.wall_seconds = run.record.wall_seconds;
                row.record = Some(run.record);
            }
            Err(e) => {
                log::warn!("{} s={size} seed={seed} failed: {e}", variant.name());
                row.error = Some(e.to_string());
            }
        }
        row
    });
    rows.sort_by_key(|r| (r.variant, r.train_size, r.seed));

    let mut summary = Vec::new();
    for &variant in &spec.variants {
        for &size in &spec.sizes {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.variant == variant && r.train_size == size)
                .filter_map(|r| r.value)
                .collect();
            if let Some(stats) = mean_stderr(&values) {
                summary.push(CurveSummary {
                    variant,
                    train_size: size,
                    metric,
                    stats,
                });
            }
        }
    }
    summary.sort_by_key(|s| (s.variant, s.train_size));
    Ok(CurveTable {
        spec: spec.clone(),
        rows,
        summary,
    })
}
