//! Experiment harness: single runs, random hyperparameter search, learning
//! curves and k-fold cross-validation.

mod config;
mod curve;
mod cv;
mod run;
mod search;
mod stats;

pub use config::ExperimentConfig;
pub use curve::{learning_curve, CurveRow, CurveSummary, CurveTable, LearningCurveSpec, Variant, CSV_HEADER};
pub use cv::{cross_validate, CvReport, CvSpec, FoldResult};
pub use run::{run_once, task_specs, Run, RunRecord, SplitMetric};
pub use search::{random_search, SearchReport, SearchSpace, TrialConfig, TrialRecord};
pub use stats::{mean_stderr, MeanStderr};
