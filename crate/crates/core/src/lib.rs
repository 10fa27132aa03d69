//! Multi-task knowledge distillation for graph-level prediction.
//!
//! The pipeline turns each graph into a histogram of its heat kernel
//! signature, feeds it to a small convolutional trunk shared by several
//! tasks, and trains cheap network-theory metrics (density, diameter) as
//! auxiliary heads next to the main prediction task.
//!
//! Modules, bottom-up:
//!
//! * [`graph`]: simple undirected graphs, random generators and metrics.
//! * [`spectral`]: Laplacian, Jacobi eigensolver, heat kernel signature.
//! * [`nn`]: from-scratch CNN trunk with per-task heads, masked loss, Adam.
//! * [`data`]: labeled datasets, TU benchmark parser, splits and folds.
//! * [`experiments`]: random search, learning curves, cross validation.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! disabled every loop runs sequentially and results are bit-identical.

pub mod data;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod graph;
pub mod nn;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
pub use graph::Graph;
