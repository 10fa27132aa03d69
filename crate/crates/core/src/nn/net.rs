//! Shared convolutional trunk with one dense head per task.
//!
//! trunk: conv(k1)+ReLU+pool -> conv(k2)+ReLU+pool -> flatten -> dense+ReLU
//! head:  dense+ReLU -> linear output (1 unit, or one logit per class)
//!
//! Parameters live in one flat list so the optimizer, gradient checks and
//! checkpoints can treat them uniformly:
//!
//! | index      | tensor                         |
//! |------------|--------------------------------|
//! | 0, 1       | conv1 weight `[F1,1,k,k]`, bias |
//! | 2, 3       | conv2 weight `[F2,F1,k,k]`, bias|
//! | 4, 5       | shared dense weight, bias       |
//! | 6 + 4t ... | head `t`: hidden w, b; out w, b |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::batch::Batch;
use super::config::{NetConfig, TaskKind, TaskSpec};
use super::layers::{
    conv_relu_backward, conv_relu_forward, dense_backward, dense_forward, max_pool_backward,
    max_pool_forward, relu_backward_in_place, relu_in_place, ConvGeom,
};
use super::loss::example_loss;
use super::tensor::Tensor;
use crate::{Error, Exec, Result};

const CONV1_W: usize = 0;
const CONV1_B: usize = 1;
const CONV2_W: usize = 2;
const CONV2_B: usize = 3;
const FC_W: usize = 4;
const FC_B: usize = 5;
const HEAD_BASE: usize = 6;
const PARAMS_PER_HEAD: usize = 4;

/// Examples per gradient-accumulation chunk. Chunks are reduced in index
/// order, so sequential and parallel runs agree bit for bit.
pub const GRADIENT_CHUNK: usize = 8;

/// Affine map between a regression task's label units and the
/// standardized units the head is trained in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaler {
    pub const IDENTITY: TargetScaler = TargetScaler { mean: 0.0, std: 1.0 };

    /// Mean and population standard deviation; a degenerate spread maps to 1.
    pub fn fit(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::IDENTITY;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        TargetScaler {
            mean,
            std: if std > 1e-12 && std.is_finite() { std } else { 1.0 },
        }
    }

    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn restore(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

/// One gradient tensor per parameter tensor, same order and shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Tensor>);

impl Gradients {
    pub fn zeros_like(params: &[Tensor]) -> Self {
        Gradients(params.iter().map(|p| Tensor::zeros(p.shape())).collect())
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.add_assign(b);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(Tensor::is_finite)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|t| t.data().iter())
            .fold(0.0, |m, x| m.max(x.abs()))
    }
}

struct Trace {
    a1: Vec<f64>,
    p1: Vec<f64>,
    arg1: Vec<usize>,
    a2: Vec<f64>,
    p2: Vec<f64>,
    arg2: Vec<usize>,
    shared: Vec<f64>,
    hidden: Vec<Option<Vec<f64>>>,
    out: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct MultiTaskNet {
    config: NetConfig,
    names: Vec<String>,
    params: Vec<Tensor>,
    scalers: Vec<TargetScaler>,
    adam: AdamState,
}

fn glorot(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| limit * (2.0 * rng.random::<f64>() - 1.0)).collect();
    Tensor::from_vec(shape, data).expect("shape product matches")
}

impl MultiTaskNet {
    /// Fresh network. The trunk and each head draw their initial weights
    /// from separate streams of the seeded generator, so head `t` starts the
    /// same no matter which other tasks are present.
    pub fn new(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let mut names = Vec::new();
        let mut params = Vec::new();
        let c1 = config.conv1;
        let c2 = config.conv2;
        let flat = config.flattened_len();
        let fc = config.fc_shared_units;
        let hu = config.head_units;

        let mut trunk_rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        trunk_rng.set_stream(0);
        let mut push = |name: String, t: Tensor| {
            names.push(name);
            params.push(t);
        };
        push(
            "trunk.conv1.weight".into(),
            glorot(&mut trunk_rng, &[c1.filters, 1, c1.kernel_h, c1.kernel_w], c1.kernel_h * c1.kernel_w, c1.filters * c1.kernel_h * c1.kernel_w),
        );
        push("trunk.conv1.bias".into(), Tensor::zeros(&[c1.filters]));
        push(
            "trunk.conv2.weight".into(),
            glorot(
                &mut trunk_rng,
                &[c2.filters, c1.filters, c2.kernel_h, c2.kernel_w],
                c1.filters * c2.kernel_h * c2.kernel_w,
                c2.filters * c2.kernel_h * c2.kernel_w,
            ),
        );
        push("trunk.conv2.bias".into(), Tensor::zeros(&[c2.filters]));
        push("trunk.fc.weight".into(), glorot(&mut trunk_rng, &[fc, flat], flat, fc));
        push("trunk.fc.bias".into(), Tensor::zeros(&[fc]));
        for (t, task) in config.tasks.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(1 + t as u64);
            let o = task.output_units();
            push(format!("head.{}.hidden.weight", task.name), glorot(&mut rng, &[hu, fc], fc, hu));
            push(format!("head.{}.hidden.bias", task.name), Tensor::zeros(&[hu]));
            push(format!("head.{}.out.weight", task.name), glorot(&mut rng, &[o, hu], hu, o));
            push(format!("head.{}.out.bias", task.name), Tensor::zeros(&[o]));
        }
        let adam = AdamState::new(&params);
        let scalers = vec![TargetScaler::IDENTITY; config.tasks.len()];
        Ok(MultiTaskNet {
            config,
            names,
            params,
            scalers,
            adam,
        })
    }

    /// Rebuilds a network from stored parameters (checkpoint loading).
    pub fn from_parts(config: NetConfig, params: Vec<Tensor>, scalers: Vec<TargetScaler>) -> Result<Self> {
        let mut net = MultiTaskNet::new(config)?;
        if params.len() != net.params.len() || scalers.len() != net.scalers.len() {
            return Err(Error::Shape(format!(
                "expected {} tensors and {} scalers, got {} and {}",
                net.params.len(),
                net.scalers.len(),
                params.len(),
                scalers.len()
            )));
        }
        for ((slot, p), name) in net.params.iter_mut().zip(params).zip(&net.names) {
            if slot.shape() != p.shape() {
                return Err(Error::Shape(format!(
                    "{name}: expected {:?}, got {:?}",
                    slot.shape(),
                    p.shape()
                )));
            }
            if !p.is_finite() {
                return Err(Error::NonFinite(name.clone()));
            }
            *slot = p;
        }
        net.scalers = scalers;
        Ok(net)
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.config.tasks
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[Tensor] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn num_parameters(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn scalers(&self) -> &[TargetScaler] {
        &self.scalers
    }

    pub fn set_scalers(&mut self, scalers: Vec<TargetScaler>) -> Result<()> {
        if scalers.len() != self.config.tasks.len() {
            return Err(Error::Shape(format!(
                "{} scalers for {} tasks",
                scalers.len(),
                self.config.tasks.len()
            )));
        }
        self.scalers = scalers;
        Ok(())
    }

    /// Indices of the parameter tensors owned by head `task`.
    pub fn head_param_range(&self, task: usize) -> std::ops::Range<usize> {
        let start = HEAD_BASE + PARAMS_PER_HEAD * task;
        start..start + PARAMS_PER_HEAD
    }

    pub fn adam_step_count(&self) -> u64 {
        self.adam.step()
    }

    /// One Adam update with the default hyperparameters in `cfg`.
    pub fn adam_step(&mut self, grads: &Gradients, cfg: &AdamConfig) -> Result<()> {
        if grads.0.len() != self.params.len()
            || grads.0.iter().zip(&self.params).any(|(g, p)| g.shape() != p.shape())
        {
            return Err(Error::Shape("gradient set does not match parameters".into()));
        }
        self.adam.update(&mut self.params, grads, cfg);
        Ok(())
    }

    fn conv1_geom(&self) -> ConvGeom {
        ConvGeom {
            in_ch: 1,
            in_h: self.config.input_bins,
            in_w: self.config.input_steps,
            out_ch: self.config.conv1.filters,
            k_h: self.config.conv1.kernel_h,
            k_w: self.config.conv1.kernel_w,
        }
    }

    fn conv2_geom(&self) -> ConvGeom {
        let g1 = self.conv1_geom();
        ConvGeom {
            in_ch: g1.out_ch,
            in_h: super::config::pool_len(g1.out_h()),
            in_w: super::config::pool_len(g1.out_w()),
            out_ch: self.config.conv2.filters,
            k_h: self.config.conv2.kernel_h,
            k_w: self.config.conv2.kernel_w,
        }
    }

    fn head_forward(&self, t: usize, shared: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let base = HEAD_BASE + PARAMS_PER_HEAD * t;
        let mut hidden = dense_forward(self.params[base].data(), self.params[base + 1].data(), shared);
        relu_in_place(&mut hidden);
        let out = dense_forward(self.params[base + 2].data(), self.params[base + 3].data(), &hidden);
        (hidden, out)
    }

    fn forward_trace(&self, x: &[f64], active: &[bool]) -> Trace {
        let g1 = self.conv1_geom();
        let g2 = self.conv2_geom();
        let a1 = conv_relu_forward(g1, x, self.params[CONV1_W].data(), self.params[CONV1_B].data());
        let (p1, arg1) = max_pool_forward(&a1, g1.out_ch, g1.out_h(), g1.out_w());
        let a2 = conv_relu_forward(g2, &p1, self.params[CONV2_W].data(), self.params[CONV2_B].data());
        let (p2, arg2) = max_pool_forward(&a2, g2.out_ch, g2.out_h(), g2.out_w());
        let mut shared = dense_forward(self.params[FC_W].data(), self.params[FC_B].data(), &p2);
        relu_in_place(&mut shared);
        let mut hidden = Vec::with_capacity(active.len());
        let mut out = Vec::with_capacity(active.len());
        for (t, &on) in active.iter().enumerate() {
            if on {
                let (h, o) = self.head_forward(t, &shared);
                hidden.push(Some(h));
                out.push(Some(o));
            } else {
                hidden.push(None);
                out.push(None);
            }
        }
        Trace {
            a1,
            p1,
            arg1,
            a2,
            p2,
            arg2,
            shared,
            hidden,
            out,
        }
    }

    /// Backpropagates per-task output gradients of one example into `grads`.
    fn backward_trace(&self, x: &[f64], trace: &Trace, grad_out: &[Option<Vec<f64>>], grads: &mut Gradients) {
        let mut grad_shared = vec![0.0; trace.shared.len()];
        let mut any = false;
        for (t, g) in grad_out.iter().enumerate() {
            let Some(g_out) = g else { continue };
            let hidden = trace.hidden[t].as_ref().expect("active head has a trace");
            let base = HEAD_BASE + PARAMS_PER_HEAD * t;
            let (gw, rest) = grads.0[base + 2..].split_at_mut(1);
            let mut g_hidden = dense_backward(self.params[base + 2].data(), hidden, g_out, gw[0].data_mut(), rest[0].data_mut());
            relu_backward_in_place(&mut g_hidden, hidden);
            let (gw, rest) = grads.0[base..].split_at_mut(1);
            let g_sh = dense_backward(self.params[base].data(), &trace.shared, &g_hidden, gw[0].data_mut(), rest[0].data_mut());
            for (a, b) in grad_shared.iter_mut().zip(&g_sh) {
                *a += b;
            }
            any = true;
        }
        if !any {
            return;
        }
        relu_backward_in_place(&mut grad_shared, &trace.shared);
        let (gw, rest) = grads.0[FC_W..].split_at_mut(1);
        let g_p2 = dense_backward(self.params[FC_W].data(), &trace.p2, &grad_shared, gw[0].data_mut(), rest[0].data_mut());
        let g2 = self.conv2_geom();
        let g_a2 = max_pool_backward(&g_p2, &trace.arg2, trace.a2.len());
        let (gw, rest) = grads.0[CONV2_W..].split_at_mut(1);
        let g_p1 = conv_relu_backward(
            g2,
            &trace.p1,
            self.params[CONV2_W].data(),
            &trace.a2,
            &g_a2,
            gw[0].data_mut(),
            rest[0].data_mut(),
            true,
        )
        .expect("input gradient requested");
        let g1 = self.conv1_geom();
        let g_a1 = max_pool_backward(&g_p1, &trace.arg1, trace.a1.len());
        let (gw, rest) = grads.0[CONV1_W..].split_at_mut(1);
        conv_relu_backward(g1, x, self.params[CONV1_W].data(), &trace.a1, &g_a1, gw[0].data_mut(), rest[0].data_mut(), false);
    }

    fn check_inputs(&self, inputs: &Tensor) -> Result<usize> {
        let c = &self.config;
        let shape = inputs.shape();
        if shape.len() != 4 || shape[1] != 1 || shape[2] != c.input_bins || shape[3] != c.input_steps {
            return Err(Error::Shape(format!(
                "expected [batch, 1, {}, {}] input, got {shape:?}",
                c.input_bins, c.input_steps
            )));
        }
        Ok(shape[0])
    }

    /// Raw head outputs, one `[batch, units]` tensor per task. Regression
    /// outputs are in standardized units; see [`MultiTaskNet::predict`].
    pub fn forward(&self, inputs: &Tensor) -> Result<Vec<Tensor>> {
        self.forward_with(inputs, Exec::Sequential)
    }

    pub fn forward_with(&self, inputs: &Tensor, exec: Exec) -> Result<Vec<Tensor>> {
        let batch = self.check_inputs(inputs)?;
        let active = vec![true; self.config.tasks.len()];
        let rows = exec.map_range(batch, |i| {
            let trace = self.forward_trace(inputs.row(i), &active);
            trace.out.into_iter().map(|o| o.expect("all heads active")).collect::<Vec<_>>()
        });
        self.config
            .tasks
            .iter()
            .enumerate()
            .map(|(t, task)| {
                let units = task.output_units();
                let data = rows.iter().flat_map(|r| r[t].iter().copied()).collect();
                Tensor::from_vec(&[batch, units], data)
            })
            .collect()
    }

    /// Outputs for one flat `B*T` input in label units: the de-standardized
    /// value for regression tasks, logits for classification tasks.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        if input.len() != self.config.input_len() {
            return Err(Error::Shape(format!(
                "input has {} values, expected {}",
                input.len(),
                self.config.input_len()
            )));
        }
        let active = vec![true; self.config.tasks.len()];
        let trace = self.forward_trace(input, &active);
        Ok(trace
            .out
            .into_iter()
            .zip(&self.config.tasks)
            .zip(&self.scalers)
            .map(|((o, task), s)| {
                let o = o.expect("all heads active");
                match task.kind {
                    TaskKind::Regression => vec![s.restore(o[0])],
                    TaskKind::Classification { .. } => o,
                }
            })
            .collect())
    }

    /// Weighted multi-task loss of `batch` and its exact gradient.
    ///
    /// Tasks with zero weight are neither evaluated nor differentiated.
    /// Per-example work is grouped in chunks of [`GRADIENT_CHUNK`] that may
    /// run in parallel; chunk results are summed in order.
    pub fn loss_and_gradients(&self, batch: &Batch, exec: Exec) -> Result<(f64, Gradients)> {
        let n = self.check_inputs(&batch.inputs)?;
        batch.validate(&self.config.tasks)?;
        let tasks = &self.config.tasks;
        let counts = batch.label_counts();
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::Data("batch has no labels for any task".into()));
        }
        let active: Vec<bool> = tasks
            .iter()
            .zip(&counts)
            .map(|(t, &c)| t.weight > 0.0 && c > 0)
            .collect();
        let scale: Vec<f64> = tasks
            .iter()
            .zip(&counts)
            .map(|(t, &c)| if c > 0 { t.weight / c as f64 } else { 0.0 })
            .collect();

        let chunks = n.div_ceil(GRADIENT_CHUNK);
        let partials = exec.map_range(chunks, |c| {
            let mut grads = Gradients::zeros_like(&self.params);
            let mut task_sums = vec![0.0; tasks.len()];
            for i in c * GRADIENT_CHUNK..((c + 1) * GRADIENT_CHUNK).min(n) {
                let x = batch.inputs.row(i);
                let trace = self.forward_trace(x, &active);
                let mut grad_out: Vec<Option<Vec<f64>>> = vec![None; tasks.len()];
                for (t, task) in tasks.iter().enumerate() {
                    if !active[t] || !batch.labels[t].mask[i] {
                        continue;
                    }
                    let out = trace.out[t].as_ref().expect("active head has output");
                    let (l, mut g) = example_loss(task, out, batch.labels[t].values[i]);
                    task_sums[t] += l;
                    g.iter_mut().for_each(|v| *v *= scale[t]);
                    grad_out[t] = Some(g);
                }
                self.backward_trace(x, &trace, &grad_out, &mut grads);
            }
            (task_sums, grads)
        });

        let mut grads = Gradients::zeros_like(&self.params);
        let mut task_sums = vec![0.0; tasks.len()];
        for (sums, g) in &partials {
            grads.add_assign(g);
            for (a, b) in task_sums.iter_mut().zip(sums) {
                *a += b;
            }
        }
        let loss: f64 = task_sums
            .iter()
            .zip(&scale)
            .zip(&active)
            .filter(|(_, &on)| on)
            .map(|((s, k), _)| s * k)
            .sum();
        if !loss.is_finite() || !grads.is_finite() {
            return Err(Error::NonFinite("loss or gradient".into()));
        }
        Ok((loss, grads))
    }
}

impl MultiTaskNet {
    /// Head outputs for one flat input, regression heads in standardized
    /// units.
    pub(crate) fn raw_outputs(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let active = vec![true; self.config.tasks.len()];
        self.forward_trace(input, &active)
            .out
            .into_iter()
            .map(|o| o.expect("all heads active"))
            .collect()
    }
}
