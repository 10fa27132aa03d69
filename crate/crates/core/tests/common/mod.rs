//! Test-only oracles, independent of the code paths they check.
#![allow(dead_code, clippy::needless_range_loop)]

use graphdistill::graph::Graph;
use graphdistill::nn::{multitask_loss, Batch, MultiTaskNet, TaskLabels, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All-pairs hop distances by Floyd–Warshall on the adjacency matrix.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if i != j && g.has_edge(i, j) {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Diameter of the largest component (ties: smallest member) from the
/// distance matrix alone.
pub fn brute_force_diameter(g: &Graph) -> usize {
    let d = floyd_warshall(g);
    let n = g.node_count();
    let mut best_size = 0;
    let mut best_members: Vec<usize> = Vec::new();
    let mut assigned = vec![false; n];
    for s in 0..n {
        if assigned[s] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&t| d[s][t].is_some()).collect();
        for &m in &members {
            assigned[m] = true;
        }
        if members.len() > best_size {
            best_size = members.len();
            best_members = members;
        }
    }
    let mut diam = 0;
    for &a in &best_members {
        for &b in &best_members {
            diam = diam.max(d[a][b].unwrap());
        }
    }
    diam
}

/// Density from counting the adjacency matrix.
pub fn brute_force_density(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut ones = 0usize;
    for i in 0..n {
        for j in 0..n {
            if i != j && g.has_edge(i, j) {
                ones += 1;
            }
        }
    }
    ones as f64 / (n * (n - 1)) as f64
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(2..=max_n);
    let p: f64 = rng.random_range(0.05..0.7);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Loss via forward + multitask_loss, the path independent of backprop.
pub fn loss_by_forward(net: &MultiTaskNet, batch: &Batch) -> f64 {
    let outputs = net.forward(&batch.inputs).unwrap();
    multitask_loss(&outputs, batch, net.tasks()).unwrap()
}

/// Largest relative discrepancy between the analytic gradient and central
/// differences over every parameter, with `|a - n| / max(|a|, |n|, floor)`.
pub fn max_gradient_error(net: &MultiTaskNet, batch: &Batch, step: f64, floor: f64) -> f64 {
    let (_, grads) = net
        .loss_and_gradients(batch, graphdistill::Exec::Sequential)
        .unwrap();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for p in 0..net.params().len() {
        for i in 0..net.params()[p].len() {
            let orig = net.params()[p].data()[i];
            probe.params_mut()[p].data_mut()[i] = orig + step;
            let up = loss_by_forward(&probe, batch);
            probe.params_mut()[p].data_mut()[i] = orig - step;
            let down = loss_by_forward(&probe, batch);
            probe.params_mut()[p].data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * step);
            let analytic = grads.0[p].data()[i];
            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
            worst = worst.max(err);
        }
    }
    worst
}

/// Batch with uniform random inputs and random labels per task.
pub fn random_batch(net: &MultiTaskNet, rows: usize, seed: u64) -> Batch {
    let mut rng = seeded(seed);
    let cfg = net.config();
    let data = (0..rows * cfg.input_len()).map(|_| rng.random::<f64>()).collect();
    let inputs = Tensor::from_vec(&[rows, 1, cfg.input_bins, cfg.input_steps], data).unwrap();
    let labels = cfg
        .tasks
        .iter()
        .map(|t| {
            let units = t.output_units();
            let values = (0..rows)
                .map(|_| {
                    if t.is_regression() {
                        rng.random_range(-2.0..2.0)
                    } else {
                        rng.random_range(0..units) as f64
                    }
                })
                .collect();
            TaskLabels {
                values,
                mask: vec![true; rows],
            }
        })
        .collect();
    Batch { inputs, labels }
}

/// Moves zero-initialized biases off zero so that no ReLU sits exactly on
/// its kink, where central differences see a one-sided slope.
pub fn jitter_biases(net: &mut MultiTaskNet, seed: u64) {
    let mut rng = seeded(seed);
    let names = net.param_names().to_vec();
    for (name, p) in names.iter().zip(net.params_mut()) {
        if name.ends_with("bias") {
            p.data_mut().iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
        }
    }
}
