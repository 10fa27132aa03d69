//! Random graph models used for the synthetic corpora.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::{Error, Result};

/// Poisson (Erdős–Rényi) random graphs with a normally distributed node
/// count and link probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    pub n_mean: f64,
    pub n_std: f64,
    pub n_min: usize,
    pub p_mean: f64,
    pub p_std: f64,
    pub p_min: f64,
}

impl Default for ErParams {
    fn default() -> Self {
        ErParams {
            n_mean: 30.0,
            n_std: 10.0,
            n_min: 5,
            p_mean: 0.3,
            p_std: 0.12,
            p_min: 0.05,
        }
    }
}

impl ErParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 {
            return Err(Error::Config("ER n_min must be at least 1".into()));
        }
        if !(self.p_min > 0.0 && self.p_min <= 1.0) {
            return Err(Error::Config(format!("ER p_min {} not in (0, 1]", self.p_min)));
        }
        if !(self.n_std >= 0.0 && self.p_std >= 0.0) || !self.n_mean.is_finite() || !self.p_mean.is_finite() {
            return Err(Error::Config("ER distribution parameters must be finite, std >= 0".into()));
        }
        Ok(())
    }
}

/// Preferential-attachment (Barabási–Albert) graphs with a normally
/// distributed node count and per-node attachment count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaParams {
    pub n_mean: f64,
    pub n_std: f64,
    pub n_min: usize,
    pub k_mean: f64,
    pub k_std: f64,
    pub k_min: usize,
    /// Attachment count is capped at `n - k_max_offset`.
    pub k_max_offset: usize,
}

impl Default for BaParams {
    fn default() -> Self {
        BaParams {
            n_mean: 30.0,
            n_std: 10.0,
            n_min: 5,
            k_mean: 6.0,
            k_std: 2.0,
            k_min: 2,
            k_max_offset: 3,
        }
    }
}

impl BaParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 1 || self.n_min < 1 {
            return Err(Error::Config("BA k_min and n_min must be at least 1".into()));
        }
        if !(self.n_std >= 0.0 && self.k_std >= 0.0) || !self.n_mean.is_finite() || !self.k_mean.is_finite() {
            return Err(Error::Config("BA distribution parameters must be finite, std >= 0".into()));
        }
        Ok(())
    }
}

fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, std: f64) -> f64 {
    Normal::new(mean, std)
        .expect("validated normal parameters")
        .sample(rng)
}

fn sample_rounded<R: Rng + ?Sized>(rng: &mut R, mean: f64, std: f64, min: usize) -> usize {
    let x = sample_normal(rng, mean, std).round();
    if x < min as f64 {
        min
    } else {
        x as usize
    }
}

/// Draws `n` and `p` from `params`, then an ER graph.
pub fn generate_er<R: Rng + ?Sized>(params: &ErParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let n = sample_rounded(rng, params.n_mean, params.n_std, params.n_min);
    let p = sample_normal(rng, params.p_mean, params.p_std).max(params.p_min).min(1.0);
    Ok(er_graph(n, p, rng))
}

/// G(n, p): each of the `n(n-1)/2` pairs is present independently with
/// probability `p`.
pub fn er_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let p = p.clamp(0.0, 1.0);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_sorted_unique(n, edges)
}

/// Draws `n` and `k` from `params`, then a BA graph.
///
/// `k` is clamped to `[k_min, n - k_max_offset]` and finally to `n - 1` so
/// that small graphs remain constructible.
pub fn generate_ba<R: Rng + ?Sized>(params: &BaParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let n = sample_rounded(rng, params.n_mean, params.n_std, params.n_min);
    let k_raw = sample_normal(rng, params.k_mean, params.k_std).round();
    let k_cap = n.saturating_sub(params.k_max_offset);
    let mut k = if k_raw < 0.0 { 0 } else { k_raw as usize };
    k = k.min(k_cap).max(params.k_min).min(n.saturating_sub(1)).max(1.min(n));
    Ok(ba_graph(n, k, rng))
}

/// Preferential attachment with a `k`-clique seed.
///
/// Nodes `k..n` each attach to `k` distinct earlier nodes, drawn one at a
/// time with probability proportional to their degree before the new node
/// arrived, without replacement. The result has exactly
/// `k(k-1)/2 + k(n-k)` edges. Requires `k <= n`.
pub fn ba_graph<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Graph {
    assert!(k <= n, "attachment count {k} exceeds node count {n}");
    let mut edges: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let mut degree = vec![0usize; n];
    for d in degree.iter_mut().take(k) {
        *d = k - 1;
    }
    let mut candidates: Vec<usize> = Vec::with_capacity(n);
    let mut weights: Vec<f64> = Vec::with_capacity(n);
    for v in k..n {
        candidates.clear();
        candidates.extend(0..v);
        weights.clear();
        weights.extend(candidates.iter().map(|&u| degree[u] as f64));
        for _ in 0..k {
            let total: f64 = weights.iter().sum();
            let pick = if total > 0.0 {
                let target = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut idx = weights.len() - 1;
                for (i, &w) in weights.iter().enumerate() {
                    acc += w;
                    if target < acc {
                        idx = i;
                        break;
                    }
                }
                // A zero-weight tail must never be selected by roundoff.
                while weights[idx] == 0.0 {
                    idx -= 1;
                }
                idx
            } else {
                rng.random_range(0..candidates.len())
            };
            let u = candidates.swap_remove(pick);
            weights.swap_remove(pick);
            edges.push((u, v));
        }
        for &(u, w) in &edges[edges.len() - k..] {
            degree[u] += 1;
            degree[w] += 1;
        }
    }
    edges.sort_unstable();
    Graph::from_sorted_unique(n, edges)
}
