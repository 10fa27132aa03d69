//! Heat kernel signature and its histogram summary.
//!
//! For eigenpairs `(lambda_k, phi_k)` of the Laplacian the diagonal heat
//! kernel is `h_z(i, i) = sum_k exp(-lambda_k z) phi_k(i)^2`. Sampling it at
//! `T` log-spaced times gives an `n x T` matrix; binning each time column
//! over `[0, 1]` gives the `B x T` histogram fed to the network.

use serde::{Deserialize, Serialize};

use super::{eig_sym, laplacian, SpectralDecomposition};
use crate::graph::Graph;
use crate::{Error, Exec, Result};

/// Eigenvalues this close below zero are roundoff on a PSD Laplacian.
const NEGATIVE_EIGENVALUE_SLACK: f64 = 1e-10;
/// Histogram inputs may exceed `[0, 1]` by this much before erroring.
const RANGE_SLACK: f64 = 1e-9;
/// Values this close to a bin edge count as lying on it.
const EDGE_SNAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HksConfig {
    pub num_steps: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub num_bins: usize,
}

impl Default for HksConfig {
    fn default() -> Self {
        HksConfig {
            num_steps: 32,
            t_min: (-3.0f64).exp(),
            t_max: 3.0f64.exp(),
            num_bins: 32,
        }
    }
}

impl HksConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_steps < 2 || self.num_bins < 2 {
            return Err(Error::Config(format!(
                "HKS needs at least 2 steps and 2 bins, got T={} B={}",
                self.num_steps, self.num_bins
            )));
        }
        if !(self.t_min > 0.0 && self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::Config(format!(
                "HKS times need 0 < t_min < t_max, got {} and {}",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    /// `num_steps` times, log-spaced from `t_min` to `t_max` inclusive.
    pub fn times(&self) -> Vec<f64> {
        let (lo, hi) = (self.t_min.ln(), self.t_max.ln());
        let last = self.num_steps - 1;
        (0..self.num_steps)
            .map(|j| match j {
                0 => self.t_min,
                j if j == last => self.t_max,
                j => (lo + (hi - lo) * j as f64 / last as f64).exp(),
            })
            .collect()
    }
}

/// `values[i * num_steps + j] = h_{z_j}(i, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HksMatrix {
    pub node_count: usize,
    pub num_steps: usize,
    pub values: Vec<f64>,
}

impl HksMatrix {
    pub fn get(&self, node: usize, step: usize) -> f64 {
        self.values[node * self.num_steps + step]
    }

    pub fn column_sum(&self, step: usize) -> f64 {
        (0..self.node_count).map(|i| self.get(i, step)).sum()
    }
}

/// `values[b * num_steps + j]`: fraction of nodes whose HKS at step `j`
/// falls into bin `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HksHistogram {
    pub num_bins: usize,
    pub num_steps: usize,
    pub values: Vec<f64>,
}

impl HksHistogram {
    pub fn get(&self, bin: usize, step: usize) -> f64 {
        self.values[bin * self.num_steps + step]
    }
}

/// HKS at log-spaced times from `cfg`.
pub fn heat_kernel_signature(g: &Graph, cfg: &HksConfig) -> Result<HksMatrix> {
    cfg.validate()?;
    heat_kernel_signature_at(g, &cfg.times())
}

/// HKS at arbitrary non-negative times.
pub fn heat_kernel_signature_at(g: &Graph, times: &[f64]) -> Result<HksMatrix> {
    if g.node_count() == 0 {
        return Err(Error::Domain("HKS undefined for the empty graph".into()));
    }
    if let Some(z) = times.iter().find(|z| !(**z >= 0.0 && z.is_finite())) {
        return Err(Error::Domain(format!("diffusion time {z} must be finite and >= 0")));
    }
    let decomposition = eig_sym(&laplacian(g))?;
    Ok(signature_from_spectrum(&decomposition, times))
}

fn signature_from_spectrum(d: &SpectralDecomposition, times: &[f64]) -> HksMatrix {
    let n = d.order();
    let steps = times.len();
    let lambdas: Vec<f64> = d
        .eigenvalues
        .iter()
        .map(|&l| if (-NEGATIVE_EIGENVALUE_SLACK..0.0).contains(&l) { 0.0 } else { l })
        .collect();
    let squared: Vec<f64> = d.eigenvectors.iter().map(|x| x * x).collect();
    let mut values = vec![0.0; n * steps];
    let mut decay = vec![0.0; n];
    for (j, &z) in times.iter().enumerate() {
        for (e, &l) in decay.iter_mut().zip(&lambdas) {
            *e = (-l * z).exp();
        }
        for i in 0..n {
            let row = &squared[i * n..(i + 1) * n];
            let h: f64 = row.iter().zip(&decay).map(|(p, e)| p * e).sum();
            // Rows of squared eigenvectors sum to 1 only up to roundoff.
            values[i * steps + j] = h.min(1.0);
        }
    }
    HksMatrix {
        node_count: n,
        num_steps: steps,
        values,
    }
}

/// Per-column histogram of `h` over `num_bins` equal bins on `[0, 1]`,
/// normalized by node count. A value of exactly 1.0 lands in the top bin.
/// Values within rounding distance of an edge `k / B` go to bin `k`, so
/// eigensolver noise cannot move e.g. `1/2` between neighbouring bins.
pub fn hks_histogram(h: &HksMatrix, cfg: &HksConfig) -> Result<HksHistogram> {
    cfg.validate()?;
    if h.num_steps != cfg.num_steps {
        return Err(Error::Shape(format!(
            "HKS has {} steps, config expects {}",
            h.num_steps, cfg.num_steps
        )));
    }
    let bins = cfg.num_bins;
    let steps = h.num_steps;
    let weight = 1.0 / h.node_count as f64;
    let mut values = vec![0.0; bins * steps];
    for i in 0..h.node_count {
        for j in 0..steps {
            let v = h.get(i, j);
            if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&v) {
                return Err(Error::HksOutOfRange {
                    node: i,
                    step: j,
                    value: v,
                });
            }
            let b = bin_index(v.clamp(0.0, 1.0), bins);
            values[b * steps + j] += weight;
        }
    }
    Ok(HksHistogram {
        num_bins: bins,
        num_steps: steps,
        values,
    })
}

fn bin_index(v: f64, bins: usize) -> usize {
    let x = v * bins as f64;
    let edge = x.round();
    let x = if (x - edge).abs() <= EDGE_SNAP * bins as f64 { edge } else { x };
    (x as usize).min(bins - 1)
}

/// Laplacian, eigendecomposition, HKS, histogram.
pub fn featurize(g: &Graph, cfg: &HksConfig) -> Result<HksHistogram> {
    hks_histogram(&heat_kernel_signature(g, cfg)?, cfg)
}

/// [`featurize`] over many graphs, in input order.
pub fn featurize_all(graphs: &[Graph], cfg: &HksConfig, exec: Exec) -> Result<Vec<HksHistogram>> {
    cfg.validate()?;
    exec.try_map(graphs, |g| featurize(g, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_edges_absorb_rounding() {
        assert_eq!(bin_index(0.5, 32), 16);
        assert_eq!(bin_index(0.5 - 1e-15, 32), 16);
        assert_eq!(bin_index(0.5 + 1e-15, 32), 16);
        assert_eq!(bin_index(0.5 - 1e-6, 32), 15);
        assert_eq!(bin_index(1.0 - 1e-15, 32), 31);
        assert_eq!(bin_index(0.0, 4), 0);
        assert_eq!(bin_index(1.0 / 3.0, 3), 1);
    }

    fn cfg(steps: usize, bins: usize) -> HksConfig {
        HksConfig {
            num_steps: steps,
            t_min: 0.01,
            t_max: 10.0,
            num_bins: bins,
        }
    }

    #[test]
    fn times_are_log_spaced_and_inclusive() {
        let t = HksConfig {
            num_steps: 4,
            t_min: 0.001,
            t_max: 1.0,
            num_bins: 2,
        }
        .times();
        assert_eq!(t[0], 0.001);
        assert_eq!(t[3], 1.0);
        assert!((t[1] - 0.01).abs() < 1e-15);
        assert!((t[2] - 0.1).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(1, 4).validate().is_err());
        assert!(cfg(4, 1).validate().is_err());
        let bad = HksConfig { t_min: 0.0, ..cfg(4, 4) };
        assert!(bad.validate().is_err());
        let bad = HksConfig { t_max: 0.001, ..cfg(4, 4) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_node_signature_is_one() {
        let h = heat_kernel_signature(&Graph::empty(1), &cfg(5, 4)).unwrap();
        assert_eq!(h.values, vec![1.0; 5]);
        let s = hks_histogram(&h, &cfg(5, 4)).unwrap();
        for j in 0..5 {
            assert_eq!(s.get(3, j), 1.0);
            assert_eq!((0..3).map(|b| s.get(b, j)).sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn k2_closed_form() {
        let h = heat_kernel_signature_at(&Graph::complete(2), &[1.0]).unwrap();
        let expected = (1.0 + (-2.0f64).exp()) / 2.0;
        assert!((h.get(0, 0) - expected).abs() < 1e-12);
        assert!((h.get(1, 0) - 0.5676676).abs() < 1e-7);
    }

    #[test]
    fn zero_time_trace_is_node_count() {
        let g = Graph::new(6, [(0, 1), (1, 2), (3, 4)]).unwrap();
        let h = heat_kernel_signature_at(&g, &[0.0, 0.5]).unwrap();
        assert!((h.column_sum(0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn vertex_transitive_graph_has_single_bin() {
        let c = cfg(8, 16);
        let s = featurize(&Graph::complete(5), &c).unwrap();
        for j in 0..8 {
            let nonzero: Vec<f64> = (0..16).map(|b| s.get(b, j)).filter(|&x| x > 0.0).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((nonzero[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn p3_two_bins_at_small_time() {
        // Eigenpairs of P3: 0 -> (1,1,1)/sqrt3, 1 -> (1,0,-1)/sqrt2,
        // 3 -> (1,-2,1)/sqrt6. At z = 0.01 the end nodes get
        // 1/3 + e^-0.01/2 + e^-0.03/6 ~ 0.9901 and the middle node
        // 1/3 + 4e^-0.03/6 ~ 0.9803, all in the upper half.
        let c = HksConfig {
            num_steps: 2,
            t_min: 0.01,
            t_max: 0.02,
            num_bins: 2,
        };
        let h = heat_kernel_signature(&Graph::path(3), &c).unwrap();
        let end = 1.0 / 3.0 + (-0.01f64).exp() / 2.0 + (-0.03f64).exp() / 6.0;
        let mid = 1.0 / 3.0 + 4.0 * (-0.03f64).exp() / 6.0;
        assert!((h.get(0, 0) - end).abs() < 1e-12);
        assert!((h.get(1, 0) - mid).abs() < 1e-12);
        let s = hks_histogram(&h, &c).unwrap();
        assert_eq!(s.get(0, 0), 0.0);
        assert!((s.get(1, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_rejects_out_of_range_values() {
        let c = cfg(2, 2);
        let h = HksMatrix {
            node_count: 1,
            num_steps: 2,
            values: vec![0.5, 1.1],
        };
        assert!(matches!(
            hks_histogram(&h, &c),
            Err(Error::HksOutOfRange { node: 0, step: 1, .. })
        ));
        let h = HksMatrix {
            node_count: 1,
            num_steps: 3,
            values: vec![0.5; 3],
        };
        assert!(matches!(hks_histogram(&h, &c), Err(Error::Shape(_))));
    }

    #[test]
    fn featurize_all_matches_single_calls() {
        let graphs = vec![Graph::path(4), Graph::star(6), Graph::complete(3)];
        let c = cfg(6, 8);
        let batch = featurize_all(&graphs, &c, Exec::Parallel).unwrap();
        for (g, s) in graphs.iter().zip(&batch) {
            assert_eq!(&featurize(g, &c).unwrap(), s);
        }
    }
}
