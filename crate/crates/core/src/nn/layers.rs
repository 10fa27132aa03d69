//! Single-example layer kernels on flat row-major buffers.

use super::config::pool_len;

/// Geometry of a valid, stride-1 convolution.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ConvGeom {
    pub in_ch: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_ch: usize,
    pub k_h: usize,
    pub k_w: usize,
}

impl ConvGeom {
    pub fn out_h(&self) -> usize {
        self.in_h - self.k_h + 1
    }

    pub fn out_w(&self) -> usize {
        self.in_w - self.k_w + 1
    }

    pub fn out_len(&self) -> usize {
        self.out_ch * self.out_h() * self.out_w()
    }
}

/// Convolution followed by ReLU.
pub(crate) fn conv_relu_forward(g: ConvGeom, input: &[f64], weight: &[f64], bias: &[f64]) -> Vec<f64> {
    let (oh, ow) = (g.out_h(), g.out_w());
    let mut out = vec![0.0; g.out_len()];
    for o in 0..g.out_ch {
        let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        plane.iter_mut().for_each(|x| *x = bias[o]);
        for c in 0..g.in_ch {
            let src = &input[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
            for ky in 0..g.k_h {
                for kx in 0..g.k_w {
                    let w = weight[((o * g.in_ch + c) * g.k_h + ky) * g.k_w + kx];
                    for y in 0..oh {
                        let src_row = &src[(y + ky) * g.in_w + kx..(y + ky) * g.in_w + kx + ow];
                        let dst_row = &mut plane[y * ow..(y + 1) * ow];
                        for (d, s) in dst_row.iter_mut().zip(src_row) {
                            *d += w * s;
                        }
                    }
                }
            }
        }
    }
    out.iter_mut().for_each(|x| *x = x.max(0.0));
    out
}

/// Backward through ReLU and convolution. `grad_out` is w.r.t. the
/// post-ReLU output `activated`. Parameter gradients accumulate; the input
/// gradient is returned only when requested.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv_relu_backward(
    g: ConvGeom,
    input: &[f64],
    weight: &[f64],
    activated: &[f64],
    grad_out: &[f64],
    grad_weight: &mut [f64],
    grad_bias: &mut [f64],
    want_input_grad: bool,
) -> Option<Vec<f64>> {
    let (oh, ow) = (g.out_h(), g.out_w());
    let delta: Vec<f64> = grad_out
        .iter()
        .zip(activated)
        .map(|(d, a)| if *a > 0.0 { *d } else { 0.0 })
        .collect();
    let mut grad_input = want_input_grad.then(|| vec![0.0; g.in_ch * g.in_h * g.in_w]);
    for o in 0..g.out_ch {
        let plane = &delta[o * oh * ow..(o + 1) * oh * ow];
        grad_bias[o] += plane.iter().sum::<f64>();
        for c in 0..g.in_ch {
            let src = &input[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
            for ky in 0..g.k_h {
                for kx in 0..g.k_w {
                    let widx = ((o * g.in_ch + c) * g.k_h + ky) * g.k_w + kx;
                    let mut acc = 0.0;
                    for y in 0..oh {
                        let src_row = &src[(y + ky) * g.in_w + kx..(y + ky) * g.in_w + kx + ow];
                        let d_row = &plane[y * ow..(y + 1) * ow];
                        acc += d_row.iter().zip(src_row).map(|(d, s)| d * s).sum::<f64>();
                    }
                    grad_weight[widx] += acc;
                    if let Some(gi) = grad_input.as_mut() {
                        let w = weight[widx];
                        let dst = &mut gi[c * g.in_h * g.in_w..(c + 1) * g.in_h * g.in_w];
                        for y in 0..oh {
                            let d_row = &plane[y * ow..(y + 1) * ow];
                            let dst_row = &mut dst[(y + ky) * g.in_w + kx..(y + ky) * g.in_w + kx + ow];
                            for (t, d) in dst_row.iter_mut().zip(d_row) {
                                *t += w * d;
                            }
                        }
                    }
                }
            }
        }
    }
    grad_input
}

/// 2x2 max pooling with floor division; windows are clipped to the input
/// so a length-1 dimension passes through. Returns the pooled values and
/// the flat input index of each maximum (first in scan order on ties).
pub(crate) fn max_pool_forward(input: &[f64], ch: usize, h: usize, w: usize) -> (Vec<f64>, Vec<usize>) {
    let (ph, pw) = (pool_len(h), pool_len(w));
    let mut out = Vec::with_capacity(ch * ph * pw);
    let mut argmax = Vec::with_capacity(ch * ph * pw);
    for c in 0..ch {
        let base = c * h * w;
        for py in 0..ph {
            for px in 0..pw {
                let mut best_idx = base + 2 * py * w + 2 * px;
                let mut best = input[best_idx];
                for y in 2 * py..(2 * py + 2).min(h) {
                    for x in 2 * px..(2 * px + 2).min(w) {
                        let idx = base + y * w + x;
                        if input[idx] > best {
                            best = input[idx];
                            best_idx = idx;
                        }
                    }
                }
                out.push(best);
                argmax.push(best_idx);
            }
        }
    }
    (out, argmax)
}

pub(crate) fn max_pool_backward(grad_out: &[f64], argmax: &[usize], input_len: usize) -> Vec<f64> {
    let mut grad = vec![0.0; input_len];
    for (g, &idx) in grad_out.iter().zip(argmax) {
        grad[idx] += g;
    }
    grad
}

/// `y = W x + b` with `W` stored `[out, in]`.
pub(crate) fn dense_forward(weight: &[f64], bias: &[f64], x: &[f64]) -> Vec<f64> {
    let n_in = x.len();
    bias.iter()
        .enumerate()
        .map(|(o, b)| {
            b + weight[o * n_in..(o + 1) * n_in]
                .iter()
                .zip(x)
                .map(|(w, xi)| w * xi)
                .sum::<f64>()
        })
        .collect()
}

pub(crate) fn relu_in_place(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Accumulates `dW += gy x^T`, `db += gy` and returns `W^T gy`.
pub(crate) fn dense_backward(
    weight: &[f64],
    x: &[f64],
    grad_y: &[f64],
    grad_weight: &mut [f64],
    grad_bias: &mut [f64],
) -> Vec<f64> {
    let n_in = x.len();
    let mut grad_x = vec![0.0; n_in];
    for (o, &gy) in grad_y.iter().enumerate() {
        if gy == 0.0 {
            continue;
        }
        grad_bias[o] += gy;
        let w_row = &weight[o * n_in..(o + 1) * n_in];
        let gw_row = &mut grad_weight[o * n_in..(o + 1) * n_in];
        for i in 0..n_in {
            gw_row[i] += gy * x[i];
            grad_x[i] += gy * w_row[i];
        }
    }
    grad_x
}

/// Zeroes gradient entries whose post-ReLU activation is not positive.
pub(crate) fn relu_backward_in_place(grad: &mut [f64], activated: &[f64]) {
    for (g, a) in grad.iter_mut().zip(activated) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_identity_kernel() {
        let g = ConvGeom {
            in_ch: 1,
            in_h: 3,
            in_w: 3,
            out_ch: 1,
            k_h: 3,
            k_w: 3,
        };
        let input: Vec<f64> = (1..=9).map(f64::from).collect();
        let mut w = vec![0.0; 9];
        w[4] = 1.0;
        assert_eq!(conv_relu_forward(g, &input, &w, &[0.5]), vec![5.5]);
        assert_eq!(conv_relu_forward(g, &input, &w, &[-6.0]), vec![0.0]);
    }

    #[test]
    fn pool_floor_and_passthrough() {
        // 1 channel, 3x3: floor pooling keeps the top-left 2x2 window.
        let input = vec![1.0, 5.0, 9.0, 2.0, 3.0, 9.0, 9.0, 9.0, 9.0];
        let (out, arg) = max_pool_forward(&input, 1, 3, 3);
        assert_eq!(out, vec![5.0]);
        assert_eq!(arg, vec![1]);
        let (out, arg) = max_pool_forward(&[4.0, 7.0], 2, 1, 1);
        assert_eq!(out, vec![4.0, 7.0]);
        assert_eq!(arg, vec![0, 1]);
        // 1 x 4 row pools pairwise along the width only.
        let (out, _) = max_pool_forward(&[1.0, 3.0, 2.0, 0.0], 1, 1, 4);
        assert_eq!(out, vec![3.0, 2.0]);
        assert_eq!(max_pool_backward(&[1.0], &[1], 9)[1], 1.0);
    }

    #[test]
    fn dense_round_trip() {
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = dense_forward(&w, &[0.5, -0.5], &[1.0, 0.0, -1.0]);
        assert_eq!(y, vec![-1.5, -2.5]);
        let mut gw = [0.0; 6];
        let mut gb = [0.0; 2];
        let gx = dense_backward(&w, &[1.0, 0.0, -1.0], &[1.0, 2.0], &mut gw, &mut gb);
        assert_eq!(gx, vec![9.0, 12.0, 15.0]);
        assert_eq!(gw, [1.0, 0.0, -1.0, 2.0, 0.0, -2.0]);
        assert_eq!(gb, [1.0, 2.0]);
    }
}
