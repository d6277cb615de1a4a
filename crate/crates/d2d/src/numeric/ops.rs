//! Layer primitives: affine transforms, activations, dropout, and the
//! reparameterized Gaussian sample.
//!
//! Forward ops take matrices whose rows are samples. Backward ops accumulate
//! into the owning [`ParamBlock`]'s gradient buffers and return the gradient
//! with respect to the op's input, so stacks can be chained by hand.

use crate::error::{Error, Result};
use crate::numeric::{Matrix, SeededRng};

/// One affine layer's parameters, gradients, and optimizer moments.
///
/// `weight` is `out x in`; a forward pass computes `x * weight^T + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub name: String,
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub grad_weight: Matrix,
    pub grad_bias: Vec<f64>,
    pub opt_state: AdamState,
}

/// Per-parameter first/second moment estimates, zeroed until the first step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub m_weight: Vec<f64>,
    pub v_weight: Vec<f64>,
    pub m_bias: Vec<f64>,
    pub v_bias: Vec<f64>,
    pub step: u64,
}

impl ParamBlock {
    /// Glorot-style scaled uniform init, seeded.
    pub fn glorot(name: impl Into<String>, out_dim: usize, in_dim: usize, rng: &mut SeededRng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let mut weight = Matrix::zeros(out_dim, in_dim);
        for v in weight.data_mut() {
            *v = rng.uniform_symmetric(limit);
        }
        ParamBlock::with_weight(name, weight, vec![0.0; out_dim])
    }

    pub fn zeros(name: impl Into<String>, out_dim: usize, in_dim: usize) -> Self {
        ParamBlock::with_weight(name, Matrix::zeros(out_dim, in_dim), vec![0.0; out_dim])
    }

    pub fn with_weight(name: impl Into<String>, weight: Matrix, bias: Vec<f64>) -> Self {
        let (out_dim, in_dim) = weight.shape();
        assert_eq!(bias.len(), out_dim, "bias length must match weight rows");
        let n_w = out_dim * in_dim;
        ParamBlock {
            name: name.into(),
            grad_weight: Matrix::zeros(out_dim, in_dim),
            grad_bias: vec![0.0; out_dim],
            opt_state: AdamState {
                m_weight: vec![0.0; n_w],
                v_weight: vec![0.0; n_w],
                m_bias: vec![0.0; out_dim],
                v_bias: vec![0.0; out_dim],
                step: 0,
            },
            weight,
            bias,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn n_params(&self) -> usize {
        self.weight.rows() * self.weight.cols() + self.bias.len()
    }

    pub fn zero_grads(&mut self) {
        self.grad_weight.fill(0.0);
        self.grad_bias.fill(0.0);
    }
}

/// `x * W^T + b`, bias broadcast per row.
pub fn affine_forward(x: &Matrix, p: &ParamBlock) -> Result<Matrix> {
    if x.cols() != p.in_dim() {
        return Err(Error::Shape {
            op: "affine_forward",
            left: x.shape(),
            right: p.weight.shape(),
        });
    }
    let mut out = x.matmul_transpose(&p.weight)?;
    for r in 0..out.rows() {
        for (o, b) in out.row_mut(r).iter_mut().zip(&p.bias) {
            *o += b;
        }
    }
    Ok(out)
}

/// Backward of [`affine_forward`]: accumulates `dL/dW` and `dL/db` into `p`
/// and returns `dL/dx`.
pub fn affine_backward(x: &Matrix, p: &mut ParamBlock, grad_out: &Matrix) -> Result<Matrix> {
    if grad_out.cols() != p.out_dim() || grad_out.rows() != x.rows() {
        return Err(Error::Shape {
            op: "affine_backward",
            left: grad_out.shape(),
            right: p.weight.shape(),
        });
    }
    // dW[o][i] += sum_r grad_out[r][o] * x[r][i]
    for r in 0..x.rows() {
        let xr = x.row(r);
        let gr = grad_out.row(r);
        for (o, &g) in gr.iter().enumerate() {
            p.grad_bias[o] += g;
            if g == 0.0 {
                continue;
            }
            let wrow = p.grad_weight.row_mut(o);
            for (wi, xi) in wrow.iter_mut().zip(xr) {
                *wi = g.mul_add(*xi, *wi);
            }
        }
    }
    // dL/dx = grad_out * W
    grad_out.matmul(&p.weight)
}

/// Elementwise `max(x, slope * x)`.
pub fn leaky_relu(x: &Matrix, slope: f64) -> Matrix {
    debug_assert!(slope > 0.0 && slope < 1.0);
    x.map(|v| if v > 0.0 { v } else { slope * v })
}

/// Backward of [`leaky_relu`] given the pre-activation input.
pub fn leaky_relu_backward(pre: &Matrix, slope: f64, grad_out: &Matrix) -> Matrix {
    let mut g = grad_out.clone();
    for (gv, pv) in g.data_mut().iter_mut().zip(pre.data()) {
        if *pv <= 0.0 {
            *gv *= slope;
        }
    }
    g
}

pub fn tanh_forward(x: &Matrix) -> Matrix {
    x.map(f64::tanh)
}

/// Backward of [`tanh_forward`] given the forward output.
pub fn tanh_backward(out: &Matrix, grad_out: &Matrix) -> Matrix {
    let mut g = grad_out.clone();
    for (gv, ov) in g.data_mut().iter_mut().zip(out.data()) {
        *gv *= 1.0 - ov * ov;
    }
    g
}

pub fn sigmoid(x: &Matrix) -> Matrix {
    x.map(|v| 1.0 / (1.0 + (-v).exp()))
}

/// Backward of [`sigmoid`] given the forward output.
pub fn sigmoid_backward(out: &Matrix, grad_out: &Matrix) -> Matrix {
    let mut g = grad_out.clone();
    for (gv, ov) in g.data_mut().iter_mut().zip(out.data()) {
        *gv *= ov * (1.0 - ov);
    }
    g
}

/// Numerically safe softmax over one vector (max-subtracted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "softmax of empty vector");
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Row-wise softmax.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let sm = softmax(row);
        row.copy_from_slice(&sm);
    }
    out
}

/// Backward of [`softmax_rows`]: given the softmax output `p` and `dL/dp`,
/// returns `dL/dlogits = p .* (g - (g . p))` per row.
pub fn softmax_backward(probs: &Matrix, grad_out: &Matrix) -> Matrix {
    let mut g = grad_out.clone();
    for r in 0..g.rows() {
        let p = probs.row(r);
        let gr = g.row_mut(r);
        let dot: f64 = gr.iter().zip(p).map(|(gi, pi)| gi * pi).sum();
        for (gi, pi) in gr.iter_mut().zip(p) {
            *gi = pi * (*gi - dot);
        }
    }
    g
}

/// Inverted-dropout mask: entries are `0` with probability `rate`, else
/// `1/(1-rate)`, drawn row-major.
pub fn dropout_mask(rows: usize, cols: usize, rate: f64, rng: &mut SeededRng) -> Matrix {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0,1)");
    let scale = 1.0 / (1.0 - rate);
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = if rng.uniform_01() < rate { 0.0 } else { scale };
    }
    m
}

/// Inverted dropout: identity in inference mode or at rate 0.
pub fn input_dropout(x: &Matrix, rate: f64, rng: &mut SeededRng, training: bool) -> Matrix {
    if !training || rate == 0.0 {
        return x.clone();
    }
    let mask = dropout_mask(x.rows(), x.cols(), rate, rng);
    x.hadamard(&mask).expect("mask shape matches input")
}

/// Reparameterized draw from `N(mu, I)`: `mu + eps` with `eps ~ N(0, I)`.
pub fn gaussian_perturb(mu: &Matrix, rng: &mut SeededRng) -> Matrix {
    let eps = rng.normal_matrix(mu.rows(), mu.cols());
    add_noise(mu, &eps)
}

/// `mu + eps`; split out of [`gaussian_perturb`] so the zero-noise path is
/// directly checkable.
pub fn add_noise(mu: &Matrix, eps: &Matrix) -> Matrix {
    mu.add(eps).expect("noise shape matches mean")
}
