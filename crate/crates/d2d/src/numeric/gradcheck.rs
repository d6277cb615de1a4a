//! Central-difference gradient estimation for verifying analytic backprop.
//!
//! The loss closure must be a pure function of the parameter arena: any
//! internal randomness has to be reconstructed identically on every call
//! (e.g. by reseeding a generator inside the closure), otherwise the noise
//! does not cancel between the two sides of the difference quotient.

use crate::numeric::ParamBlock;

/// Numeric gradient of `loss` for every parameter of every block named in
/// `indices`, via `(f(p + h) - f(p - h)) / 2h`. Returns one `(grad_weight
/// flat, grad_bias)` pair per index, in order. Parameters are restored
/// exactly after probing.
pub fn finite_difference_grad<F>(
    blocks: &mut [ParamBlock],
    indices: &[usize],
    h: f64,
    mut loss: F,
) -> Vec<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&[ParamBlock]) -> f64,
{
    let mut out = Vec::with_capacity(indices.len());
    for &bi in indices {
        let n_w = blocks[bi].weight.rows() * blocks[bi].weight.cols();
        let n_b = blocks[bi].bias.len();
        let mut gw = vec![0.0; n_w];
        let mut gb = vec![0.0; n_b];
        for k in 0..n_w {
            let orig = blocks[bi].weight.data()[k];
            blocks[bi].weight.data_mut()[k] = orig + h;
            let up = loss(blocks);
            blocks[bi].weight.data_mut()[k] = orig - h;
            let down = loss(blocks);
            blocks[bi].weight.data_mut()[k] = orig;
            gw[k] = (up - down) / (2.0 * h);
        }
        for k in 0..n_b {
            let orig = blocks[bi].bias[k];
            blocks[bi].bias[k] = orig + h;
            let up = loss(blocks);
            blocks[bi].bias[k] = orig - h;
            let down = loss(blocks);
            blocks[bi].bias[k] = orig;
            gb[k] = (up - down) / (2.0 * h);
        }
        out.push((gw, gb));
    }
    out
}

/// `|a - b| / max(|a| + |b|, floor)` — symmetric relative error with an
/// absolute floor so near-zero pairs compare absolutely.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs() + b.abs()).max(1e-8)
}

/// Largest relative error between an analytic gradient set and a finite
/// difference estimate, across all compared parameters.
pub fn max_relative_error(analytic: &[(Vec<f64>, Vec<f64>)], numeric: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst: f64 = 0.0;
    for ((aw, ab), (nw, nb)) in analytic.iter().zip(numeric) {
        assert_eq!(aw.len(), nw.len());
        assert_eq!(ab.len(), nb.len());
        for (a, n) in aw.iter().zip(nw).chain(ab.iter().zip(nb)) {
            worst = worst.max(relative_error(*a, *n));
        }
    }
    worst
}

/// Snapshot the analytic gradients currently held by the given blocks, in
/// the same layout [`finite_difference_grad`] produces.
pub fn collect_grads(blocks: &[ParamBlock], indices: &[usize]) -> Vec<(Vec<f64>, Vec<f64>)> {
    indices
        .iter()
        .map(|&i| (blocks[i].grad_weight.data().to_vec(), blocks[i].grad_bias.clone()))
        .collect()
}
