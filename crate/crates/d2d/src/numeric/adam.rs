//! Adam optimizer over a parameter arena.
//!
//! Each [`ParamBlock`](crate::numeric::ParamBlock) carries its own moment
//! estimates, so tied blocks that appear in several network roles are stepped
//! exactly once per update regardless of how many forward paths touched them.

use crate::error::{Error, Result};
use crate::numeric::ParamBlock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..AdamConfig::default()
        }
    }
}

/// One bias-corrected Adam update for every block named in `indices`,
/// consuming (zeroing) the gradients. Rejects non-finite gradients before
/// touching any parameter.
pub fn optimizer_step(blocks: &mut [ParamBlock], indices: &[usize], cfg: &AdamConfig) -> Result<()> {
    for &i in indices {
        let b = &blocks[i];
        if !b.grad_weight.is_finite() || b.grad_bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient for block '{}' is not finite",
                b.name
            )));
        }
    }
    for &i in indices {
        adam_update(&mut blocks[i], cfg);
    }
    Ok(())
}

fn adam_update(b: &mut ParamBlock, cfg: &AdamConfig) {
    b.opt_state.step += 1;
    let t = b.opt_state.step as i32;
    let corr1 = 1.0 - cfg.beta1.powi(t);
    let corr2 = 1.0 - cfg.beta2.powi(t);

    let step_params = |params: &mut [f64], grads: &mut [f64], m: &mut [f64], v: &mut [f64]| {
        for k in 0..params.len() {
            let g = grads[k];
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
            let m_hat = m[k] / corr1;
            let v_hat = v[k] / corr2;
            params[k] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            grads[k] = 0.0;
        }
    };

    step_params(
        b.weight.data_mut(),
        b.grad_weight.data_mut(),
        &mut b.opt_state.m_weight,
        &mut b.opt_state.v_weight,
    );
    step_params(
        &mut b.bias,
        &mut b.grad_bias,
        &mut b.opt_state.m_bias,
        &mut b.opt_state.v_bias,
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Matrix;

    fn quadratic_block(w: f64, b: f64) -> ParamBlock {
        ParamBlock::with_weight("q", Matrix::from_vec(1, 1, vec![w]), vec![b])
    }

    #[test]
    fn first_step_moves_by_lr() {
        // With zeroed moments the bias-corrected first Adam step is
        // lr * g / (|g| + eps) ~= lr * sign(g).
        let mut blocks = vec![quadratic_block(1.0, -2.0)];
        blocks[0].grad_weight.set(0, 0, 0.5);
        blocks[0].grad_bias[0] = -3.0;
        let cfg = AdamConfig::with_lr(0.1);
        optimizer_step(&mut blocks, &[0], &cfg).unwrap();
        assert!((blocks[0].weight.get(0, 0) - 0.9).abs() < 1e-6);
        assert!((blocks[0].bias[0] - (-1.9)).abs() < 1e-6);
    }

    #[test]
    fn grads_zeroed_after_step() {
        let mut blocks = vec![quadratic_block(1.0, 1.0)];
        blocks[0].grad_weight.set(0, 0, 1.0);
        blocks[0].grad_bias[0] = 1.0;
        optimizer_step(&mut blocks, &[0], &AdamConfig::default()).unwrap();
        assert_eq!(blocks[0].grad_weight.get(0, 0), 0.0);
        assert_eq!(blocks[0].grad_bias[0], 0.0);
    }

    #[test]
    fn converges_on_quadratic_bowl() {
        // minimize f(w, b) = w^2 + b^2; grad = (2w, 2b)
        let mut blocks = vec![quadratic_block(1.0, -1.5)];
        let cfg = AdamConfig::with_lr(0.05);
        for _ in 0..200 {
            let w = blocks[0].weight.get(0, 0);
            let b = blocks[0].bias[0];
            blocks[0].grad_weight.set(0, 0, 2.0 * w);
            blocks[0].grad_bias[0] = 2.0 * b;
            optimizer_step(&mut blocks, &[0], &cfg).unwrap();
        }
        assert!(blocks[0].weight.get(0, 0).abs() < 1e-2);
        assert!(blocks[0].bias[0].abs() < 1e-2);
    }

    #[test]
    fn non_finite_gradient_is_rejected_by_name() {
        let mut blocks = vec![quadratic_block(1.0, 1.0)];
        blocks[0].grad_weight.set(0, 0, f64::NAN);
        let err = optimizer_step(&mut blocks, &[0], &AdamConfig::default()).unwrap_err();
        assert!(err.to_string().contains("'q'"), "{err}");
        // parameters untouched on failure
        assert_eq!(blocks[0].weight.get(0, 0), 1.0);
        assert_eq!(blocks[0].opt_state.step, 0);
    }

    #[test]
    fn untouched_blocks_keep_their_state() {
        let mut blocks = vec![quadratic_block(1.0, 1.0), quadratic_block(2.0, 2.0)];
        blocks[0].grad_weight.set(0, 0, 1.0);
        blocks[1].grad_weight.set(0, 0, 1.0);
        optimizer_step(&mut blocks, &[0], &AdamConfig::default()).unwrap();
        assert_eq!(blocks[1].weight.get(0, 0), 2.0);
        assert_eq!(blocks[1].grad_weight.get(0, 0), 1.0);
        assert_eq!(blocks[1].opt_state.step, 0);
    }
}
