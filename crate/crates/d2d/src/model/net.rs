//! Shared forward/backward machinery for affine stacks.

use crate::error::Result;
use crate::numeric::{
    affine_backward, affine_forward, leaky_relu, leaky_relu_backward, sigmoid, sigmoid_backward,
    softmax_backward, softmax_rows, tanh_backward, tanh_forward, Matrix, ParamBlock,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Linear,
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
    Softmax,
}

impl Activation {
    fn apply(self, pre: &Matrix) -> Matrix {
        match self {
            Activation::Linear => pre.clone(),
            Activation::LeakyRelu(slope) => leaky_relu(pre, slope),
            Activation::Tanh => tanh_forward(pre),
            Activation::Sigmoid => sigmoid(pre),
            Activation::Softmax => softmax_rows(pre),
        }
    }

    fn backward(self, pre: &Matrix, post: &Matrix, grad_out: &Matrix) -> Matrix {
        match self {
            Activation::Linear => grad_out.clone(),
            Activation::LeakyRelu(slope) => leaky_relu_backward(pre, slope, grad_out),
            Activation::Tanh => tanh_backward(post, grad_out),
            Activation::Sigmoid => sigmoid_backward(post, grad_out),
            Activation::Softmax => softmax_backward(post, grad_out),
        }
    }
}

/// Per-layer records captured by a forward pass, enough to backpropagate.
pub struct Tape {
    x0: Matrix,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
}

impl Tape {
    fn input_of(&self, layer: usize) -> &Matrix {
        if layer == 0 {
            &self.x0
        } else {
            &self.post[layer - 1]
        }
    }
}

/// Runs `x` through the blocks named by `chain`, applying `hidden` between
/// layers and `last` after the final affine. Returns the output and the tape.
pub fn mlp_forward(
    blocks: &[ParamBlock],
    chain: &[usize],
    x: &Matrix,
    hidden: Activation,
    last: Activation,
) -> Result<(Matrix, Tape)> {
    assert!(!chain.is_empty(), "empty layer chain");
    let mut tape = Tape {
        x0: x.clone(),
        pre: Vec::with_capacity(chain.len()),
        post: Vec::with_capacity(chain.len()),
    };
    let mut cur = x;
    for (li, &bi) in chain.iter().enumerate() {
        let pre = affine_forward(cur, &blocks[bi])?;
        let act = if li + 1 == chain.len() { last } else { hidden };
        let post = act.apply(&pre);
        tape.pre.push(pre);
        tape.post.push(post);
        cur = tape.post.last().unwrap();
    }
    Ok((tape.post.last().unwrap().clone(), tape))
}

/// Backpropagates `grad_out` (gradient w.r.t. the final *activated* output)
/// through the taped stack. With `accumulate` set, layer gradients are added
/// into each block's buffers; otherwise parameters are left untouched and
/// only the input gradient is computed (used to differentiate through a
/// frozen network). Returns the gradient w.r.t. the stack input.
pub fn mlp_backward(
    blocks: &mut [ParamBlock],
    chain: &[usize],
    tape: &Tape,
    grad_out: &Matrix,
    hidden: Activation,
    last: Activation,
    accumulate: bool,
) -> Result<Matrix> {
    let mut g = grad_out.clone();
    for li in (0..chain.len()).rev() {
        let act = if li + 1 == chain.len() { last } else { hidden };
        g = act.backward(&tape.pre[li], &tape.post[li], &g);
        let bi = chain[li];
        g = if accumulate {
            affine_backward(tape.input_of(li), &mut blocks[bi], &g)?
        } else {
            g.matmul(&blocks[bi].weight)?
        };
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{collect_grads, finite_difference_grad, max_relative_error, SeededRng};

    fn toy_blocks(rng: &mut SeededRng) -> Vec<ParamBlock> {
        vec![
            ParamBlock::glorot("l0", 4, 3, rng),
            ParamBlock::glorot("l1", 2, 4, rng),
        ]
    }

    #[test]
    fn forward_matches_manual_composition() {
        let mut rng = SeededRng::new(5);
        let blocks = toy_blocks(&mut rng);
        let x = Matrix::from_rows(&[&[0.2, -0.4, 1.1]]);
        let (out, _) = mlp_forward(&blocks, &[0, 1], &x, Activation::LeakyRelu(0.2), Activation::Linear).unwrap();

        let h = leaky_relu(&affine_forward(&x, &blocks[0]).unwrap(), 0.2);
        let manual = affine_forward(&h, &blocks[1]).unwrap();
        assert_eq!(out, manual);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = SeededRng::new(11);
        let mut blocks = toy_blocks(&mut rng);
        let x = Matrix::from_rows(&[&[0.2, -0.4, 1.1], &[-0.9, 0.3, 0.5]]);

        // loss = sum of tanh outputs
        let loss = |bs: &mut [ParamBlock]| {
            let (out, _) =
                mlp_forward(bs, &[0, 1], &x, Activation::LeakyRelu(0.2), Activation::Tanh).unwrap();
            out.data().iter().sum::<f64>()
        };

        let (out, tape) =
            mlp_forward(&blocks, &[0, 1], &x, Activation::LeakyRelu(0.2), Activation::Tanh).unwrap();
        let ones = Matrix::from_vec(out.rows(), out.cols(), vec![1.0; out.rows() * out.cols()]);
        mlp_backward(
            &mut blocks,
            &[0, 1],
            &tape,
            &ones,
            Activation::LeakyRelu(0.2),
            Activation::Tanh,
            true,
        )
        .unwrap();
        let analytic = collect_grads(&blocks, &[0, 1]);
        for b in &mut blocks {
            b.zero_grads();
        }
        let numeric = finite_difference_grad(&mut blocks, &[0, 1], 1e-6, |bs| {
            // finite_difference_grad hands out an immutable view; rebuild a
            // mutable copy for the shared loss closure
            let mut copy = bs.to_vec();
            loss(&mut copy)
        });
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-6, "max rel err {err}");
    }

    #[test]
    fn non_accumulating_backward_leaves_params_alone() {
        let mut rng = SeededRng::new(3);
        let mut blocks = toy_blocks(&mut rng);
        let x = Matrix::from_rows(&[&[1.0, 0.0, -1.0]]);
        let (out, tape) =
            mlp_forward(&blocks, &[0, 1], &x, Activation::LeakyRelu(0.2), Activation::Linear).unwrap();
        let g = Matrix::from_vec(1, out.cols(), vec![1.0; out.cols()]);
        let before = blocks.clone();
        let gx = mlp_backward(
            &mut blocks,
            &[0, 1],
            &tape,
            &g,
            Activation::LeakyRelu(0.2),
            Activation::Linear,
            false,
        )
        .unwrap();
        assert_eq!(blocks, before);
        assert_eq!(gx.shape(), (1, 3));
    }
}
