//! Dense f64 linear algebra, layer primitives, Adam, and gradient checking.

mod adam;
mod gradcheck;
mod matrix;
mod ops;
mod rng;

pub use adam::{optimizer_step, AdamConfig};
pub use gradcheck::{collect_grads, finite_difference_grad, max_relative_error, relative_error};
pub use matrix::Matrix;
pub use ops::{
    add_noise, affine_backward, affine_forward, dropout_mask, gaussian_perturb, input_dropout,
    leaky_relu, leaky_relu_backward, sigmoid, sigmoid_backward, softmax, softmax_backward,
    softmax_rows, tanh_backward, tanh_forward, AdamState, ParamBlock,
};
pub use rng::SeededRng;
