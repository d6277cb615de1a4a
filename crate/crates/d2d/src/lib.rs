//! Cross-domain recommendation by translating click histories between two
//! item catalogs.
//!
//! Two variational autoencoders — one per domain — are coupled through
//! partially shared encoder/generator layers, adversarial discriminators on
//! translated output, and a cycle-consistency constraint. Once trained, a
//! user's clicks in domain A are encoded into the shared latent space and
//! decoded by domain B's generator (and vice versa), yielding a ranking over
//! items the user has never interacted with in the target domain.
//!
//! The crate is organized bottom-up:
//!
//! - [`numeric`]: dense matrices, layer primitives, Adam, gradient checking
//! - [`data`]: rating ingestion, click matrices, user splits, synthetic fixtures
//! - [`model`]: the coupled-autoencoder parameterization and its losses
//! - [`training`]: minibatch adversarial training loop and ablation runner
//! - [`eval`]: top-K ranking metrics and per-direction evaluation
//! - [`cli`]: config files, checkpoints, and the pipeline commands
//!
//! See the `examples/` directory for end-to-end usage.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod numeric;
pub mod training;

pub use error::{Error, Result};
