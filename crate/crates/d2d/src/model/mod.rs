//! The coupled translation model: encoders and generators with structurally
//! tied high-level layers, per-domain discriminators, and the training
//! losses (variational, adversarial, cycle-consistency).

mod arch;
mod loss;
mod net;
mod params;

pub use arch::ArchSpec;
pub use loss::{
    cc_loss, gan_losses, kl_unit_gaussian, recon_loss, total_objective, vae_loss, HyperParams,
    LossBreakdown, ReconLossKind,
};
pub use net::{mlp_backward, mlp_forward, Activation, Tape};
pub use params::D2DParams;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{gaussian_perturb, input_dropout, Matrix, SeededRng};

/// Hidden-layer slope for encoder/generator leaky ReLUs.
pub const LEAKY_SLOPE: f64 = 0.2;

/// One of the two item catalogs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    A,
    B,
}

impl Domain {
    pub fn other(self) -> Domain {
        match self {
            Domain::A => Domain::B,
            Domain::B => Domain::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Domain::A => 0,
            Domain::B => 1,
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Domain::A => "a",
            Domain::B => "b",
        })
    }
}

/// A translation direction between the two catalogs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "a2b")]
    AToB,
    #[serde(rename = "b2a")]
    BToA,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::AToB, Direction::BToA];

    pub fn src(self) -> Domain {
        match self {
            Direction::AToB => Domain::A,
            Direction::BToA => Domain::B,
        }
    }

    pub fn dst(self) -> Domain {
        self.src().other()
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::AToB => "a2b",
            Direction::BToA => "b2a",
        })
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a2b" => Ok(Direction::AToB),
            "b2a" => Ok(Direction::BToA),
            other => Err(Error::Parse {
                location: "direction".to_string(),
                message: format!("'{other}' is not one of a2b, b2a"),
            }),
        }
    }
}

fn check_width(op: &'static str, x: &Matrix, want: usize) -> Result<()> {
    if x.cols() != want {
        return Err(Error::Shape {
            op,
            left: x.shape(),
            right: (x.rows(), want),
        });
    }
    Ok(())
}

/// Encodes click rows to their latent mean and a latent sample.
///
/// Passing an `rng` selects training behaviour: input dropout at the given
/// rate, then `z = mu + eps` with unit Gaussian noise. With `rng = None` the
/// call is deterministic inference — no dropout and `z = mu`.
pub fn encode(
    params: &D2DParams,
    domain: Domain,
    x: &Matrix,
    rng: Option<&mut SeededRng>,
    dropout: f64,
) -> Result<(Matrix, Matrix)> {
    check_width("encode", x, params.arch.input_dim(domain))?;
    let chain = params.encoder_chain(domain);
    match rng {
        Some(rng) => {
            let x_in = input_dropout(x, dropout, rng, true);
            let (mu, _) = mlp_forward(
                params.blocks(),
                &chain,
                &x_in,
                Activation::LeakyRelu(LEAKY_SLOPE),
                Activation::Linear,
            )?;
            let z = gaussian_perturb(&mu, rng);
            Ok((mu, z))
        }
        None => {
            let (mu, _) = mlp_forward(
                params.blocks(),
                &chain,
                x,
                Activation::LeakyRelu(LEAKY_SLOPE),
                Activation::Linear,
            )?;
            let z = mu.clone();
            Ok((mu, z))
        }
    }
}

/// Output-head activation for a reconstruction loss kind: the multinomial
/// likelihood reads a softmax distribution over items, the elementwise
/// losses read a tanh response per item.
pub fn head_activation(kind: ReconLossKind) -> Activation {
    match kind {
        ReconLossKind::Multinomial => Activation::Softmax,
        ReconLossKind::Logistic | ReconLossKind::Square | ReconLossKind::L1 => Activation::Tanh,
    }
}

/// Decodes latent rows to item scores for a domain (softmax rows for the
/// multinomial head, tanh rows otherwise).
pub fn generate(params: &D2DParams, domain: Domain, z: &Matrix, kind: ReconLossKind) -> Result<Matrix> {
    check_width("generate", z, params.arch.latent_dim)?;
    let chain = params.generator_chain(domain);
    let (out, _) = mlp_forward(
        params.blocks(),
        &chain,
        z,
        Activation::LeakyRelu(LEAKY_SLOPE),
        head_activation(kind),
    )?;
    Ok(out)
}

/// Encodes in the source domain and decodes in the other one. Training mode
/// (with `rng`) samples the latent code; inference translates through the
/// mean.
pub fn translate(
    params: &D2DParams,
    from: Domain,
    x: &Matrix,
    kind: ReconLossKind,
    rng: Option<&mut SeededRng>,
    dropout: f64,
) -> Result<Matrix> {
    let (_, z) = encode(params, from, x, rng, dropout)?;
    generate(params, from.other(), &z, kind)
}

/// Discriminator response in (0,1) per row: tanh hidden layers, sigmoid out.
pub fn discriminate(params: &D2DParams, domain: Domain, v: &Matrix) -> Result<Matrix> {
    check_width("discriminate", v, params.arch.input_dim(domain))?;
    let (out, _) = mlp_forward(
        params.blocks(),
        params.disc(domain),
        v,
        Activation::Tanh,
        Activation::Sigmoid,
    )?;
    Ok(out)
}

/// Deterministic cross-domain scores for ranking: translate through the
/// latent mean with no dropout and no sampling. Pure in `(x, params)`.
pub fn predict_cross(params: &D2DParams, from: Domain, x: &Matrix, kind: ReconLossKind) -> Result<Matrix> {
    translate(params, from, x, kind, None, 0.0)
}

/// Scales each binary click row to the probability simplex by dividing by
/// its click count, aligning real vectors with generated softmax rows.
pub fn simplex_scale(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            for v in row {
                *v /= sum;
            }
        }
    }
    out
}
