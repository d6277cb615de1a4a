//! Network shape description and validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Domain;

/// Layer widths for the coupled encoder/generator pair and the two
/// discriminators.
///
/// `encoder_layer_sizes` lists hidden widths from the input side towards the
/// latent code; the *last* `n_shared_encoder_layers` of those hidden layers
/// are tied across domains, and whenever any encoder sharing is on, the
/// final mean head (hidden → latent) is tied too — that head produces the
/// common latent space. Symmetrically, the *first*
/// `n_shared_generator_layers` hidden layers of the generators are tied,
/// while each generator's output head (hidden → item logits) is always
/// private since the domains' item counts differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub input_dims: (usize, usize),
    pub encoder_layer_sizes: Vec<usize>,
    pub latent_dim: usize,
    pub generator_layer_sizes: Vec<usize>,
    pub n_shared_encoder_layers: usize,
    pub n_shared_generator_layers: usize,
    pub discriminator_layer_sizes: Vec<usize>,
}

impl ArchSpec {
    /// The movie-catalog preset: `[I-200-100-50-100-200-I]` with the 100-wide
    /// encoder layer and the 100-wide generator layer shared, latent width 50.
    pub fn movielens(i_a: usize, i_b: usize) -> Self {
        ArchSpec {
            input_dims: (i_a, i_b),
            encoder_layer_sizes: vec![200, 100],
            latent_dim: 50,
            generator_layer_sizes: vec![100, 200],
            n_shared_encoder_layers: 1,
            n_shared_generator_layers: 1,
            discriminator_layer_sizes: vec![200, 100],
        }
    }

    /// The product-catalog preset: `[I-600-200-50-200-600-I]`, sharing the
    /// 200-wide encoder and generator layers.
    pub fn amazon(i_a: usize, i_b: usize) -> Self {
        ArchSpec {
            input_dims: (i_a, i_b),
            encoder_layer_sizes: vec![600, 200],
            latent_dim: 50,
            generator_layer_sizes: vec![200, 600],
            n_shared_encoder_layers: 1,
            n_shared_generator_layers: 1,
            discriminator_layer_sizes: vec![600, 200],
        }
    }

    /// A small preset for synthetic corpora with tens of items.
    pub fn small(i_a: usize, i_b: usize) -> Self {
        ArchSpec {
            input_dims: (i_a, i_b),
            encoder_layer_sizes: vec![32, 16],
            latent_dim: 8,
            generator_layer_sizes: vec![16, 32],
            n_shared_encoder_layers: 1,
            n_shared_generator_layers: 1,
            discriminator_layer_sizes: vec![16],
        }
    }

    pub fn input_dim(&self, domain: Domain) -> usize {
        match domain {
            Domain::A => self.input_dims.0,
            Domain::B => self.input_dims.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.input_dims.0 == 0 || self.input_dims.1 == 0 {
            problems.push(format!("input dims must be positive, got {:?}", self.input_dims));
        }
        if self.latent_dim == 0 {
            problems.push("latent_dim must be positive".to_string());
        }
        for (name, sizes) in [
            ("encoder_layer_sizes", &self.encoder_layer_sizes),
            ("generator_layer_sizes", &self.generator_layer_sizes),
            ("discriminator_layer_sizes", &self.discriminator_layer_sizes),
        ] {
            if sizes.iter().any(|&w| w == 0) {
                problems.push(format!("{name} contains a zero width: {sizes:?}"));
            }
        }
        if self.n_shared_encoder_layers > self.encoder_layer_sizes.len() {
            problems.push(format!(
                "n_shared_encoder_layers {} exceeds the {} encoder layers",
                self.n_shared_encoder_layers,
                self.encoder_layer_sizes.len()
            ));
        }
        if self.n_shared_generator_layers > self.generator_layer_sizes.len() {
            problems.push(format!(
                "n_shared_generator_layers {} exceeds the {} generator layers",
                self.n_shared_generator_layers,
                self.generator_layer_sizes.len()
            ));
        }
        // Sharing every encoder layer ties the input-facing affine, which
        // only type-checks when both domains have the same item count.
        if !self.encoder_layer_sizes.is_empty()
            && self.n_shared_encoder_layers == self.encoder_layer_sizes.len()
            && self.input_dims.0 != self.input_dims.1
        {
            problems.push(format!(
                "sharing all {} encoder layers requires equal input dims, got {:?}",
                self.n_shared_encoder_layers, self.input_dims
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}
