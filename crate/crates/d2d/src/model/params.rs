//! Parameter arena for the coupled networks.
//!
//! All [`ParamBlock`]s live in one flat vector; the per-role index lists
//! (`enc_private`, `enc_shared`, …) describe which blocks each forward pass
//! walks. Weight tying is structural: both domains' encoder chains contain
//! the *same* shared block indices, so there is exactly one copy of each
//! shared layer to read, differentiate, or update.

use crate::error::Result;
use crate::model::{ArchSpec, Domain};
use crate::numeric::{ParamBlock, SeededRng};

#[derive(Debug, Clone, PartialEq)]
pub struct D2DParams {
    pub arch: ArchSpec,
    blocks: Vec<ParamBlock>,
    enc_private: [Vec<usize>; 2],
    enc_shared: Vec<usize>,
    gen_shared: Vec<usize>,
    gen_private: [Vec<usize>; 2],
    disc: [Vec<usize>; 2],
}

impl D2DParams {
    /// Fresh Glorot-initialized parameters. Block creation order is fixed
    /// (encoder A, encoder B, shared encoder tail, shared generator head,
    /// generator A, generator B, discriminator A, discriminator B), so a
    /// given seed always produces the same values.
    pub fn init(arch: &ArchSpec, rng: &mut SeededRng) -> Result<Self> {
        arch.validate()?;
        let mut p = D2DParams {
            arch: arch.clone(),
            blocks: Vec::new(),
            enc_private: [Vec::new(), Vec::new()],
            enc_shared: Vec::new(),
            gen_shared: Vec::new(),
            gen_private: [Vec::new(), Vec::new()],
            disc: [Vec::new(), Vec::new()],
        };
        let k = arch.encoder_layer_sizes.len();
        let n_se = arch.n_shared_encoder_layers;
        let m = arch.generator_layer_sizes.len();
        let n_sg = arch.n_shared_generator_layers;

        // Encoder private heads (layers 0 .. k-n_se), per domain.
        for d in [Domain::A, Domain::B] {
            let mut width = arch.input_dim(d);
            for i in 0..k - n_se {
                let out = arch.encoder_layer_sizes[i];
                let idx = p.push(format!("enc_{d}.h{i}"), out, width, rng);
                p.enc_private[d.index()].push(idx);
                width = out;
            }
            if n_se == 0 {
                // no tying at all: the mean head is private too
                let idx = p.push(format!("enc_{d}.mu"), arch.latent_dim, width, rng);
                p.enc_private[d.index()].push(idx);
            }
        }
        // Shared encoder tail plus the mean head.
        if n_se > 0 {
            let mut width = if n_se == k {
                arch.input_dims.0
            } else {
                arch.encoder_layer_sizes[k - n_se - 1]
            };
            for i in k - n_se..k {
                let out = arch.encoder_layer_sizes[i];
                let idx = p.push(format!("enc_shared.h{i}"), out, width, rng);
                p.enc_shared.push(idx);
                width = out;
            }
            let idx = p.push("enc_shared.mu".to_string(), arch.latent_dim, width, rng);
            p.enc_shared.push(idx);
        }

        // Shared generator head (layers 0 .. n_sg).
        let mut width = arch.latent_dim;
        for i in 0..n_sg {
            let out = arch.generator_layer_sizes[i];
            let idx = p.push(format!("gen_shared.h{i}"), out, width, rng);
            p.gen_shared.push(idx);
            width = out;
        }
        // Generator private tails and output heads, per domain.
        for d in [Domain::A, Domain::B] {
            let mut w = width;
            for i in n_sg..m {
                let out = arch.generator_layer_sizes[i];
                let idx = p.push(format!("gen_{d}.h{i}"), out, w, rng);
                p.gen_private[d.index()].push(idx);
                w = out;
            }
            let idx = p.push(format!("gen_{d}.out"), arch.input_dim(d), w, rng);
            p.gen_private[d.index()].push(idx);
        }

        // Discriminators, fully private.
        for d in [Domain::A, Domain::B] {
            let mut w = arch.input_dim(d);
            for (i, &out) in arch.discriminator_layer_sizes.iter().enumerate() {
                let idx = p.push(format!("disc_{d}.h{i}"), out, w, rng);
                p.disc[d.index()].push(idx);
                w = out;
            }
            let idx = p.push(format!("disc_{d}.out"), 1, w, rng);
            p.disc[d.index()].push(idx);
        }
        Ok(p)
    }

    /// Same block layout as [`D2DParams::init`] but with all values zero;
    /// used when loading a checkpoint that will overwrite every value.
    pub fn zeroed(arch: &ArchSpec) -> Result<Self> {
        let mut rng = SeededRng::new(0);
        let mut p = D2DParams::init(arch, &mut rng)?;
        for b in &mut p.blocks {
            b.weight.fill(0.0);
            b.bias.iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(p)
    }

    fn push(&mut self, name: String, out: usize, inp: usize, rng: &mut SeededRng) -> usize {
        self.blocks.push(ParamBlock::glorot(name, out, inp, rng));
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [ParamBlock] {
        &mut self.blocks
    }

    pub fn enc_private(&self, d: Domain) -> &[usize] {
        &self.enc_private[d.index()]
    }

    pub fn enc_shared(&self) -> &[usize] {
        &self.enc_shared
    }

    pub fn gen_shared(&self) -> &[usize] {
        &self.gen_shared
    }

    pub fn gen_private(&self, d: Domain) -> &[usize] {
        &self.gen_private[d.index()]
    }

    pub fn disc(&self, d: Domain) -> &[usize] {
        &self.disc[d.index()]
    }

    /// Full encoder chain for a domain: private head then shared tail.
    pub fn encoder_chain(&self, d: Domain) -> Vec<usize> {
        let mut chain = self.enc_private[d.index()].clone();
        chain.extend_from_slice(&self.enc_shared);
        chain
    }

    /// Full generator chain for a domain: shared head then private tail.
    pub fn generator_chain(&self, d: Domain) -> Vec<usize> {
        let mut chain = self.gen_shared.clone();
        chain.extend_from_slice(&self.gen_private[d.index()]);
        chain
    }

    /// Every encoder/generator block exactly once (the "min" side of the
    /// adversarial game).
    pub fn encgen_indices(&self) -> Vec<usize> {
        let mut ix = Vec::new();
        ix.extend_from_slice(&self.enc_private[0]);
        ix.extend_from_slice(&self.enc_private[1]);
        ix.extend_from_slice(&self.enc_shared);
        ix.extend_from_slice(&self.gen_shared);
        ix.extend_from_slice(&self.gen_private[0]);
        ix.extend_from_slice(&self.gen_private[1]);
        ix
    }

    /// Both discriminators' blocks (the "max" side).
    pub fn disc_indices(&self) -> Vec<usize> {
        let mut ix = self.disc[0].clone();
        ix.extend_from_slice(&self.disc[1]);
        ix
    }

    pub fn n_params(&self) -> usize {
        self.blocks.iter().map(ParamBlock::n_params).sum()
    }

    pub fn zero_grads(&mut self) {
        for b in &mut self.blocks {
            b.zero_grads();
        }
    }

    /// Central-difference gradient of `loss` for the given blocks, in the
    /// layout of [`crate::numeric::finite_difference_grad`]. The closure
    /// receives the whole parameter set so composite losses can run their
    /// full forward pass.
    pub fn finite_difference<F>(&mut self, indices: &[usize], h: f64, mut loss: F) -> Vec<(Vec<f64>, Vec<f64>)>
    where
        F: FnMut(&mut D2DParams) -> f64,
    {
        let mut out = Vec::with_capacity(indices.len());
        for &bi in indices {
            let n_w = self.blocks[bi].weight.rows() * self.blocks[bi].weight.cols();
            let n_b = self.blocks[bi].bias.len();
            let mut gw = vec![0.0; n_w];
            let mut gb = vec![0.0; n_b];
            for k in 0..n_w {
                let orig = self.blocks[bi].weight.data()[k];
                self.blocks[bi].weight.data_mut()[k] = orig + h;
                let up = loss(self);
                self.blocks[bi].weight.data_mut()[k] = orig - h;
                let down = loss(self);
                self.blocks[bi].weight.data_mut()[k] = orig;
                gw[k] = (up - down) / (2.0 * h);
            }
            for k in 0..n_b {
                let orig = self.blocks[bi].bias[k];
                self.blocks[bi].bias[k] = orig + h;
                let up = loss(self);
                self.blocks[bi].bias[k] = orig - h;
                let down = loss(self);
                self.blocks[bi].bias[k] = orig;
                gb[k] = (up - down) / (2.0 * h);
            }
            out.push((gw, gb));
        }
        out
    }
}
