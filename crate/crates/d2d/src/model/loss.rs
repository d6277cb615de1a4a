//! Training objectives: variational reconstruction, adversarial, and
//! cycle-consistency terms, each with hand-derived backpropagation.
//!
//! Every loss here takes `&mut D2DParams` plus a `grads` flag: with `grads`
//! set, gradients are *accumulated* into the parameter blocks' buffers
//! alongside the scalar value. Randomness (input dropout, latent noise) is
//! drawn from the caller's generator in a fixed documented order, so a loss
//! can be reproduced exactly by replaying the same seed — which is also what
//! makes finite-difference checking of these analytic gradients possible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::net::{mlp_backward, mlp_forward, Activation, Tape};
use crate::model::{head_activation, simplex_scale, D2DParams, Direction, Domain, LEAKY_SLOPE};
use crate::numeric::{input_dropout, Matrix, SeededRng};

/// Additive floor inside every logarithm; keeps all losses finite.
pub const PROB_FLOOR: f64 = 1e-10;

const HIDDEN: Activation = Activation::LeakyRelu(LEAKY_SLOPE);

/// Reconstruction likelihood family for the generator output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconLossKind {
    Multinomial,
    Logistic,
    Square,
    L1,
}

impl ReconLossKind {
    pub const ALL: [ReconLossKind; 4] = [
        ReconLossKind::Multinomial,
        ReconLossKind::Logistic,
        ReconLossKind::Square,
        ReconLossKind::L1,
    ];
}

impl std::fmt::Display for ReconLossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReconLossKind::Multinomial => "multinomial",
            ReconLossKind::Logistic => "logistic",
            ReconLossKind::Square => "square",
            ReconLossKind::L1 => "l1",
        })
    }
}

impl std::str::FromStr for ReconLossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multinomial" => Ok(ReconLossKind::Multinomial),
            "logistic" => Ok(ReconLossKind::Logistic),
            "square" => Ok(ReconLossKind::Square),
            "l1" => Ok(ReconLossKind::L1),
            other => Err(Error::Parse {
                location: "recon loss kind".to_string(),
                message: format!("'{other}' is not one of multinomial, logistic, square, l1"),
            }),
        }
    }
}

/// Loss-term weights. `lambda0` scales both adversarial losses, `lambda1` /
/// `lambda2` the variational KL and reconstruction, `lambda3` / `lambda4`
/// the cycle KL and cycle reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub recon_loss_kind: ReconLossKind,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            lambda0: 10.0,
            lambda1: 0.1,
            lambda2: 100.0,
            lambda3: 0.1,
            lambda4: 100.0,
            recon_loss_kind: ReconLossKind::Multinomial,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("lambda0", self.lambda0),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
            ("lambda4", self.lambda4),
        ] {
            if !(v >= 0.0) {
                problems.push(format!("{name} must be nonnegative, got {v}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// One batch's loss values, split by term and summed by optimization side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub vae_a: f64,
    pub vae_b: f64,
    /// Generator-side adversarial loss of the stream producing domain-A
    /// vectors (translation B→A), and symmetrically for `gan_b`.
    pub gan_a: f64,
    pub gan_b: f64,
    pub cc_a: f64,
    pub cc_b: f64,
    pub total_encgen: f64,
    pub total_disc: f64,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        [
            self.vae_a,
            self.vae_b,
            self.gan_a,
            self.gan_b,
            self.cc_a,
            self.cc_b,
            self.total_encgen,
            self.total_disc,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// KL divergence from `N(mu, I)` to `N(0, I)`, averaged over rows: with the
/// covariance pinned to identity the closed form is `mean(0.5 * ||mu||^2)`.
pub fn kl_unit_gaussian(mu: &Matrix) -> f64 {
    0.5 * mu.data().iter().map(|v| v * v).sum::<f64>() / mu.rows() as f64
}

/// Gradient of `lambda * kl_unit_gaussian(mu)` w.r.t. `mu`.
fn kl_grad(mu: &Matrix, lambda: f64) -> Matrix {
    let scale = lambda / mu.rows() as f64;
    mu.map(|v| scale * v)
}

/// Reconstruction penalty between binary targets `x` and generated rows
/// `out` (softmax rows for multinomial, tanh rows otherwise): per-row sums
/// of the elementwise terms, averaged over rows.
pub fn recon_loss(kind: ReconLossKind, x: &Matrix, out: &Matrix) -> f64 {
    debug_assert_eq!(x.shape(), out.shape());
    let n = x.rows() as f64;
    let pairs = x.data().iter().zip(out.data());
    let total: f64 = match kind {
        ReconLossKind::Multinomial => pairs.map(|(&xi, &oi)| -xi * (oi + PROB_FLOOR).ln()).sum(),
        ReconLossKind::Logistic => pairs
            .map(|(&xi, &oi)| {
                let m = (oi + 1.0) / 2.0;
                -(xi * (m + PROB_FLOOR).ln() + (1.0 - xi) * (1.0 - m + PROB_FLOOR).ln())
            })
            .sum(),
        ReconLossKind::Square => pairs.map(|(&xi, &oi)| (oi - xi) * (oi - xi)).sum(),
        ReconLossKind::L1 => pairs.map(|(&xi, &oi)| (oi - xi).abs()).sum(),
    };
    total / n
}

/// `d recon_loss / d out`, same shape as `out`.
fn recon_grad(kind: ReconLossKind, x: &Matrix, out: &Matrix) -> Matrix {
    let n = x.rows() as f64;
    let mut g = out.clone();
    for (gi, (&xi, &oi)) in g.data_mut().iter_mut().zip(x.data().iter().zip(out.data())) {
        *gi = match kind {
            ReconLossKind::Multinomial => -xi / (oi + PROB_FLOOR) / n,
            ReconLossKind::Logistic => {
                let m = (oi + 1.0) / 2.0;
                0.5 * (-xi / (m + PROB_FLOOR) + (1.0 - xi) / (1.0 - m + PROB_FLOOR)) / n
            }
            ReconLossKind::Square => 2.0 * (oi - xi) / n,
            ReconLossKind::L1 => (oi - xi).signum() / n,
        };
    }
    g
}

/// Mean over rows of `ln(v + floor)` for a column of probabilities.
fn mean_log(v: &Matrix) -> f64 {
    v.data().iter().map(|&x| (x + PROB_FLOOR).ln()).sum::<f64>() / v.rows() as f64
}

/// Mean over rows of `ln(1 - v + floor)`.
fn mean_log_one_minus(v: &Matrix) -> f64 {
    v.data().iter().map(|&x| (1.0 - x + PROB_FLOOR).ln()).sum::<f64>() / v.rows() as f64
}

fn enc_forward(params: &D2DParams, d: Domain, x: &Matrix) -> Result<(Matrix, Tape, Vec<usize>)> {
    let chain = params.encoder_chain(d);
    let (mu, tape) = mlp_forward(params.blocks(), &chain, x, HIDDEN, Activation::Linear)?;
    Ok((mu, tape, chain))
}

fn gen_forward(
    params: &D2DParams,
    d: Domain,
    z: &Matrix,
    kind: ReconLossKind,
) -> Result<(Matrix, Tape, Vec<usize>)> {
    let chain = params.generator_chain(d);
    let (out, tape) = mlp_forward(params.blocks(), &chain, z, HIDDEN, head_activation(kind))?;
    Ok((out, tape, chain))
}

fn disc_forward(params: &D2DParams, d: Domain, v: &Matrix) -> Result<(Matrix, Tape, Vec<usize>)> {
    let chain = params.disc(d).to_vec();
    let (out, tape) = mlp_forward(params.blocks(), &chain, v, Activation::Tanh, Activation::Sigmoid)?;
    Ok((out, tape, chain))
}

/// Variational loss for one domain:
/// `lambda1 * KL(q(z|x) || N(0,I)) + lambda2 * recon(x, generate(z))` with
/// `z = mu + eps` sampled once. Training-mode only (dropout applies; draws:
/// dropout mask if rate > 0, then the latent noise).
pub fn vae_loss(
    params: &mut D2DParams,
    domain: Domain,
    x: &Matrix,
    hyper: &HyperParams,
    rng: &mut SeededRng,
    dropout: f64,
    grads: bool,
) -> Result<f64> {
    let kind = hyper.recon_loss_kind;
    let x_in = input_dropout(x, dropout, rng, true);
    let (mu, tape_e, enc_chain) = enc_forward(params, domain, &x_in)?;
    let eps = rng.normal_matrix(mu.rows(), mu.cols());
    let z = mu.add(&eps)?;
    let (out, tape_g, gen_chain) = gen_forward(params, domain, &z, kind)?;

    let loss = hyper.lambda1 * kl_unit_gaussian(&mu) + hyper.lambda2 * recon_loss(kind, x, &out);
    if grads {
        let lambda2 = hyper.lambda2;
        let g_out = recon_grad(kind, x, &out).map(|v| lambda2 * v);
        let head = head_activation(kind);
        let g_z = mlp_backward(params.blocks_mut(), &gen_chain, &tape_g, &g_out, HIDDEN, head, true)?;
        let mut g_mu = g_z;
        g_mu = g_mu.add(&kl_grad(&mu, hyper.lambda1))?;
        mlp_backward(
            params.blocks_mut(),
            &enc_chain,
            &tape_e,
            &g_mu,
            HIDDEN,
            Activation::Linear,
            true,
        )?;
    }
    Ok(loss)
}

/// Adversarial losses for one translation stream. The fake batch is the
/// translation of `x_src` into the destination domain; the real batch is
/// `x_real` from that destination domain, scaled onto the simplex.
///
/// Returns `(disc_loss, gen_loss)`:
/// - `disc_loss = -lambda0 * (E[ln D(real)] + E[ln(1 - D(fake))])`, the
///   discriminator's minimization target, treating the fake as constant;
/// - `gen_loss = -lambda0 * E[ln D(fake)]`, the non-saturating generator
///   form, treating the discriminator parameters as constant.
///
/// `disc_grads` / `gen_grads` select which side's gradients to accumulate.
/// With `lambda0 = 0` the stream is skipped entirely (no generator draws).
pub fn gan_losses(
    params: &mut D2DParams,
    direction: Direction,
    x_src: &Matrix,
    x_real: &Matrix,
    hyper: &HyperParams,
    rng: &mut SeededRng,
    dropout: f64,
    disc_grads: bool,
    gen_grads: bool,
) -> Result<(f64, f64)> {
    if hyper.lambda0 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let kind = hyper.recon_loss_kind;
    let lambda0 = hyper.lambda0;
    let (src, dst) = (direction.src(), direction.dst());
    let n = x_src.rows() as f64;

    let x_in = input_dropout(x_src, dropout, rng, true);
    let (mu, tape_e, enc_chain) = enc_forward(params, src, &x_in)?;
    let eps = rng.normal_matrix(mu.rows(), mu.cols());
    let z = mu.add(&eps)?;
    let (fake, tape_g, gen_chain) = gen_forward(params, dst, &z, kind)?;

    let real = simplex_scale(x_real);
    let (d_real, tape_dr, disc_chain) = disc_forward(params, dst, &real)?;
    let (d_fake, tape_df, _) = disc_forward(params, dst, &fake)?;

    let disc_loss = -lambda0 * (mean_log(&d_real) + mean_log_one_minus(&d_fake));
    let gen_loss = -lambda0 * mean_log(&d_fake);

    if disc_grads {
        let g_real = d_real.map(|v| -lambda0 / (n * (v + PROB_FLOOR)));
        mlp_backward(
            params.blocks_mut(),
            &disc_chain,
            &tape_dr,
            &g_real,
            Activation::Tanh,
            Activation::Sigmoid,
            true,
        )?;
        let g_fake_disc = d_fake.map(|v| lambda0 / (n * (1.0 - v + PROB_FLOOR)));
        mlp_backward(
            params.blocks_mut(),
            &disc_chain,
            &tape_df,
            &g_fake_disc,
            Activation::Tanh,
            Activation::Sigmoid,
            true,
        )?;
    }
    if gen_grads {
        let g_score = d_fake.map(|v| -lambda0 / (n * (v + PROB_FLOOR)));
        // through the discriminator without touching its gradients
        let g_fake = mlp_backward(
            params.blocks_mut(),
            &disc_chain,
            &tape_df,
            &g_score,
            Activation::Tanh,
            Activation::Sigmoid,
            false,
        )?;
        let head = head_activation(kind);
        let g_z = mlp_backward(params.blocks_mut(), &gen_chain, &tape_g, &g_fake, HIDDEN, head, true)?;
        mlp_backward(
            params.blocks_mut(),
            &enc_chain,
            &tape_e,
            &g_z,
            HIDDEN,
            Activation::Linear,
            true,
        )?;
    }
    Ok((disc_loss, gen_loss))
}

/// Cycle-consistency loss for the round trip starting at `src`:
/// `lambda3 * KL(q_src(z|x)) + lambda3 * KL(q_dst(z'|x_t)) + lambda4 *
/// recon(x, generate(src, z'))` where `x_t = generate(dst, z)` is the
/// continuous first-hop output fed straight into the destination encoder
/// (no dropout on the second hop). Skipped entirely when both lambdas are 0.
pub fn cc_loss(
    params: &mut D2DParams,
    src: Domain,
    x: &Matrix,
    hyper: &HyperParams,
    rng: &mut SeededRng,
    dropout: f64,
    grads: bool,
) -> Result<f64> {
    if hyper.lambda3 == 0.0 && hyper.lambda4 == 0.0 {
        return Ok((0.0) as f64);
    }
    let kind = hyper.recon_loss_kind;
    let dst = src.other();

    let x_in = input_dropout(x, dropout, rng, true);
    let (mu1, tape_e1, enc_src) = enc_forward(params, src, &x_in)?;
    let eps1 = rng.normal_matrix(mu1.rows(), mu1.cols());
    let z = mu1.add(&eps1)?;
    let (x_t, tape_g1, gen_dst) = gen_forward(params, dst, &z, kind)?;
    let (mu2, tape_e2, enc_dst) = enc_forward(params, dst, &x_t)?;
    let eps2 = rng.normal_matrix(mu2.rows(), mu2.cols());
    let z2 = mu2.add(&eps2)?;
    let (out, tape_g2, gen_src) = gen_forward(params, src, &z2, kind)?;

    let loss = hyper.lambda3 * (kl_unit_gaussian(&mu1) + kl_unit_gaussian(&mu2))
        + hyper.lambda4 * recon_loss(kind, x, &out);

    if grads {
        let lambda4 = hyper.lambda4;
        let head = head_activation(kind);
        let g_out = recon_grad(kind, x, &out).map(|v| lambda4 * v);
        let g_z2 = mlp_backward(params.blocks_mut(), &gen_src, &tape_g2, &g_out, HIDDEN, head, true)?;
        let g_mu2 = g_z2.add(&kl_grad(&mu2, hyper.lambda3))?;
        let g_xt = mlp_backward(
            params.blocks_mut(),
            &enc_dst,
            &tape_e2,
            &g_mu2,
            HIDDEN,
            Activation::Linear,
            true,
        )?;
        let g_z = mlp_backward(params.blocks_mut(), &gen_dst, &tape_g1, &g_xt, HIDDEN, head, true)?;
        let g_mu1 = g_z.add(&kl_grad(&mu1, hyper.lambda3))?;
        mlp_backward(
            params.blocks_mut(),
            &enc_src,
            &tape_e1,
            &g_mu1,
            HIDDEN,
            Activation::Linear,
            true,
        )?;
    }
    Ok(loss)
}

/// Joint objective over one paired minibatch, evaluating terms in a fixed
/// order (VAE A, VAE B, GAN B→A, GAN A→B, CC from A, CC from B) on a single
/// noise stream — each term can therefore be reproduced standalone by
/// replaying the same seed and prefix.
///
/// With `encgen_grads`, the encoder/generator side's gradients accumulate
/// (discriminator parameters are left untouched: its own updates come from
/// calling [`gan_losses`] with `disc_grads`). The report's `total_disc`
/// carries the current discriminator losses for monitoring either way.
pub fn total_objective(
    params: &mut D2DParams,
    batch_a: &Matrix,
    batch_b: &Matrix,
    hyper: &HyperParams,
    rng: &mut SeededRng,
    dropout: f64,
    encgen_grads: bool,
) -> Result<LossBreakdown> {
    if batch_a.rows() != batch_b.rows() {
        return Err(Error::Shape {
            op: "total_objective",
            left: batch_a.shape(),
            right: batch_b.shape(),
        });
    }
    let vae_a = vae_loss(params, Domain::A, batch_a, hyper, rng, dropout, encgen_grads)?;
    let vae_b = vae_loss(params, Domain::B, batch_b, hyper, rng, dropout, encgen_grads)?;
    let (disc_a, gan_a) = gan_losses(
        params,
        Direction::BToA,
        batch_b,
        batch_a,
        hyper,
        rng,
        dropout,
        false,
        encgen_grads,
    )?;
    let (disc_b, gan_b) = gan_losses(
        params,
        Direction::AToB,
        batch_a,
        batch_b,
        hyper,
        rng,
        dropout,
        false,
        encgen_grads,
    )?;
    let cc_a = cc_loss(params, Domain::A, batch_a, hyper, rng, dropout, encgen_grads)?;
    let cc_b = cc_loss(params, Domain::B, batch_b, hyper, rng, dropout, encgen_grads)?;

    Ok(LossBreakdown {
        vae_a,
        vae_b,
        gan_a,
        gan_b,
        cc_a,
        cc_b,
        total_encgen: vae_a + vae_b + gan_a + gan_b + cc_a + cc_b,
        total_disc: disc_a + disc_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArchSpec;
    use crate::numeric::{collect_grads, max_relative_error};

    /// Tiny two-domain net (4 and 5 items) used by all gradient checks.
    fn toy() -> D2DParams {
        let arch = ArchSpec {
            input_dims: (4, 5),
            encoder_layer_sizes: vec![3, 3],
            latent_dim: 2,
            generator_layer_sizes: vec![3, 3],
            n_shared_encoder_layers: 1,
            n_shared_generator_layers: 1,
            discriminator_layer_sizes: vec![3],
        };
        D2DParams::init(&arch, &mut SeededRng::new(12)).unwrap()
    }

    fn toy_batch_a() -> Matrix {
        Matrix::from_rows(&[&[1.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0], &[1.0, 1.0, 0.0, 0.0]])
    }

    fn toy_batch_b() -> Matrix {
        Matrix::from_rows(&[
            &[0.0, 1.0, 0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0, 1.0],
        ])
    }

    #[test]
    fn kl_closed_form_examples() {
        assert_eq!(kl_unit_gaussian(&Matrix::zeros(3, 4)), 0.0);
        let mu = Matrix::from_rows(&[&[1.0, 0.0, 0.0]]);
        assert!((kl_unit_gaussian(&mu) - 0.5).abs() < 1e-15);
        // two rows average
        let mu2 = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        assert!((kl_unit_gaussian(&mu2) - 0.5 * (1.0 + 4.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn kl_matches_monte_carlo() {
        let mu = Matrix::from_rows(&[&[0.5, -0.5]]);
        let exact = kl_unit_gaussian(&mu);
        // E_q[ln q(z) - ln p(z)] = E[(||z||^2 - ||z - mu||^2) / 2]
        let mut rng = SeededRng::new(99);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let e1: f64 = rng.standard_normal();
            let e2: f64 = rng.standard_normal();
            let z = [0.5 + e1, -0.5 + e2];
            acc += 0.5 * (z[0] * z[0] + z[1] * z[1] - e1 * e1 - e2 * e2);
        }
        let mc = acc / n as f64;
        assert!((mc - exact).abs() < 0.01, "mc {mc} vs exact {exact}");
    }

    #[test]
    fn recon_oracle_values() {
        let x = Matrix::from_rows(&[&[0.0, 1.0, 0.0, 0.0, 0.0]]);
        let perfect = Matrix::from_rows(&[&[0.0, 1.0, 0.0, 0.0, 0.0]]);
        assert!(recon_loss(ReconLossKind::Multinomial, &x, &perfect).abs() < 1e-9);
        let uniform = Matrix::from_vec(1, 5, vec![0.2; 5]);
        let got = recon_loss(ReconLossKind::Multinomial, &x, &uniform);
        assert!((got - 5.0_f64.ln()).abs() < 1e-9, "{got}");
        assert_eq!(recon_loss(ReconLossKind::Square, &x, &x), 0.0);
        assert_eq!(recon_loss(ReconLossKind::L1, &x, &x), 0.0);
    }

    #[test]
    fn zero_lambdas_zero_losses() {
        let mut p = toy();
        let hyper = HyperParams {
            lambda0: 0.0,
            lambda1: 0.0,
            lambda2: 0.0,
            lambda3: 0.0,
            lambda4: 0.0,
            recon_loss_kind: ReconLossKind::Multinomial,
        };
        let mut rng = SeededRng::new(0);
        let report = total_objective(&mut p, &toy_batch_a(), &toy_batch_b(), &hyper, &mut rng, 0.0, false).unwrap();
        assert_eq!(report, LossBreakdown::default());
    }

    #[test]
    fn untrained_disc_loss_is_two_lambda_ln2() {
        let mut p = toy();
        // zero the discriminators so they output exactly 0.5
        let disc_ix: Vec<usize> = p.disc_indices();
        for &i in &disc_ix {
            p.blocks_mut()[i].weight.fill(0.0);
            p.blocks_mut()[i].bias.iter_mut().for_each(|v| *v = 0.0);
        }
        let hyper = HyperParams::default();
        let mut rng = SeededRng::new(1);
        let (disc_loss, _) = gan_losses(
            &mut p,
            Direction::AToB,
            &toy_batch_a(),
            &toy_batch_b(),
            &hyper,
            &mut rng,
            0.0,
            false,
            false,
        )
        .unwrap();
        let want = 2.0 * hyper.lambda0 * 2.0_f64.ln();
        assert!((disc_loss - want).abs() < 1e-6, "{disc_loss} vs {want}");
    }

    #[test]
    fn single_item_domains_have_zero_cycle_recon() {
        let arch = ArchSpec {
            input_dims: (1, 1),
            encoder_layer_sizes: vec![2],
            latent_dim: 1,
            generator_layer_sizes: vec![2],
            n_shared_encoder_layers: 1,
            n_shared_generator_layers: 1,
            discriminator_layer_sizes: vec![2],
        };
        let mut p = D2DParams::init(&arch, &mut SeededRng::new(5)).unwrap();
        let hyper = HyperParams {
            lambda3: 0.0, // isolate the reconstruction term
            lambda4: 1.0,
            ..HyperParams::default()
        };
        let x = Matrix::from_rows(&[&[1.0]]);
        let mut rng = SeededRng::new(2);
        let loss = cc_loss(&mut p, Domain::A, &x, &hyper, &mut rng, 0.0, false).unwrap();
        assert!(loss.abs() < 1e-9, "{loss}"); // softmax over one item is 1
    }

    #[test]
    fn breakdown_terms_sum_to_totals() {
        let mut p = toy();
        let hyper = HyperParams::default();
        let mut rng = SeededRng::new(3);
        let r = total_objective(&mut p, &toy_batch_a(), &toy_batch_b(), &hyper, &mut rng, 0.5, false).unwrap();
        let sum = r.vae_a + r.vae_b + r.gan_a + r.gan_b + r.cc_a + r.cc_b;
        assert!((sum - r.total_encgen).abs() < 1e-9);
        assert!(r.is_finite());
    }

    #[test]
    fn terms_reproduce_standalone_with_shared_stream() {
        let hyper = HyperParams::default();
        let (ba, bb) = (toy_batch_a(), toy_batch_b());
        let joint = {
            let mut p = toy();
            let mut rng = SeededRng::new(17);
            total_objective(&mut p, &ba, &bb, &hyper, &mut rng, 0.5, false).unwrap()
        };
        // replay the same stream, calling each term in the documented order
        let mut p = toy();
        let mut rng = SeededRng::new(17);
        let vae_a = vae_loss(&mut p, Domain::A, &ba, &hyper, &mut rng, 0.5, false).unwrap();
        let vae_b = vae_loss(&mut p, Domain::B, &bb, &hyper, &mut rng, 0.5, false).unwrap();
        let (_, gan_a) =
            gan_losses(&mut p, Direction::BToA, &bb, &ba, &hyper, &mut rng, 0.5, false, false).unwrap();
        let (_, gan_b) =
            gan_losses(&mut p, Direction::AToB, &ba, &bb, &hyper, &mut rng, 0.5, false, false).unwrap();
        let cc_a = cc_loss(&mut p, Domain::A, &ba, &hyper, &mut rng, 0.5, false).unwrap();
        let cc_b = cc_loss(&mut p, Domain::B, &bb, &hyper, &mut rng, 0.5, false).unwrap();
        assert_eq!(joint.vae_a, vae_a);
        assert_eq!(joint.vae_b, vae_b);
        assert_eq!(joint.gan_a, gan_a);
        assert_eq!(joint.gan_b, gan_b);
        assert_eq!(joint.cc_a, cc_a);
        assert_eq!(joint.cc_b, cc_b);
    }

    /// Checks accumulated analytic gradients for `indices` against central
    /// differences of `loss` (which must be pure given the same params).
    fn check_grads<F>(params: &mut D2DParams, indices: &[usize], mut loss: F, tol: f64)
    where
        F: FnMut(&mut D2DParams) -> f64,
    {
        let analytic = collect_grads(params.blocks(), indices);
        params.zero_grads();
        let numeric = params.finite_difference(indices, 1e-5, &mut loss);
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < tol, "max relative gradient error {err}");
    }

    #[test]
    fn vae_gradients_match_finite_differences() {
        for kind in ReconLossKind::ALL {
            let mut p = toy();
            let hyper = HyperParams {
                recon_loss_kind: kind,
                ..HyperParams::default()
            };
            let x = toy_batch_a();
            let seed = 21;
            vae_loss(&mut p, Domain::A, &x, &hyper, &mut SeededRng::new(seed), 0.0, true).unwrap();
            let ix = p.encgen_indices();
            check_grads(
                &mut p,
                &ix,
                |q| vae_loss(q, Domain::A, &x, &hyper, &mut SeededRng::new(seed), 0.0, false).unwrap(),
                1e-4,
            );
        }
    }

    #[test]
    fn gan_generator_side_gradients_match() {
        let mut p = toy();
        let hyper = HyperParams::default();
        let (ba, bb) = (toy_batch_a(), toy_batch_b());
        let seed = 31;
        gan_losses(&mut p, Direction::AToB, &ba, &bb, &hyper, &mut SeededRng::new(seed), 0.0, false, true)
            .unwrap();
        let ix = p.encgen_indices();
        check_grads(
            &mut p,
            &ix,
            |q| {
                gan_losses(q, Direction::AToB, &ba, &bb, &hyper, &mut SeededRng::new(seed), 0.0, false, false)
                    .unwrap()
                    .1
            },
            1e-4,
        );
    }

    #[test]
    fn gan_discriminator_side_gradients_match() {
        let mut p = toy();
        let hyper = HyperParams::default();
        let (ba, bb) = (toy_batch_a(), toy_batch_b());
        let seed = 41;
        gan_losses(&mut p, Direction::BToA, &bb, &ba, &hyper, &mut SeededRng::new(seed), 0.0, true, false)
            .unwrap();
        let ix = p.disc(Domain::A).to_vec();
        check_grads(
            &mut p,
            &ix,
            |q| {
                gan_losses(q, Direction::BToA, &bb, &ba, &hyper, &mut SeededRng::new(seed), 0.0, false, false)
                    .unwrap()
                    .0
            },
            1e-4,
        );
    }

    #[test]
    fn cc_gradients_match_through_both_hops() {
        let mut p = toy();
        let hyper = HyperParams::default();
        let x = toy_batch_b();
        let seed = 51;
        cc_loss(&mut p, Domain::B, &x, &hyper, &mut SeededRng::new(seed), 0.0, true).unwrap();
        let ix = p.encgen_indices();
        check_grads(
            &mut p,
            &ix,
            |q| cc_loss(q, Domain::B, &x, &hyper, &mut SeededRng::new(seed), 0.0, false).unwrap(),
            1e-4,
        );
    }

    #[test]
    fn joint_objective_gradients_match() {
        let mut p = toy();
        let hyper = HyperParams::default();
        let (ba, bb) = (toy_batch_a(), toy_batch_b());
        let seed = 61;
        total_objective(&mut p, &ba, &bb, &hyper, &mut SeededRng::new(seed), 0.0, true).unwrap();
        let ix = p.encgen_indices();
        check_grads(
            &mut p,
            &ix,
            |q| {
                total_objective(q, &ba, &bb, &hyper, &mut SeededRng::new(seed), 0.0, false)
                    .unwrap()
                    .total_encgen
            },
            1e-4,
        );
    }

    #[test]
    fn unshared_vae_ignores_other_domain() {
        // With no weight sharing and GAN/CC off, domain A's loss must be
        // flat in every domain-B parameter.
        let arch = ArchSpec {
            input_dims: (4, 5),
            encoder_layer_sizes: vec![3],
            latent_dim: 2,
            generator_layer_sizes: vec![3],
            n_shared_encoder_layers: 0,
            n_shared_generator_layers: 0,
            discriminator_layer_sizes: vec![3],
        };
        let mut p = D2DParams::init(&arch, &mut SeededRng::new(7)).unwrap();
        let hyper = HyperParams {
            lambda0: 0.0,
            lambda3: 0.0,
            lambda4: 0.0,
            ..HyperParams::default()
        };
        let x = toy_batch_a();
        let mut b_only: Vec<usize> = p.enc_private(Domain::B).to_vec();
        b_only.extend_from_slice(p.gen_private(Domain::B));
        let numeric = p.finite_difference(&b_only, 1e-5, |q| {
            vae_loss(q, Domain::A, &x, &hyper, &mut SeededRng::new(70), 0.0, false).unwrap()
        });
        for (gw, gb) in numeric {
            for g in gw.iter().chain(&gb) {
                assert!(g.abs() < 1e-8, "leaked gradient {g}");
            }
        }
    }

    #[test]
    fn hyper_validation_reports_all_problems() {
        let h = HyperParams {
            lambda0: -1.0,
            lambda3: -0.5,
            ..HyperParams::default()
        };
        let err = h.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lambda0") && msg.contains("lambda3"), "{msg}");
    }

    #[test]
    fn loss_kind_round_trip() {
        for kind in ReconLossKind::ALL {
            assert_eq!(kind.to_string().parse::<ReconLossKind>().unwrap(), kind);
        }
        assert!("gaussian".parse::<ReconLossKind>().is_err());
    }
}

