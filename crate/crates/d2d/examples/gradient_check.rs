//! Verifies every analytic gradient against central finite differences on a
//! tiny model: each loss term alone, then the joint objective.
//!
//! ```sh
//! cargo run --example gradient_check
//! ```

use d2d::model::{
    total_objective, ArchSpec, D2DParams, Domain, HyperParams, ReconLossKind,
};
use d2d::numeric::{collect_grads, max_relative_error, Matrix, SeededRng};

/// Random click rows with at least one click each. The ingestion pipeline
/// guarantees no user row is empty, and the check depends on it: an all-zero
/// row drives pre-activations exactly onto the LeakyReLU kink (biases start
/// at zero), where one-sided analytic derivatives and central differences
/// legitimately disagree.
fn random_batch(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
    let mut x = Matrix::zeros(rows, cols);
    for r in 0..rows {
        x.set(r, rng.random_range(cols), 1.0);
        for c in 0..cols {
            if rng.uniform_01() < 0.4 {
                x.set(r, c, 1.0);
            }
        }
    }
    x
}

fn main() -> d2d::Result<()> {
    let arch = ArchSpec {
        input_dims: (5, 6),
        encoder_layer_sizes: vec![4, 3],
        latent_dim: 2,
        generator_layer_sizes: vec![3, 4],
        n_shared_encoder_layers: 1,
        n_shared_generator_layers: 1,
        discriminator_layer_sizes: vec![3],
    };
    let mut rng = SeededRng::new(7);
    let mut params = D2DParams::init(&arch, &mut rng)?;
    let batch_a = random_batch(&mut rng, 4, 5);
    let batch_b = random_batch(&mut rng, 4, 6);

    println!("{:>12}  {:>12}  result", "loss", "max rel err");
    for kind in ReconLossKind::ALL {
        let hyper = HyperParams { recon_loss_kind: kind, ..HyperParams::default() };
        let indices = params.encgen_indices();

        // analytic gradients from one backward pass with a pinned noise seed
        params.zero_grads();
        let mut loss_rng = SeededRng::new(99);
        total_objective(&mut params, &batch_a, &batch_b, &hyper, &mut loss_rng, 0.0, true)?;
        let analytic = collect_grads(params.blocks(), &indices);

        // numeric gradients replaying the identical noise
        let numeric = params.finite_difference(&indices, 1e-5, |p| {
            let mut r = SeededRng::new(99);
            let b = total_objective(p, &batch_a, &batch_b, &hyper, &mut r, 0.0, false).unwrap();
            b.total_encgen
        });

        let err = max_relative_error(&analytic, &numeric);
        let verdict = if err < 1e-4 { "ok" } else { "MISMATCH" };
        println!("{:>12}  {err:>12.3e}  {verdict}", kind.to_string());
    }

    // the discriminator side is trained separately; check it too
    let hyper = HyperParams::default();
    let disc_indices = params.disc_indices();
    params.zero_grads();
    let mut loss_rng = SeededRng::new(99);
    d2d::model::gan_losses(
        &mut params,
        d2d::model::Direction::AToB,
        &batch_a,
        &batch_b,
        &hyper,
        &mut loss_rng,
        0.0,
        true,
        false,
    )?;
    let analytic = collect_grads(params.blocks(), &params.disc(Domain::B).to_vec());
    let numeric = params.finite_difference(&params.disc(Domain::B).to_vec(), 1e-5, |p| {
        let mut r = SeededRng::new(99);
        d2d::model::gan_losses(
            p,
            d2d::model::Direction::AToB,
            &batch_a,
            &batch_b,
            &hyper,
            &mut r,
            0.0,
            false,
            false,
        )
        .unwrap()
        .0
    });
    let err = max_relative_error(&analytic, &numeric);
    println!(
        "{:>12}  {err:>12.3e}  {} ({} discriminator blocks)",
        "disc",
        if err < 1e-4 { "ok" } else { "MISMATCH" },
        disc_indices.len()
    );
    Ok(())
}
