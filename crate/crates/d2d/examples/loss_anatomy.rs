//! Dissects the training objective on a freshly initialized model: the two
//! VAE terms, the two adversarial terms, the two cycle-consistency terms,
//! and how the choice of reconstruction loss changes the numbers.
//!
//! ```sh
//! cargo run --example loss_anatomy
//! ```

use d2d::model::{total_objective, ArchSpec, D2DParams, HyperParams, ReconLossKind};
use d2d::numeric::{Matrix, SeededRng};

fn click_batch(rng: &mut SeededRng, rows: usize, cols: usize, density: f64) -> Matrix {
    let mut x = Matrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.uniform_01() < density {
                x.set(r, c, 1.0);
            }
        }
    }
    x
}

fn main() -> d2d::Result<()> {
    let arch = ArchSpec::small(30, 24);
    let mut rng = SeededRng::new(3);
    let mut params = D2DParams::init(&arch, &mut rng)?;
    let batch_a = click_batch(&mut rng, 16, 30, 0.2);
    let batch_b = click_batch(&mut rng, 16, 24, 0.2);

    let hyper = HyperParams::default();
    println!(
        "weights: kl={} recon={} gan={} cc_kl={} cc_recon={}\n",
        hyper.lambda1, hyper.lambda2, hyper.lambda0, hyper.lambda3, hyper.lambda4
    );

    println!(
        "{:>12}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}  {:>10}  {:>10}",
        "recon loss", "vae_a", "vae_b", "gan_a", "gan_b", "cc_a", "cc_b", "enc+gen", "disc"
    );
    for kind in ReconLossKind::ALL {
        let h = HyperParams { recon_loss_kind: kind, ..hyper };
        // same noise for every row so the numbers differ only by the loss
        let mut noise = SeededRng::new(42);
        let b = total_objective(&mut params, &batch_a, &batch_b, &h, &mut noise, 0.0, false)?;
        println!(
            "{:>12}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}  {:>9.4}  {:>10.4}  {:>10.4}",
            kind.to_string(),
            b.vae_a,
            b.vae_b,
            b.gan_a,
            b.gan_b,
            b.cc_a,
            b.cc_b,
            b.total_encgen,
            b.total_disc
        );
    }

    println!("\nDropping weights to zero removes terms entirely:");
    let ablated = HyperParams { lambda0: 0.0, lambda3: 0.0, lambda4: 0.0, ..hyper };
    let mut noise = SeededRng::new(42);
    let b = total_objective(&mut params, &batch_a, &batch_b, &ablated, &mut noise, 0.0, false)?;
    println!(
        "vae-only: vae_a={:.4} vae_b={:.4} gan_a={:.1} gan_b={:.1} cc_a={:.1} cc_b={:.1}",
        b.vae_a, b.vae_b, b.gan_a, b.gan_b, b.cc_a, b.cc_b
    );
    Ok(())
}
