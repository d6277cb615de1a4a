//! Prints the parameter layout of the coupled autoencoders: which blocks
//! are private to a domain and which are shared across both, and the path a
//! click vector takes when it is translated.
//!
//! ```sh
//! cargo run --example model_anatomy
//! ```

use d2d::model::{ArchSpec, D2DParams, Domain};
use d2d::numeric::SeededRng;

fn main() -> d2d::Result<()> {
    let arch = ArchSpec::movielens(120, 90);
    println!(
        "movie-catalog preset on 120 x 90 items: encoder {:?} -> latent {} -> generator {:?}\n",
        arch.encoder_layer_sizes, arch.latent_dim, arch.generator_layer_sizes
    );

    let params = D2DParams::init(&arch, &mut SeededRng::new(0))?;
    println!("{:<22} {:>12} {:>10}", "block", "shape", "params");
    for b in params.blocks() {
        println!(
            "{:<22} {:>12} {:>10}",
            b.name,
            format!("{}x{}", b.out_dim(), b.in_dim()),
            b.n_params()
        );
    }
    println!("{:<22} {:>12} {:>10}\n", "total", "", params.n_params());

    for d in [Domain::A, Domain::B] {
        let enc: Vec<&str> =
            params.enc_private(d).iter().map(|&i| params.blocks()[i].name.as_str()).collect();
        let gen: Vec<&str> =
            params.gen_private(d).iter().map(|&i| params.blocks()[i].name.as_str()).collect();
        let disc: Vec<&str> =
            params.disc(d).iter().map(|&i| params.blocks()[i].name.as_str()).collect();
        println!("domain {d:?}: private encoder head {enc:?}");
        println!("          private generator tail {gen:?}");
        println!("          discriminator {disc:?}");
    }

    println!(
        "\nTranslating A->B runs: A's private encoder head, the shared encoder tail\n\
         and latent projection, the shared generator head, then B's private\n\
         generator tail. The discriminators never share weights."
    );
    Ok(())
}
