//! The whole file-based pipeline in one run, using the same functions the
//! `d2d` binary wraps: ingest raw ratings split by genre, train from a run
//! config, evaluate the checkpoint, and translate one user's history.
//!
//! ```sh
//! cargo run --release --example file_pipeline
//! ```

use std::fs;

use d2d::cli::{
    cmd_eval, cmd_ingest, cmd_predict, cmd_train, EvalArgs, IngestArgs, PredictArgs, SplitChoice,
    TrainArgs,
};

fn main() -> d2d::Result<()> {
    let tmp = tempfile::tempdir().map_err(d2d::Error::Io)?;
    let root = tmp.path();

    // two hundred users in two taste camps rate romance and thriller movies;
    // movie 900 carries both genres and is therefore excluded from both domains
    let mut movies = String::from("900::Borderline (1999)::Romance|Thriller\n");
    for m in 0..30 {
        movies += &format!("{}::Romance #{m} (199{})::Romance\n", 100 + m, m % 10);
        movies += &format!("{}::Thriller #{m} (199{})::Thriller\n", 200 + m, m % 10);
    }
    let mut ratings = String::new();
    for u in 0..200 {
        let camp = u % 2;
        for j in 0..8 {
            let pick = (u / 2 + 3 * j) % 15 + camp * 15;
            ratings += &format!("u{u:03}::{}::5::0\n", 100 + pick);
            ratings += &format!("u{u:03}::{}::4::0\n", 200 + pick);
        }
        ratings += &format!("u{u:03}::900::5::0\n");
    }
    fs::write(root.join("movies.dat"), movies).map_err(d2d::Error::Io)?;
    fs::write(root.join("ratings.dat"), ratings).map_err(d2d::Error::Io)?;

    println!("== ingest ==");
    cmd_ingest(&IngestArgs {
        ratings: Some(root.join("ratings.dat")),
        movies: Some(root.join("movies.dat")),
        genre_a: Some("Romance".to_string()),
        genre_b: Some("Thriller".to_string()),
        out: root.join("data"),
        ..IngestArgs::default()
    })?;

    fs::write(
        root.join("run.toml"),
        "[data]\ncache = \"data/dataset.txt\"\n\n\
         [arch]\nencoder_layer_sizes = [32, 16]\nlatent_dim = 8\n\
         generator_layer_sizes = [16, 32]\ndiscriminator_layer_sizes = [16]\n\n\
         [train]\nepochs = 30\nbatch_size = 35\neval_k_for_selection = 10\n\n\
         [output]\ndir = \"run\"\n",
    )
    .map_err(d2d::Error::Io)?;

    println!("\n== train ==");
    let outcome = cmd_train(&TrainArgs { config: root.join("run.toml"), ..TrainArgs::default() })?;

    println!("\n== eval (test split) ==");
    cmd_eval(&EvalArgs {
        checkpoint: outcome.checkpoint_path.clone(),
        data: root.join("data/dataset.txt"),
        k: Some(vec![5, 10]),
        split: Some(SplitChoice::Test),
        ..EvalArgs::default()
    })?;

    println!("\n== predict: romance clicks in, thrillers out ==");
    cmd_predict(&PredictArgs {
        checkpoint: outcome.checkpoint_path,
        items: vec!["100".into(), "103".into(), "106".into()],
        k: Some(5),
        ..PredictArgs::default()
    })?;

    println!("\nartifacts under {}:", root.display());
    for dir in ["data", "run"] {
        for entry in fs::read_dir(root.join(dir)).map_err(d2d::Error::Io)? {
            println!("  {}/{}", dir, entry.map_err(d2d::Error::Io)?.file_name().to_string_lossy());
        }
    }
    Ok(())
}
