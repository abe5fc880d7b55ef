//! Load every sample model shipped in `models/` and report what it holds.
//!
//! cargo run --example model_files

use std::path::Path;

use beliefspace::cli::{load_model, Model};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .expect("models directory")
        .flatten()
        .map(|e| e.path())
        .collect();
    paths.sort();
    for path in paths {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match load_model(&path) {
            Ok(model) => {
                let extra = match &model {
                    Model::BeliefDistPair { u, v, .. } => format!("supports {} and {}", u.len(), v.len()),
                    Model::FiniteMdp { actions, .. } => format!("{} actions", actions.len()),
                    Model::Pomdp { pomdp, .. } => format!("{} signals", pomdp.n_signals()),
                    Model::InformedGame { game, .. } => format!("{}x{} stage game", game.n_rows(), game.n_cols()),
                    _ => String::new(),
                };
                println!(
                    "{name:<28} {:<17} {} states  {extra}",
                    model.kind().name(),
                    model.states().len()
                );
            }
            Err(e) => println!("{name:<28} error: {e}"),
        }
    }
}
