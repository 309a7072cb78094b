//! Writes the default synthetic corpus (train/valid/test/concepts TSVs)
//! to the directory given as the first argument, for trying the CLI
//! without a real dataset.

use enginekgi::synth::{generate, SynthConfig};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "corpus".to_string());
    std::fs::create_dir_all(&dir).expect("create output directory");
    let data = generate(&SynthConfig::default());
    data.write_dir(&dir).expect("write corpus files");
    println!(
        "wrote {} train / {} valid / {} test triples and {} concept pairs to {dir}",
        data.train.len(),
        data.valid.len(),
        data.test.len(),
        data.concepts.len()
    );
}
