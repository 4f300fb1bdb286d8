//! Regenerates the bundled demo corpus under `data/synthetic/` from the
//! default seed. The committed files must match this output byte for byte
//! (a test enforces it).

use oddspeech_cli::synth::write_corpus_files;
use oddspeech_core::synthetic::{generate_corpus, SyntheticSpec};
use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let spec = SyntheticSpec::default();
    let corpus = generate_corpus(&spec);
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic");
    let sessions = root.join("sessions.jsonl");
    let labels = root.join("labels.jsonl");
    write_corpus_files(&corpus, &sessions, &labels)?;
    println!(
        "wrote {} sessions for {} participants (seed {})",
        corpus.sessions().len(),
        corpus.labels().len(),
        spec.seed
    );
    println!("  {}", sessions.display());
    println!("  {}", labels.display());
    Ok(())
}
