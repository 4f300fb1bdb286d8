//! Core pipeline for linguistic analysis of speech transcripts with
//! schizotypal/autistic score labels: POS statistics and embedding-coherence
//! features, PLS score prediction under nested leave-one-participant-out
//! cross-validation, and the comparison/ablation experiment tables.
//!
//! The crate is `no_std + alloc`: everything here is pure computation on
//! in-memory data. File formats, embedding backends with IO, and the CLI
//! live in the companion `oddspeech-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod corpus;
pub mod embed;
pub mod experiments;
pub mod features;
pub mod hashing;
pub mod labels;
pub mod linalg;
pub mod rng;
pub mod session;
pub mod stats;
pub mod synthetic;
pub mod text;

pub use corpus::Corpus;
pub use embed::{EmbeddingProvider, TestEmbedder};
pub use features::{FeatureGroup, FeatureVector, FEATURES};
pub use labels::{Gender, LabelAxis, LabelSet};
pub use session::{SessionRecord, Task};
pub use stats::{CorrelationReport, PlsModel, StandardizationParams};
pub use text::{CanonicalTag, TaggedEntry, TextConfig, TokenizedTranscript};

/// Default seed used by the command-line tools when none is given.
pub const DEFAULT_SEED: u64 = 42;

/// Canonical digest of a corpus for run manifests: participant labels and
/// session records hashed in sorted-id order.
pub fn corpus_digest(corpus: &Corpus) -> alloc::string::String {
    let mut hasher = hashing::RecordHasher::new("oddspeech-corpus-v1");
    for (pid, label) in corpus.labels() {
        hasher.text(pid);
        hasher.u64(label.spq_total() as u64);
        hasher.u64(label.spq_odd_speech() as u64);
        hasher.u64(label.srs_total() as u64);
        for axis in [
            labels::LabelAxis::SrsAwareness,
            labels::LabelAxis::SrsCognition,
            labels::LabelAxis::SrsCommunication,
            labels::LabelAxis::Age,
        ] {
            match label.axis_value(axis) {
                Some(v) => hasher.u64(v as u64 + 1),
                None => hasher.u64(0),
            };
        }
        hasher.text(label.gender().as_str());
    }
    let mut order: alloc::vec::Vec<usize> = (0..corpus.sessions().len()).collect();
    order.sort_by(|&a, &b| {
        corpus.sessions()[a]
            .session_id
            .cmp(&corpus.sessions()[b].session_id)
    });
    for i in order {
        let s = &corpus.sessions()[i];
        hasher.text(&s.session_id);
        hasher.text(&s.participant_id);
        hasher.text(s.task.as_str());
        hasher.u64(s.duration_limit_s as u64);
        hasher.text(&s.transcript);
        if let Some(tokens) = &s.tokens {
            for entry in tokens {
                hasher.text(&entry.surface);
                hasher.text(&entry.tag);
            }
        }
    }
    hasher.finish_hex()
}
