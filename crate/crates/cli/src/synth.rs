//! Serialization of in-memory corpora to the canonical JSONL files.
//!
//! The bundled demo corpus under `data/synthetic/` is generated with
//! [`oddspeech_core::synthetic`] and written through here; a test asserts
//! the committed files match regeneration byte for byte.

use anyhow::Result;
use oddspeech_core::labels::LabelAxis;
use oddspeech_core::Corpus;
use serde_json::json;
use std::path::Path;

fn session_json(session: &oddspeech_core::SessionRecord) -> serde_json::Value {
    let mut object = serde_json::Map::new();
    object.insert("participant_id".into(), json!(session.participant_id));
    object.insert("session_id".into(), json!(session.session_id));
    object.insert("task".into(), json!(session.task.as_str()));
    object.insert("duration_limit_s".into(), json!(session.duration_limit_s));
    if let Some(d) = session.measured_duration_s {
        object.insert("measured_duration_s".into(), json!(d));
    }
    object.insert("transcript".into(), json!(session.transcript));
    if let Some(tokens) = &session.tokens {
        let entries: Vec<serde_json::Value> = tokens
            .iter()
            .map(|t| match t.negation {
                Some(n) => json!({"surface": t.surface, "tag": t.tag, "negation": n}),
                None => json!({"surface": t.surface, "tag": t.tag}),
            })
            .collect();
        object.insert("tokens".into(), json!(entries));
    }
    if let Some(ts) = &session.token_timestamps {
        object.insert("token_timestamps".into(), json!(ts));
    }
    if session.retake {
        object.insert("retake".into(), json!(true));
    }
    serde_json::Value::Object(object)
}

fn label_json(pid: &str, label: &oddspeech_core::LabelSet) -> serde_json::Value {
    let mut object = serde_json::Map::new();
    object.insert("participant_id".into(), json!(pid));
    object.insert("spq_total".into(), json!(label.spq_total()));
    object.insert("spq_odd_speech".into(), json!(label.spq_odd_speech()));
    object.insert("srs_total".into(), json!(label.srs_total()));
    for (key, axis) in [
        ("srs_awareness", LabelAxis::SrsAwareness),
        ("srs_cognition", LabelAxis::SrsCognition),
        ("srs_communication", LabelAxis::SrsCommunication),
    ] {
        if let Some(v) = label.axis_value(axis) {
            object.insert(key.into(), json!(v as u32));
        }
    }
    if let Some(age) = label.age() {
        object.insert("age".into(), json!(age));
    }
    object.insert("gender".into(), json!(label.gender().as_str()));
    serde_json::Value::Object(object)
}

/// Writes the two canonical JSONL files for a corpus.
pub fn write_corpus_files(corpus: &Corpus, sessions_path: &Path, labels_path: &Path) -> Result<()> {
    let mut sessions = String::new();
    for session in corpus.sessions() {
        sessions.push_str(&serde_json::to_string(&session_json(session))?);
        sessions.push('\n');
    }
    crate::reports::write_file(sessions_path, &sessions)?;

    let mut labels = String::new();
    for (pid, label) in corpus.labels() {
        labels.push_str(&serde_json::to_string(&label_json(pid, label))?);
        labels.push('\n');
    }
    crate::reports::write_file(labels_path, &labels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::load_corpus;
    use oddspeech_core::synthetic::{generate_corpus, SyntheticSpec};

    #[test]
    fn written_files_load_back_identically() {
        let corpus = generate_corpus(&SyntheticSpec {
            participants: 3,
            ..Default::default()
        });
        let dir = tempfile::tempdir().unwrap();
        let sessions = dir.path().join("sessions.jsonl");
        let labels = dir.path().join("labels.jsonl");
        write_corpus_files(&corpus, &sessions, &labels).unwrap();
        let loaded = load_corpus(&sessions, &labels, None)
            .unwrap()
            .require_clean()
            .unwrap();
        assert_eq!(
            oddspeech_core::corpus_digest(&corpus),
            oddspeech_core::corpus_digest(&loaded)
        );
        assert_eq!(corpus.sessions().len(), loaded.sessions().len());
    }

    #[test]
    fn writing_twice_is_byte_identical() {
        let corpus = generate_corpus(&SyntheticSpec {
            participants: 2,
            ..Default::default()
        });
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let al = dir.path().join("al.jsonl");
        let b = dir.path().join("b.jsonl");
        let bl = dir.path().join("bl.jsonl");
        write_corpus_files(&corpus, &a, &al).unwrap();
        write_corpus_files(&corpus, &b, &bl).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(std::fs::read(&al).unwrap(), std::fs::read(&bl).unwrap());
    }
}
