//! Corpus and label-file ingestion: JSONL (canonical) and CSV, UTF-8 with
//! tolerated BOM, with per-row validation. Bad rows are collected as rejects
//! carrying their line numbers instead of aborting the whole load.

use anyhow::{bail, Context, Result};
use oddspeech_core::labels::{Gender, LabelSet};
use oddspeech_core::session::{SessionRecord, Task};
use oddspeech_core::text::TaggedEntry;
use oddspeech_core::Corpus;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Jsonl,
    Csv,
}

impl FileFormat {
    /// Picks the format from the file extension; JSONL is the default.
    pub fn infer(path: &Path) -> FileFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => FileFormat::Csv,
            _ => FileFormat::Jsonl,
        }
    }

    pub fn parse(s: &str) -> Option<FileFormat> {
        match s {
            "jsonl" => Some(FileFormat::Jsonl),
            "csv" => Some(FileFormat::Csv),
            _ => None,
        }
    }
}

/// One rejected input row.
#[derive(Debug, Clone)]
pub struct Reject {
    pub file: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.line, self.message)
    }
}

#[derive(Debug)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    pub rejects: Vec<Reject>,
    pub sessions_loaded: usize,
    pub labels_loaded: usize,
}

impl LoadOutcome {
    /// Errors when any row was rejected; analysis commands require a clean
    /// corpus so results are never computed on silently filtered data.
    pub fn require_clean(self) -> Result<Corpus> {
        if self.rejects.is_empty() {
            return Ok(self.corpus);
        }
        let mut lines = String::new();
        for reject in self.rejects.iter().take(20) {
            lines.push_str(&format!("  {reject}\n"));
        }
        if self.rejects.len() > 20 {
            lines.push_str(&format!("  ... and {} more\n", self.rejects.len() - 20));
        }
        bail!("{} rejected row(s):\n{lines}", self.rejects.len());
    }
}

#[derive(Debug, Deserialize)]
struct TokenWire {
    surface: String,
    tag: String,
    #[serde(default)]
    negation: Option<bool>,
}

#[derive(Debug, Deserialize)]
struct SessionWire {
    participant_id: String,
    session_id: String,
    task: String,
    duration_limit_s: u32,
    #[serde(default)]
    measured_duration_s: Option<f64>,
    transcript: String,
    #[serde(default)]
    tokens: Option<Vec<TokenWire>>,
    #[serde(default)]
    token_timestamps: Option<Vec<(usize, f64)>>,
    #[serde(default)]
    retake: Option<bool>,
}

#[derive(Debug, Deserialize)]
struct LabelWire {
    participant_id: String,
    spq_total: u32,
    spq_odd_speech: u32,
    srs_total: u32,
    #[serde(default)]
    srs_awareness: Option<u32>,
    #[serde(default)]
    srs_cognition: Option<u32>,
    #[serde(default)]
    srs_communication: Option<u32>,
    #[serde(default)]
    age: Option<u32>,
    #[serde(default)]
    gender: Option<String>,
}

// CSV rows carry tokens and timestamps as embedded JSON text.
#[derive(Debug, Deserialize)]
struct SessionCsvWire {
    participant_id: String,
    session_id: String,
    task: String,
    duration_limit_s: u32,
    #[serde(default)]
    measured_duration_s: Option<f64>,
    transcript: String,
    #[serde(default)]
    tokens: Option<String>,
    #[serde(default)]
    token_timestamps: Option<String>,
    #[serde(default)]
    retake: Option<bool>,
}

fn strip_bom(text: &str) -> &str {
    text.strip_prefix('\u{feff}').unwrap_or(text)
}

fn convert_session(wire: SessionWire) -> std::result::Result<SessionRecord, String> {
    let task = Task::parse(&wire.task).ok_or_else(|| format!("unknown task '{}'", wire.task))?;
    let record = SessionRecord {
        participant_id: wire.participant_id,
        session_id: wire.session_id,
        task,
        duration_limit_s: wire.duration_limit_s,
        measured_duration_s: wire.measured_duration_s,
        transcript: wire.transcript,
        tokens: wire.tokens.map(|entries| {
            entries
                .into_iter()
                .map(|t| TaggedEntry {
                    surface: t.surface,
                    tag: t.tag,
                    negation: t.negation,
                })
                .collect()
        }),
        token_timestamps: wire.token_timestamps,
        retake: wire.retake.unwrap_or(false),
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

fn convert_label(wire: LabelWire) -> std::result::Result<(String, LabelSet), String> {
    let gender = match &wire.gender {
        Some(g) => Gender::parse(g).ok_or_else(|| format!("unknown gender '{g}'"))?,
        None => Gender::Unspecified,
    };
    if wire.participant_id.trim().is_empty() {
        return Err("participant_id must be non-empty".to_string());
    }
    let labels = LabelSet::new(
        wire.spq_total,
        wire.spq_odd_speech,
        wire.srs_total,
        wire.srs_awareness,
        wire.srs_cognition,
        wire.srs_communication,
        wire.age,
        gender,
    )
    .map_err(|e| e.to_string())?;
    Ok((wire.participant_id, labels))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(
    path: &Path,
    rejects: &mut Vec<Reject>,
) -> Result<Vec<(usize, T)>> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let text = strip_bom(&raw);
    let file = path.display().to_string();
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(trimmed) {
            Ok(row) => rows.push((line_no, row)),
            Err(e) => rejects.push(Reject {
                file: file.clone(),
                line: line_no,
                message: format!("parse error: {e}"),
            }),
        }
    }
    Ok(rows)
}

fn read_csv<T: serde::de::DeserializeOwned>(
    path: &Path,
    rejects: &mut Vec<Reject>,
) -> Result<Vec<(usize, T)>> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let text = strip_bom(&raw);
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (idx, record) in reader.deserialize::<T>().enumerate() {
        // Line 1 is the header.
        let line_no = idx + 2;
        match record {
            Ok(row) => rows.push((line_no, row)),
            Err(e) => rejects.push(Reject {
                file: file.clone(),
                line: line_no,
                message: format!("parse error: {e}"),
            }),
        }
    }
    Ok(rows)
}

fn csv_session_to_wire(row: SessionCsvWire) -> std::result::Result<SessionWire, String> {
    let tokens = match row.tokens.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(json) => Some(
            serde_json::from_str::<Vec<TokenWire>>(json)
                .map_err(|e| format!("tokens column: {e}"))?,
        ),
    };
    let token_timestamps = match row.token_timestamps.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(json) => Some(
            serde_json::from_str::<Vec<(usize, f64)>>(json)
                .map_err(|e| format!("token_timestamps column: {e}"))?,
        ),
    };
    Ok(SessionWire {
        participant_id: row.participant_id,
        session_id: row.session_id,
        task: row.task,
        duration_limit_s: row.duration_limit_s,
        measured_duration_s: row.measured_duration_s,
        transcript: row.transcript,
        tokens,
        token_timestamps,
        retake: row.retake,
    })
}

/// Loads and validates the sessions and labels files.
///
/// Per-row failures (malformed rows, schema errors, invariant violations,
/// unknown tasks, duplicate ids, sessions without labels) become line-numbered
/// rejects; surviving rows form the returned corpus.
pub fn load_corpus(
    corpus_path: &Path,
    labels_path: &Path,
    format: Option<FileFormat>,
) -> Result<LoadOutcome> {
    let mut rejects = Vec::new();

    let labels_format = format.unwrap_or_else(|| FileFormat::infer(labels_path));
    let label_rows: Vec<(usize, LabelWire)> = match labels_format {
        FileFormat::Jsonl => read_jsonl(labels_path, &mut rejects)?,
        FileFormat::Csv => read_csv(labels_path, &mut rejects)?,
    };
    let labels_file = labels_path.display().to_string();
    let mut labels: BTreeMap<String, LabelSet> = BTreeMap::new();
    let mut labels_loaded = 0usize;
    for (line, wire) in label_rows {
        match convert_label(wire) {
            Ok((pid, set)) => match labels.entry(pid) {
                std::collections::btree_map::Entry::Occupied(entry) => {
                    rejects.push(Reject {
                        file: labels_file.clone(),
                        line,
                        message: format!("duplicate participant_id '{}'", entry.key()),
                    });
                }
                std::collections::btree_map::Entry::Vacant(entry) => {
                    entry.insert(set);
                    labels_loaded += 1;
                }
            },
            Err(message) => rejects.push(Reject {
                file: labels_file.clone(),
                line,
                message,
            }),
        }
    }

    let corpus_format = format.unwrap_or_else(|| FileFormat::infer(corpus_path));
    let session_rows: Vec<(usize, SessionWire)> = match corpus_format {
        FileFormat::Jsonl => read_jsonl(corpus_path, &mut rejects)?,
        FileFormat::Csv => {
            let csv_rows: Vec<(usize, SessionCsvWire)> = read_csv(corpus_path, &mut rejects)?;
            let mut out = Vec::new();
            for (line, row) in csv_rows {
                match csv_session_to_wire(row) {
                    Ok(wire) => out.push((line, wire)),
                    Err(message) => rejects.push(Reject {
                        file: corpus_path.display().to_string(),
                        line,
                        message,
                    }),
                }
            }
            out
        }
    };
    let corpus_file = corpus_path.display().to_string();
    let mut sessions: Vec<SessionRecord> = Vec::new();
    let mut session_ids: BTreeSet<String> = BTreeSet::new();
    let mut slots: BTreeSet<(String, Task, u32)> = BTreeSet::new();
    for (line, wire) in session_rows {
        let record = match convert_session(wire) {
            Ok(r) => r,
            Err(message) => {
                rejects.push(Reject {
                    file: corpus_file.clone(),
                    line,
                    message,
                });
                continue;
            }
        };
        if !labels.contains_key(&record.participant_id) {
            rejects.push(Reject {
                file: corpus_file.clone(),
                line,
                message: format!("participant '{}' has no label set", record.participant_id),
            });
            continue;
        }
        if session_ids.contains(&record.session_id) {
            rejects.push(Reject {
                file: corpus_file.clone(),
                line,
                message: format!("duplicate session_id '{}'", record.session_id),
            });
            continue;
        }
        if !record.retake {
            let slot = (
                record.participant_id.clone(),
                record.task,
                record.duration_limit_s,
            );
            if slots.contains(&slot) {
                rejects.push(Reject {
                    file: corpus_file.clone(),
                    line,
                    message: format!(
                        "session '{}' repeats a (participant, task, duration) slot without a retake marker",
                        record.session_id
                    ),
                });
                continue;
            }
            slots.insert(slot);
        }
        session_ids.insert(record.session_id.clone());
        sessions.push(record);
    }
    let sessions_loaded = sessions.len();

    // Referenced is checked row-by-row above, so construction only fails on
    // a loader bug; surface that loudly rather than masking it as a reject.
    let corpus = Corpus::new(sessions, labels)
        .map_err(|e| anyhow::anyhow!("internal: corpus invariant after row filtering: {e}"))?;
    Ok(LoadOutcome {
        corpus,
        rejects,
        sessions_loaded,
        labels_loaded,
    })
}
