//! The labeled session corpus: cross-record validation, descriptive
//! statistics, cutoff flagging, and between-label correlations.

use crate::labels::{LabelAxis, LabelSet};
use crate::session::{SessionRecord, Task};
use crate::stats::{mean_sd, spearman, CorrelationReport, StatsError};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Default screening cutoffs (inclusive) for flagging candidates.
pub const DEFAULT_SRS_CUTOFF: u32 = 81;
pub const DEFAULT_SPQ_CUTOFF: u32 = 41;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    DuplicateSessionId {
        session_id: String,
    },
    /// Same (participant, task, duration) twice without a retake marker.
    DuplicateSlot {
        session_id: String,
    },
    MissingLabels {
        participant_id: String,
    },
    InvalidSession {
        session_id: String,
        message: String,
    },
    EmptyCorpus,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::DuplicateSessionId { session_id } => {
                write!(f, "duplicate session_id '{session_id}'")
            }
            CorpusError::DuplicateSlot { session_id } => write!(
                f,
                "session '{session_id}' repeats a (participant, task, duration) slot without a retake marker"
            ),
            CorpusError::MissingLabels { participant_id } => {
                write!(f, "participant '{participant_id}' has sessions but no label set")
            }
            CorpusError::InvalidSession {
                session_id,
                message,
            } => write!(f, "session '{session_id}': {message}"),
            CorpusError::EmptyCorpus => f.write_str("corpus has no sessions"),
        }
    }
}

impl core::error::Error for CorpusError {}

/// An immutable, validated corpus. Safe to share across concurrent readers.
#[derive(Debug, Clone)]
pub struct Corpus {
    sessions: Vec<SessionRecord>,
    labels: BTreeMap<String, LabelSet>,
}

impl Corpus {
    /// Validates per-record and cross-record invariants: unique session ids,
    /// unique (participant, task, duration) slots unless marked retakes, and
    /// labels present for every referenced participant.
    pub fn new(
        sessions: Vec<SessionRecord>,
        labels: BTreeMap<String, LabelSet>,
    ) -> Result<Corpus, CorpusError> {
        let mut ids = BTreeSet::new();
        let mut slots = BTreeSet::new();
        for session in &sessions {
            session
                .validate()
                .map_err(|e| CorpusError::InvalidSession {
                    session_id: session.session_id.clone(),
                    message: format!("{e}"),
                })?;
            if !ids.insert(session.session_id.clone()) {
                return Err(CorpusError::DuplicateSessionId {
                    session_id: session.session_id.clone(),
                });
            }
            if !session.retake {
                let slot = (
                    session.participant_id.clone(),
                    session.task,
                    session.duration_limit_s,
                );
                if !slots.insert(slot) {
                    return Err(CorpusError::DuplicateSlot {
                        session_id: session.session_id.clone(),
                    });
                }
            }
            if !labels.contains_key(&session.participant_id) {
                return Err(CorpusError::MissingLabels {
                    participant_id: session.participant_id.clone(),
                });
            }
        }
        Ok(Corpus { sessions, labels })
    }

    pub fn sessions(&self) -> &[SessionRecord] {
        &self.sessions
    }

    pub fn labels(&self) -> &BTreeMap<String, LabelSet> {
        &self.labels
    }

    pub fn label_of(&self, participant_id: &str) -> Option<&LabelSet> {
        self.labels.get(participant_id)
    }

    /// Participants referenced by at least one session, sorted.
    pub fn participants_with_sessions(&self) -> Vec<&str> {
        self.sessions
            .iter()
            .map(|s| s.participant_id.as_str())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn session_count_by_task(&self) -> BTreeMap<Task, usize> {
        let mut counts: BTreeMap<Task, usize> = Task::ALL.iter().map(|&t| (t, 0)).collect();
        for s in &self.sessions {
            *counts.get_mut(&s.task).expect("all tasks present") += 1;
        }
        counts
    }

    /// Distinct duration limits present, ascending.
    pub fn duration_buckets(&self) -> Vec<u32> {
        self.sessions
            .iter()
            .map(|s| s.duration_limit_s)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// One row of the descriptive statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelStat {
    pub axis: LabelAxis,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemographicSummary {
    pub stats: Vec<LabelStat>,
    pub gender_counts: BTreeMap<&'static str, usize>,
    pub participant_count: usize,
    pub session_count: usize,
}

/// Per-label mean, sample SD, observed range, and gender counts over the
/// participants in the label map.
pub fn summarize(corpus: &Corpus) -> Result<DemographicSummary, CorpusError> {
    if corpus.labels.is_empty() || corpus.sessions.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let axes = [
        LabelAxis::Age,
        LabelAxis::SrsTotal,
        LabelAxis::SpqTotal,
        LabelAxis::OddSpeech,
        LabelAxis::SrsAwareness,
        LabelAxis::SrsCognition,
        LabelAxis::SrsCommunication,
    ];
    let mut stats = Vec::new();
    for axis in axes {
        let values: Vec<f64> = corpus
            .labels
            .values()
            .filter_map(|l| l.axis_value(axis))
            .collect();
        if values.is_empty() {
            continue;
        }
        let (mean, sd) = mean_sd(&values);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        stats.push(LabelStat {
            axis,
            n: values.len(),
            mean,
            sd,
            min,
            max,
        });
    }
    let mut gender_counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    for label in corpus.labels.values() {
        *gender_counts.entry(label.gender().as_str()).or_insert(0) += 1;
    }
    Ok(DemographicSummary {
        stats,
        gender_counts,
        participant_count: corpus.labels.len(),
        session_count: corpus.sessions.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutoffFlags {
    pub srs_candidate: bool,
    pub spq_candidate: bool,
}

/// Flags participants at or above the screening cutoffs (inclusive).
pub fn flag_cutoffs(
    corpus: &Corpus,
    srs_cutoff: u32,
    spq_cutoff: u32,
) -> BTreeMap<String, CutoffFlags> {
    corpus
        .labels
        .iter()
        .map(|(pid, label)| {
            (
                pid.clone(),
                CutoffFlags {
                    srs_candidate: label.srs_total() >= srs_cutoff,
                    spq_candidate: label.spq_total() >= spq_cutoff,
                },
            )
        })
        .collect()
}

/// The outcome of one label-correlation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelCorrelation {
    pub a: LabelAxis,
    pub b: LabelAxis,
    pub report: Result<CorrelationReport, StatsError>,
}

/// Spearman correlation between label axes, one value per participant.
///
/// Participants missing either axis are excluded pairwise; a pair with fewer
/// than three complete participants reports an insufficient-sample error in
/// its cell.
pub fn label_correlations(
    corpus: &Corpus,
    pairs: &[(LabelAxis, LabelAxis)],
    alpha: f64,
) -> Vec<LabelCorrelation> {
    pairs
        .iter()
        .map(|&(a, b)| {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for label in corpus.labels.values() {
                if let (Some(x), Some(y)) = (label.axis_value(a), label.axis_value(b)) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            LabelCorrelation {
                a,
                b,
                report: spearman(&xs, &ys, alpha),
            }
        })
        .collect()
}
