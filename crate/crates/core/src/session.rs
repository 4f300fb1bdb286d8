//! Recording sessions: one speech recording by one participant on one task.

use crate::text::TaggedEntry;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// The elicitation topic of a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Dream,
    Favorite,
    Negative,
    Mistake,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Dream, Task::Favorite, Task::Negative, Task::Mistake];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Dream => "dream",
            Task::Favorite => "favorite",
            Task::Negative => "negative",
            Task::Mistake => "mistake",
        }
    }

    /// Strict parse; unknown task strings are rejected, not coerced.
    pub fn parse(s: &str) -> Option<Task> {
        match s {
            "dream" => Some(Task::Dream),
            "favorite" => Some(Task::Favorite),
            "negative" => Some(Task::Negative),
            "mistake" => Some(Task::Mistake),
            _ => None,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionViolation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for SessionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl core::error::Error for SessionViolation {}

/// One recording: participant, task, duration, transcript, optional
/// pre-tagged tokens and optional token onset timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub participant_id: String,
    pub session_id: String,
    pub task: Task,
    pub duration_limit_s: u32,
    pub measured_duration_s: Option<f64>,
    pub transcript: String,
    /// Pre-tagged analyzer output, when the corpus ships one.
    pub tokens: Option<Vec<TaggedEntry>>,
    /// (token index, onset seconds) pairs, when the corpus ships them.
    pub token_timestamps: Option<Vec<(usize, f64)>>,
    /// Marks an intentional re-recording of the same (participant, task,
    /// duration) slot.
    pub retake: bool,
}

impl SessionRecord {
    /// Checks the per-record invariants; cross-record invariants live on
    /// `Corpus`.
    pub fn validate(&self) -> Result<(), SessionViolation> {
        if self.participant_id.trim().is_empty() {
            return Err(SessionViolation {
                field: "participant_id",
                message: String::from("must be non-empty"),
            });
        }
        if self.session_id.trim().is_empty() {
            return Err(SessionViolation {
                field: "session_id",
                message: String::from("must be non-empty"),
            });
        }
        if self.duration_limit_s == 0 {
            return Err(SessionViolation {
                field: "duration_limit_s",
                message: String::from("must be positive"),
            });
        }
        if let Some(d) = self.measured_duration_s {
            if !d.is_finite() || d <= 0.0 {
                return Err(SessionViolation {
                    field: "measured_duration_s",
                    message: format!("must be a positive finite number, got {d}"),
                });
            }
        }
        if self.transcript.trim().is_empty() {
            return Err(SessionViolation {
                field: "transcript",
                message: String::from("must be non-empty after whitespace trimming"),
            });
        }
        if let Some(ts) = &self.token_timestamps {
            for &(_, t) in ts {
                if !t.is_finite() || t < 0.0 {
                    return Err(SessionViolation {
                        field: "token_timestamps",
                        message: format!("timestamps must be finite and non-negative, got {t}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Speech duration used for rate features: the measured duration when
    /// recorded, otherwise the task's time limit.
    pub fn effective_duration_s(&self) -> f64 {
        self.measured_duration_s
            .unwrap_or(self.duration_limit_s as f64)
    }
}
