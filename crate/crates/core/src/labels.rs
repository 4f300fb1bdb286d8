//! Per-participant questionnaire scores and demographics.

use alloc::format;
use alloc::string::String;
use core::fmt;

/// Score bounds for the questionnaire totals.
pub const SPQ_TOTAL_MAX: u32 = 74;
pub const SPQ_ODD_SPEECH_MAX: u32 = 9;
pub const SRS_TOTAL_MAX: u32 = 195;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Male,
    Female,
    Unspecified,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unspecified => "unspecified",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "male" => Some(Gender::Male),
            "female" => Some(Gender::Female),
            "unspecified" | "" => Some(Gender::Unspecified),
            _ => None,
        }
    }
}

/// A labelled score axis usable in correlation analyses.
///
/// The SRS subscale axes are optional in the data; participants missing them
/// are excluded pairwise from correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LabelAxis {
    SpqTotal,
    OddSpeech,
    SrsTotal,
    SrsAwareness,
    SrsCognition,
    SrsCommunication,
    Age,
}

impl LabelAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelAxis::SpqTotal => "spq_total",
            LabelAxis::OddSpeech => "odd_speech",
            LabelAxis::SrsTotal => "srs_total",
            LabelAxis::SrsAwareness => "srs_awareness",
            LabelAxis::SrsCognition => "srs_cognition",
            LabelAxis::SrsCommunication => "srs_communication",
            LabelAxis::Age => "age",
        }
    }

    pub fn parse(s: &str) -> Option<LabelAxis> {
        match s {
            "spq_total" | "spq" => Some(LabelAxis::SpqTotal),
            "odd_speech" | "odd" | "spq_odd_speech" => Some(LabelAxis::OddSpeech),
            "srs_total" | "srs" => Some(LabelAxis::SrsTotal),
            "srs_awareness" | "awareness" => Some(LabelAxis::SrsAwareness),
            "srs_cognition" | "cognition" => Some(LabelAxis::SrsCognition),
            "srs_communication" | "communication" => Some(LabelAxis::SrsCommunication),
            "age" => Some(LabelAxis::Age),
            _ => None,
        }
    }

    /// Axes a prediction experiment may target.
    pub const TARGETS: [LabelAxis; 3] = [
        LabelAxis::SpqTotal,
        LabelAxis::OddSpeech,
        LabelAxis::SrsTotal,
    ];
}

impl fmt::Display for LabelAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelViolation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for LabelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl core::error::Error for LabelViolation {}

/// Questionnaire scores for one participant.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    spq_total: u32,
    spq_odd_speech: u32,
    srs_total: u32,
    srs_awareness: Option<u32>,
    srs_cognition: Option<u32>,
    srs_communication: Option<u32>,
    age: Option<u32>,
    gender: Gender,
}

impl LabelSet {
    /// Validates the score ranges: SPQ total 0-74, odd speech 0-9 and no
    /// larger than the total, SRS total 0-195, age positive when present.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        spq_total: u32,
        spq_odd_speech: u32,
        srs_total: u32,
        srs_awareness: Option<u32>,
        srs_cognition: Option<u32>,
        srs_communication: Option<u32>,
        age: Option<u32>,
        gender: Gender,
    ) -> Result<LabelSet, LabelViolation> {
        if spq_total > SPQ_TOTAL_MAX {
            return Err(LabelViolation {
                field: "spq_total",
                message: format!("{spq_total} exceeds maximum {SPQ_TOTAL_MAX}"),
            });
        }
        if spq_odd_speech > SPQ_ODD_SPEECH_MAX {
            return Err(LabelViolation {
                field: "spq_odd_speech",
                message: format!("{spq_odd_speech} exceeds maximum {SPQ_ODD_SPEECH_MAX}"),
            });
        }
        if spq_odd_speech > spq_total {
            return Err(LabelViolation {
                field: "spq_odd_speech",
                message: format!("subscale {spq_odd_speech} exceeds total {spq_total}"),
            });
        }
        if srs_total > SRS_TOTAL_MAX {
            return Err(LabelViolation {
                field: "srs_total",
                message: format!("{srs_total} exceeds maximum {SRS_TOTAL_MAX}"),
            });
        }
        for (field, value) in [
            ("srs_awareness", srs_awareness),
            ("srs_cognition", srs_cognition),
            ("srs_communication", srs_communication),
        ] {
            if let Some(v) = value {
                if v > SRS_TOTAL_MAX {
                    return Err(LabelViolation {
                        field,
                        message: format!("{v} exceeds maximum {SRS_TOTAL_MAX}"),
                    });
                }
            }
        }
        if age == Some(0) {
            return Err(LabelViolation {
                field: "age",
                message: String::from("age must be positive when present"),
            });
        }
        Ok(LabelSet {
            spq_total,
            spq_odd_speech,
            srs_total,
            srs_awareness,
            srs_cognition,
            srs_communication,
            age,
            gender,
        })
    }

    pub fn spq_total(&self) -> u32 {
        self.spq_total
    }

    pub fn spq_odd_speech(&self) -> u32 {
        self.spq_odd_speech
    }

    pub fn srs_total(&self) -> u32 {
        self.srs_total
    }

    pub fn age(&self) -> Option<u32> {
        self.age
    }

    pub fn gender(&self) -> Gender {
        self.gender
    }

    /// The participant's value on an axis, if recorded.
    pub fn axis_value(&self, axis: LabelAxis) -> Option<f64> {
        match axis {
            LabelAxis::SpqTotal => Some(self.spq_total as f64),
            LabelAxis::OddSpeech => Some(self.spq_odd_speech as f64),
            LabelAxis::SrsTotal => Some(self.srs_total as f64),
            LabelAxis::SrsAwareness => self.srs_awareness.map(|v| v as f64),
            LabelAxis::SrsCognition => self.srs_cognition.map(|v| v as f64),
            LabelAxis::SrsCommunication => self.srs_communication.map(|v| v as f64),
            LabelAxis::Age => self.age.map(|v| v as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(spq: u32, odd: u32, srs: u32) -> Result<LabelSet, LabelViolation> {
        LabelSet::new(spq, odd, srs, None, None, None, None, Gender::Unspecified)
    }

    #[test]
    fn accepts_in_range_scores() {
        let l = label(28, 3, 73).unwrap();
        assert_eq!(l.axis_value(LabelAxis::SpqTotal), Some(28.0));
        assert_eq!(l.axis_value(LabelAxis::SrsAwareness), None);
    }

    #[test]
    fn rejects_spq_above_range() {
        let err = label(75, 3, 73).unwrap_err();
        assert_eq!(err.field, "spq_total");
    }

    #[test]
    fn rejects_odd_speech_above_subscale_range() {
        assert_eq!(label(20, 10, 73).unwrap_err().field, "spq_odd_speech");
    }

    #[test]
    fn rejects_odd_speech_above_total() {
        assert_eq!(label(2, 3, 73).unwrap_err().field, "spq_odd_speech");
    }

    #[test]
    fn rejects_srs_above_range() {
        assert_eq!(label(20, 3, 196).unwrap_err().field, "srs_total");
    }

    #[test]
    fn rejects_zero_age() {
        let err = LabelSet::new(20, 3, 73, None, None, None, Some(0), Gender::Male).unwrap_err();
        assert_eq!(err.field, "age");
    }

    #[test]
    fn axis_parse_round_trips() {
        for axis in [
            LabelAxis::SpqTotal,
            LabelAxis::OddSpeech,
            LabelAxis::SrsTotal,
            LabelAxis::SrsAwareness,
            LabelAxis::SrsCognition,
            LabelAxis::SrsCommunication,
            LabelAxis::Age,
        ] {
            assert_eq!(LabelAxis::parse(axis.as_str()), Some(axis));
        }
    }
}
