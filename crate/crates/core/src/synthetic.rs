//! Deterministic synthetic corpus generation.
//!
//! The bundled demo corpus comes from here: pseudo-Japanese pre-tagged token
//! streams whose POS composition carries a participant-level trait signal,
//! strongest in the negative-memory task, plus questionnaire labels derived
//! from the same traits. Everything is a pure function of the seed.

use crate::corpus::Corpus;
use crate::labels::{Gender, LabelSet};
use crate::rng::{derive_seed, fnv1a64, SplitMix64};
use crate::session::{SessionRecord, Task};
use crate::text::{CanonicalTag, TaggedEntry};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub participants: usize,
    pub seed: u64,
    /// Recording limits per task, seconds.
    pub durations: Vec<u32>,
    /// Explicit task list per participant; empty means the recording-script
    /// default (dream or favorite, then negative, then mistake).
    pub tasks: Vec<Task>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            participants: 24,
            seed: 42,
            durations: vec![30, 60, 180],
            tasks: Vec::new(),
        }
    }
}

struct Traits {
    /// Schizotypal-leaning latent trait.
    z_spq: f64,
    /// Autistic-leaning latent trait.
    z_srs: f64,
    speech_rate: f64,
}

fn vocabulary(tag: CanonicalTag) -> (&'static [&'static str], &'static str) {
    use CanonicalTag::*;
    match tag {
        Noun => (
            &[
                "夢", "犬", "家", "記憶", "仕事", "海", "山", "朝", "夜", "友達",
            ],
            "名詞-普通名詞-一般",
        ),
        Verb => (
            &["見る", "行く", "話す", "思う", "走る", "忘れる", "泣く"],
            "動詞-一般",
        ),
        Adjective => (&["怖い", "暗い", "高い", "悲しい"], "形容詞-一般"),
        AdjectivalVerb => (&["好き", "静か", "大変"], "形状詞-一般"),
        Adverb => (&["とても", "少し", "またすぐ"], "副詞"),
        Prefix => (&["お", "ご"], "接頭辞"),
        Suffix => (&["さん", "たち"], "接尾辞"),
        Interjection => (&["ええと", "あのう", "うん"], "感動詞-一般"),
        AuxiliaryVerb => (&["です", "ます", "た", "だ"], "助動詞"),
        Pronoun => (&["私", "それ", "これ", "彼"], "代名詞"),
        Adnominal => (&["この", "その", "あの"], "連体詞"),
        Conjunction => (&["そして", "でも", "だから"], "接続詞"),
        Particle => (
            &["は", "が", "を", "に", "の", "と", "も", "で"],
            "助詞-格助詞",
        ),
        Punctuation => (&["。"], "補助記号-句点"),
        Other => (&["えっと"], "その他"),
    }
}

const SAMPLED_TAGS: [CanonicalTag; 13] = [
    CanonicalTag::Noun,
    CanonicalTag::Verb,
    CanonicalTag::Adjective,
    CanonicalTag::AdjectivalVerb,
    CanonicalTag::Adverb,
    CanonicalTag::Prefix,
    CanonicalTag::Suffix,
    CanonicalTag::Interjection,
    CanonicalTag::AuxiliaryVerb,
    CanonicalTag::Pronoun,
    CanonicalTag::Adnominal,
    CanonicalTag::Conjunction,
    CanonicalTag::Particle,
];

fn tag_weights(traits: &Traits, task: Task) -> [f64; 13] {
    let mut w = [
        0.22, // noun
        0.13, // verb
        0.04, // adjective
        0.03, // adjectival verb
        0.04, // adverb
        0.01, // prefix
        0.02, // suffix
        0.04, // interjection
        0.10, // auxiliary verb
        0.05, // pronoun
        0.03, // adnominal
        0.03, // conjunction
        0.26, // particle
    ];
    let intensity = libm::tanh(traits.z_spq);
    // Trait signal: strongest in negative-memory reports, faint elsewhere.
    let strength = match task {
        Task::Negative => 0.10,
        Task::Mistake => 0.03,
        _ => 0.01,
    };
    w[12] += strength * intensity; // particles
    w[8] += 0.5 * strength * intensity; // auxiliaries
    w[0] -= strength * intensity; // fewer nouns
    w[2] += 0.3 * strength * libm::tanh(traits.z_srs); // adjectives track SRS
    for v in w.iter_mut() {
        if *v < 0.005 {
            *v = 0.005;
        }
    }
    w
}

fn sample_tag(rng: &mut SplitMix64, weights: &[f64; 13]) -> CanonicalTag {
    let total: f64 = weights.iter().sum();
    let mut draw = rng.next_f64() * total;
    for (i, &w) in weights.iter().enumerate() {
        if draw < w {
            return SAMPLED_TAGS[i];
        }
        draw -= w;
    }
    SAMPLED_TAGS[12]
}

fn generate_tokens(
    rng: &mut SplitMix64,
    traits: &Traits,
    task: Task,
    duration_s: u32,
) -> Vec<TaggedEntry> {
    let weights = tag_weights(traits, task);
    let rate = traits.speech_rate;
    let budget = ((duration_s as f64) * rate) as usize;
    let negation_p = match task {
        Task::Negative => 0.015 + 0.035 * (libm::tanh(traits.z_spq) + 1.0) / 2.0,
        _ => 0.015,
    };
    let mut entries = Vec::with_capacity(budget + budget / 8);
    let mut since_terminal = 0usize;
    while entries
        .iter()
        .filter(|e: &&TaggedEntry| e.tag != "補助記号-句点")
        .count()
        < budget
    {
        let tag = sample_tag(rng, &weights);
        let (words, tag_str) = vocabulary(tag);
        let word = words[rng.next_below(words.len() as u64) as usize];
        entries.push(TaggedEntry::new(word, tag_str));
        since_terminal += 1;
        // Negation auxiliaries follow verbs and auxiliaries.
        if matches!(tag, CanonicalTag::Verb | CanonicalTag::AuxiliaryVerb)
            && rng.next_f64() < negation_p
        {
            let form = if rng.next_f64() < 0.5 {
                "ない"
            } else {
                "なかった"
            };
            entries.push(TaggedEntry::new(form, "助動詞"));
            since_terminal += 1;
        }
        let terminal_p = (since_terminal as f64 - 6.0).max(0.0) / 30.0;
        if rng.next_f64() < terminal_p {
            entries.push(TaggedEntry::new("。", "補助記号-句点"));
            since_terminal = 0;
        }
    }
    entries.push(TaggedEntry::new("。", "補助記号-句点"));
    entries
}

fn clamp_u32(v: f64, lo: u32, hi: u32) -> u32 {
    let rounded = libm::round(v);
    if rounded < lo as f64 {
        lo
    } else if rounded > hi as f64 {
        hi
    } else {
        rounded as u32
    }
}

fn participant_labels(rng: &mut SplitMix64, traits: &Traits) -> LabelSet {
    let odd = clamp_u32(3.9 + 2.6 * traits.z_spq + 0.8 * rng.next_gaussian(), 0, 9);
    let spq = clamp_u32(
        28.0 + 13.0 * traits.z_spq + 5.0 * rng.next_gaussian(),
        0,
        74,
    )
    .max(odd);
    let srs = clamp_u32(
        73.0 + 26.0 * traits.z_srs + 8.0 * rng.next_gaussian(),
        0,
        195,
    );
    let awareness = clamp_u32(srs as f64 * 0.12 + rng.next_gaussian(), 0, 24);
    let cognition = clamp_u32(
        srs as f64 * 0.18 + 2.0 * libm::tanh(traits.z_spq) + rng.next_gaussian(),
        0,
        36,
    );
    let communication = clamp_u32(srs as f64 * 0.33 + rng.next_gaussian(), 0, 66);
    let age = clamp_u32(43.0 + 11.0 * rng.next_gaussian(), 19, 74);
    let gender = if rng.next_f64() < 0.5 {
        Gender::Male
    } else {
        Gender::Female
    };
    LabelSet::new(
        spq,
        odd,
        srs,
        Some(awareness),
        Some(cognition),
        Some(communication),
        Some(age),
        gender,
    )
    .expect("generated labels are in range")
}

/// Generates a corpus deterministically from the spec.
pub fn generate_corpus(spec: &SyntheticSpec) -> Corpus {
    let mut sessions = Vec::new();
    let mut labels = BTreeMap::new();
    for p in 0..spec.participants {
        let pid = format!("p{p:03}");
        let mut rng = SplitMix64::new(derive_seed(spec.seed, fnv1a64(pid.as_bytes())));
        let traits = Traits {
            z_spq: rng.next_gaussian(),
            z_srs: rng.next_gaussian(),
            speech_rate: 1.9 + 0.5 * rng.next_f64(),
        };
        labels.insert(pid.clone(), participant_labels(&mut rng, &traits));
        let tasks: Vec<Task> = if spec.tasks.is_empty() {
            // Recording script: a dream report (or favorite things when no
            // dream is remembered), then negative memory, then biggest
            // mistake.
            let first = if rng.next_f64() < 0.5 {
                Task::Dream
            } else {
                Task::Favorite
            };
            vec![first, Task::Negative, Task::Mistake]
        } else {
            spec.tasks.clone()
        };
        for task in tasks {
            for &duration in &spec.durations {
                let entries = generate_tokens(&mut rng, &traits, task, duration);
                let transcript: String = entries.iter().map(|e| e.surface.as_str()).collect();
                let measured = duration as f64 * (0.90 + 0.10 * rng.next_f64());
                sessions.push(SessionRecord {
                    participant_id: pid.clone(),
                    session_id: format!("{pid}-{task}-{duration:03}"),
                    task,
                    duration_limit_s: duration,
                    measured_duration_s: Some(measured),
                    transcript,
                    tokens: Some(entries),
                    token_timestamps: None,
                    retake: false,
                });
            }
        }
    }
    Corpus::new(sessions, labels).expect("synthetic corpus satisfies invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec {
            participants: 4,
            ..Default::default()
        };
        let a = generate_corpus(&spec);
        let b = generate_corpus(&spec);
        assert_eq!(a.sessions(), b.sessions());
        assert_eq!(a.labels(), b.labels());
    }

    #[test]
    fn default_script_yields_nine_sessions_each() {
        let spec = SyntheticSpec {
            participants: 5,
            ..Default::default()
        };
        let corpus = generate_corpus(&spec);
        assert_eq!(corpus.sessions().len(), 45);
        for pid in corpus.participants_with_sessions() {
            let count = corpus
                .sessions()
                .iter()
                .filter(|s| s.participant_id == pid)
                .count();
            assert_eq!(count, 9);
        }
    }

    #[test]
    fn seeds_change_content() {
        let a = generate_corpus(&SyntheticSpec {
            participants: 2,
            seed: 1,
            ..Default::default()
        });
        let b = generate_corpus(&SyntheticSpec {
            participants: 2,
            seed: 2,
            ..Default::default()
        });
        assert_ne!(a.sessions()[0].transcript, b.sessions()[0].transcript);
    }

    #[test]
    fn token_budget_tracks_duration() {
        let corpus = generate_corpus(&SyntheticSpec {
            participants: 3,
            ..Default::default()
        });
        for s in corpus.sessions() {
            let tokens = s.tokens.as_ref().unwrap().len();
            // Roughly rate * duration with rate in [1.9, 2.4].
            assert!(tokens as f64 > s.duration_limit_s as f64 * 1.5);
            assert!(
                (tokens as f64) < s.duration_limit_s as f64 * 3.5,
                "{} tokens for {}s",
                tokens,
                s.duration_limit_s
            );
        }
    }
}
