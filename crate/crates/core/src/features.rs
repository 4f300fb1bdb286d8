//! Session-level feature extraction: the five feature groups and the
//! 22-feature vector they assemble into.

use crate::embed::{EmbedError, EmbeddingProvider};
use crate::linalg::{norm1, Matrix};
use crate::stats::{pca_first_component, StandardizationParams, StatsError};
use crate::text::{pos_percentages, CanonicalTag, TextError, TokenizedTranscript};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureGroup {
    Embedding,
    ContentWord,
    FunctionWord,
    Abstract,
    Temporal,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Embedding,
        FeatureGroup::ContentWord,
        FeatureGroup::FunctionWord,
        FeatureGroup::Abstract,
        FeatureGroup::Temporal,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FeatureGroup::Embedding => "embedding",
            FeatureGroup::ContentWord => "content_word",
            FeatureGroup::FunctionWord => "function_word",
            FeatureGroup::Abstract => "abstract",
            FeatureGroup::Temporal => "temporal",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureGroup> {
        FeatureGroup::ALL.iter().copied().find(|g| g.as_str() == s)
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureDef {
    pub name: &'static str,
    pub group: FeatureGroup,
}

/// The fixed feature schema: names, groups, and order.
pub const FEATURES: [FeatureDef; 22] = {
    use FeatureGroup::*;
    [
        FeatureDef {
            name: "sentence_l1_mean",
            group: Embedding,
        },
        FeatureDef {
            name: "sentence_cosdist_mean",
            group: Embedding,
        },
        FeatureDef {
            name: "contentword_cosdist_mean",
            group: Embedding,
        },
        FeatureDef {
            name: "pct_noun",
            group: ContentWord,
        },
        FeatureDef {
            name: "pct_verb",
            group: ContentWord,
        },
        FeatureDef {
            name: "pct_adjective",
            group: ContentWord,
        },
        FeatureDef {
            name: "pct_adjectival_verb",
            group: ContentWord,
        },
        FeatureDef {
            name: "pct_adverb",
            group: ContentWord,
        },
        FeatureDef {
            name: "pct_prefix",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_suffix",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_interjection",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_auxiliary_verb",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_pronoun",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_adnominal",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_conjunction",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_particle",
            group: FunctionWord,
        },
        FeatureDef {
            name: "pct_other",
            group: FunctionWord,
        },
        FeatureDef {
            name: "content_word_pct",
            group: Abstract,
        },
        FeatureDef {
            name: "negation_per_100_tokens",
            group: Abstract,
        },
        FeatureDef {
            name: "cdij",
            group: Abstract,
        },
        FeatureDef {
            name: "wpm",
            group: Temporal,
        },
        FeatureDef {
            name: "punctuation_pct",
            group: Temporal,
        },
    ]
};

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURES.iter().position(|f| f.name == name)
}

/// Column indices belonging to a group.
pub fn group_columns(group: FeatureGroup) -> Vec<usize> {
    FEATURES
        .iter()
        .enumerate()
        .filter(|(_, f)| f.group == group)
        .map(|(i, _)| i)
        .collect()
}

/// A named, group-tagged feature vector for one session. Features that are
/// undefined for a too-short transcript carry `defined = false` and a 0.0
/// placeholder that model code must not read (it imputes from training
/// folds instead).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
}

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        let i = feature_index(name)?;
        self.defined[i].then(|| self.values[i])
    }

    pub fn undefined_names(&self) -> Vec<&'static str> {
        FEATURES
            .iter()
            .zip(&self.defined)
            .filter(|(_, &d)| !d)
            .map(|(f, _)| f.name)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureError {
    Text(TextError),
    Embed(EmbedError),
    Stats(StatsError),
    /// Transcript has no tokens at all; nothing can be extracted.
    EmptyTranscript,
    NonPositiveDuration,
    /// Coherence over embeddings hit a zero vector.
    ZeroVector,
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureError::Text(e) => write!(f, "text: {e}"),
            FeatureError::Embed(e) => write!(f, "embedding: {e}"),
            FeatureError::Stats(e) => write!(f, "stats: {e}"),
            FeatureError::EmptyTranscript => f.write_str("empty transcript"),
            FeatureError::NonPositiveDuration => f.write_str("duration must be positive"),
            FeatureError::ZeroVector => f.write_str("zero vector in coherence input"),
        }
    }
}

impl core::error::Error for FeatureError {}

impl From<TextError> for FeatureError {
    fn from(e: TextError) -> Self {
        FeatureError::Text(e)
    }
}

impl From<EmbedError> for FeatureError {
    fn from(e: EmbedError) -> Self {
        FeatureError::Embed(e)
    }
}

impl From<StatsError> for FeatureError {
    fn from(e: StatsError) -> Self {
        FeatureError::Stats(e)
    }
}

/// Mean L1 distance between consecutive vectors; `None` when fewer than two
/// vectors exist (feature undefined).
pub fn coherence_l1(vectors: &[Vec<f64>]) -> Option<f64> {
    if vectors.len() < 2 {
        return None;
    }
    let total: f64 = vectors
        .windows(2)
        .map(|w| {
            let diff: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
            norm1(&diff)
        })
        .sum();
    Some(total / (vectors.len() - 1) as f64)
}

/// Mean cosine distance `1 - cos` between consecutive vectors; `None` when
/// fewer than two vectors exist; errors on a zero vector.
pub fn coherence_cosine(vectors: &[Vec<f64>]) -> Result<Option<f64>, FeatureError> {
    if vectors.len() < 2 {
        return Ok(None);
    }
    let mut total = 0.0;
    for w in vectors.windows(2) {
        let dot: f64 = w[0].iter().zip(&w[1]).map(|(a, b)| a * b).sum();
        let na = libm::sqrt(w[0].iter().map(|x| x * x).sum::<f64>());
        let nb = libm::sqrt(w[1].iter().map(|x| x * x).sum::<f64>());
        if na == 0.0 || nb == 0.0 {
            return Err(FeatureError::ZeroVector);
        }
        total += 1.0 - (dot / (na * nb)).clamp(-1.0, 1.0);
    }
    Ok(Some(total / (vectors.len() - 1) as f64))
}

/// Embeds each content-word surface in order of appearance and applies
/// [`coherence_cosine`]; `None` when the transcript has fewer than two
/// content words.
pub fn content_word_coherence(
    t: &TokenizedTranscript,
    provider: &dyn EmbeddingProvider,
) -> Result<Option<f64>, FeatureError> {
    let words = t.content_word_surfaces();
    if words.len() < 2 {
        return Ok(None);
    }
    let vectors = provider.embed_texts(&words)?;
    coherence_cosine(&vectors)
}

/// The categorical-dynamic index adapted to the Japanese tag set:
/// `+prefix +suffix +interjection +aux_verb -pronoun -adnominal -conjunction
/// -particle -negation_rate`, POS terms as percentages and the negation term
/// as phrases per 100 non-punctuation tokens.
pub fn cdij(pos_pct: &BTreeMap<CanonicalTag, f64>, negation_rate: f64) -> f64 {
    let get = |tag: CanonicalTag| pos_pct.get(&tag).copied().unwrap_or(0.0);
    get(CanonicalTag::Prefix)
        + get(CanonicalTag::Suffix)
        + get(CanonicalTag::Interjection)
        + get(CanonicalTag::AuxiliaryVerb)
        - get(CanonicalTag::Pronoun)
        - get(CanonicalTag::Adnominal)
        - get(CanonicalTag::Conjunction)
        - get(CanonicalTag::Particle)
        - negation_rate
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_char(&self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Derives the plus/minus sign of each POS column from the loading of the
/// first principal component of the standardized column matrix.
///
/// The component is oriented so the `particle` column's loading is negative;
/// if no column is named `particle` (or its loading is zero) the
/// largest-|loading| column is made positive instead. Constant columns have
/// no loading and are omitted from the result.
pub fn derive_cdi_signs(
    columns: &[(String, Vec<f64>)],
) -> Result<BTreeMap<String, Sign>, StatsError> {
    let n = columns.first().map_or(0, |(_, v)| v.len());
    if columns.len() < 2 || n < 2 {
        return Err(StatsError::InsufficientSample {
            n: columns.len().min(n),
            required: 2,
        });
    }
    let mut data = Vec::with_capacity(n * columns.len());
    for r in 0..n {
        for (_, col) in columns {
            debug_assert_eq!(col.len(), n);
            data.push(col[r]);
        }
    }
    let x = Matrix::from_vec(n, columns.len(), data);
    let params = StandardizationParams::fit(&x, None)?;
    if params.retained.len() < 2 {
        return Err(StatsError::AllColumnsConstant);
    }
    let z = params.apply(&x, None)?;
    let mut loading = pca_first_component(&z)?;

    let retained_names: Vec<&String> = params.retained.iter().map(|&c| &columns[c].0).collect();
    let particle_pos = retained_names.iter().position(|n| n.as_str() == "particle");
    let flip = match particle_pos {
        Some(i) if loading[i] != 0.0 => loading[i] > 0.0,
        _ => {
            let (max_i, _) = loading
                .iter()
                .enumerate()
                .max_by(|a, b| libm::fabs(*a.1).total_cmp(&libm::fabs(*b.1)))
                .expect("non-empty loading");
            loading[max_i] < 0.0
        }
    };
    if flip {
        for v in loading.iter_mut() {
            *v = -*v;
        }
    }
    Ok(retained_names
        .into_iter()
        .zip(&loading)
        .map(|(name, &l)| {
            (
                name.clone(),
                if l >= 0.0 { Sign::Plus } else { Sign::Minus },
            )
        })
        .collect())
}

/// Words per minute and punctuation percentage.
pub fn temporal_features(
    t: &TokenizedTranscript,
    duration_s: f64,
) -> Result<(f64, f64), FeatureError> {
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(FeatureError::NonPositiveDuration);
    }
    if t.is_empty() {
        return Err(FeatureError::EmptyTranscript);
    }
    let wpm = t.non_punctuation_count() as f64 / (duration_s / 60.0);
    let punctuation_pct = 100.0 * t.punctuation_count() as f64 / t.len() as f64;
    Ok((wpm, punctuation_pct))
}

/// Builds the full 22-feature vector for one tokenized session.
///
/// Embedding-group features for too-short transcripts (fewer than two
/// sentences, or fewer than two content words) come back flagged undefined
/// rather than invented.
pub fn assemble(
    t: &TokenizedTranscript,
    duration_s: f64,
    provider: &dyn EmbeddingProvider,
) -> Result<FeatureVector, FeatureError> {
    if t.is_empty() {
        return Err(FeatureError::EmptyTranscript);
    }
    let pos_pct = pos_percentages(t)?;
    let (wpm, punctuation_pct) = temporal_features(t, duration_s)?;

    // Sentence-level embedding coherence.
    let (sentence_l1, sentence_cos) = if t.sentence_count() >= 2 {
        let texts: Vec<String> = (0..t.sentence_count())
            .map(|i| t.sentence_text(i))
            .collect();
        let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
        let vectors = provider.embed_texts(&refs)?;
        (coherence_l1(&vectors), coherence_cosine(&vectors)?)
    } else {
        (None, None)
    };
    let content_cos = content_word_coherence(t, provider)?;

    let non_punct = t.non_punctuation_count() as f64;
    let content_count = t.tokens.iter().filter(|tok| tok.tag.is_content()).count() as f64;
    let content_word_pct = 100.0 * content_count / non_punct;
    let negation_rate = 100.0 * t.negation_count() as f64 / non_punct;
    let cdij_value = cdij(&pos_pct, negation_rate);

    let mut values = Vec::with_capacity(FEATURES.len());
    let mut defined = Vec::with_capacity(FEATURES.len());
    let mut push = |v: Option<f64>| {
        values.push(v.unwrap_or(0.0));
        defined.push(v.is_some());
    };
    push(sentence_l1);
    push(sentence_cos);
    push(content_cos);
    for tag in CanonicalTag::CONTENT {
        push(Some(pos_pct[&tag]));
    }
    for tag in CanonicalTag::FUNCTION {
        push(Some(pos_pct[&tag]));
    }
    push(Some(content_word_pct));
    push(Some(negation_rate));
    push(Some(cdij_value));
    push(Some(wpm));
    push(Some(punctuation_pct));
    Ok(FeatureVector { values, defined })
}
