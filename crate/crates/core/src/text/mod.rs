//! Tokenized, sentence-segmented, POS-annotated transcripts.
//!
//! Morphological analysis is delegated to an external analyzer whose output
//! arrives through the token interchange format ([`TaggedEntry`]); the
//! built-in [`naive_tokenize`] exists so tests and demos run without one and
//! is test-grade only.

mod tagset;

pub use tagset::{default_mapping_table, TagsetError, TagsetMapping};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// The canonical POS tag set.
///
/// Content words are nouns, verbs, adjectives, adjectival verbs
/// (na-adjectives), and adverbs; every remaining non-punctuation tag is a
/// function word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CanonicalTag {
    Noun,
    Verb,
    Adjective,
    AdjectivalVerb,
    Adverb,
    Prefix,
    Suffix,
    Interjection,
    AuxiliaryVerb,
    Pronoun,
    Adnominal,
    Conjunction,
    Particle,
    Punctuation,
    Other,
}

impl CanonicalTag {
    pub const ALL: [CanonicalTag; 15] = [
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
        CanonicalTag::Punctuation,
        CanonicalTag::Other,
    ];

    /// The fourteen tags that participate in POS percentages.
    pub const NON_PUNCTUATION: [CanonicalTag; 14] = [
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
        CanonicalTag::Other,
    ];

    pub const CONTENT: [CanonicalTag; 5] = [
        CanonicalTag::Noun,
        CanonicalTag::Verb,
        CanonicalTag::Adjective,
        CanonicalTag::AdjectivalVerb,
        CanonicalTag::Adverb,
    ];

    pub const FUNCTION: [CanonicalTag; 9] = [
        CanonicalTag::Prefix,
        CanonicalTag::Suffix,
        CanonicalTag::Interjection,
        CanonicalTag::AuxiliaryVerb,
        CanonicalTag::Pronoun,
        CanonicalTag::Adnominal,
        CanonicalTag::Conjunction,
        CanonicalTag::Particle,
        CanonicalTag::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CanonicalTag::Noun => "noun",
            CanonicalTag::Verb => "verb",
            CanonicalTag::Adjective => "adjective",
            CanonicalTag::AdjectivalVerb => "adjectival_verb",
            CanonicalTag::Adverb => "adverb",
            CanonicalTag::Prefix => "prefix",
            CanonicalTag::Suffix => "suffix",
            CanonicalTag::Interjection => "interjection",
            CanonicalTag::AuxiliaryVerb => "auxiliary_verb",
            CanonicalTag::Pronoun => "pronoun",
            CanonicalTag::Adnominal => "adnominal",
            CanonicalTag::Conjunction => "conjunction",
            CanonicalTag::Particle => "particle",
            CanonicalTag::Punctuation => "punctuation",
            CanonicalTag::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<CanonicalTag> {
        CanonicalTag::ALL.iter().copied().find(|t| t.as_str() == s)
    }

    pub fn is_content(&self) -> bool {
        CanonicalTag::CONTENT.contains(self)
    }

    pub fn is_function(&self) -> bool {
        CanonicalTag::FUNCTION.contains(self)
    }
}

impl fmt::Display for CanonicalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One token of analyzer output in the interchange format:
/// `{surface, tag, negation?}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedEntry {
    pub surface: String,
    pub tag: String,
    /// Set when an external negation detector already classified this token.
    pub negation: Option<bool>,
}

impl TaggedEntry {
    pub fn new(surface: &str, tag: &str) -> TaggedEntry {
        TaggedEntry {
            surface: surface.to_string(),
            tag: tag.to_string(),
            negation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub surface: String,
    pub tag: CanonicalTag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TextError {
    UnmappableTag {
        index: usize,
        tag: String,
    },
    EmptySurface {
        index: usize,
    },
    /// No non-punctuation tokens: POS statistics are undefined.
    OnlyPunctuation,
    NoTokens,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TextError::UnmappableTag { index, tag } => {
                write!(f, "token {index}: external tag '{tag}' has no mapping")
            }
            TextError::EmptySurface { index } => write!(f, "token {index}: empty surface"),
            TextError::OnlyPunctuation => f.write_str("transcript has no non-punctuation tokens"),
            TextError::NoTokens => f.write_str("transcript has no tokens"),
        }
    }
}

impl core::error::Error for TextError {}

/// Default surface forms counted as negation phrases. An approximation of a
/// phrase-level negation parser; exact counts can be injected through the
/// interchange `negation` field instead.
pub const DEFAULT_NEGATION_SURFACES: [&str; 6] = ["ない", "なかった", "ません", "ぬ", "ず", "まい"];

const DEFAULT_PUNCTUATION_CHARS: &str =
    "。、！？．，・…‥：；「」『』（）〈〉《》【】〔〕()[]{}<>.,!?;:'\"-―ー− 　\t\r\n";
const DEFAULT_SENTENCE_TERMINALS: &str = "。！？.!?";

/// Tokenization and tagging configuration shared by the parsing entry points.
#[derive(Debug, Clone)]
pub struct TextConfig {
    pub mapping: TagsetMapping,
    /// Error on unmappable external tags instead of assigning `other`.
    pub strict: bool,
    pub punctuation_chars: BTreeSet<char>,
    pub sentence_terminals: BTreeSet<char>,
    pub negation_lexicon: BTreeSet<String>,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig {
            mapping: TagsetMapping::default(),
            strict: false,
            punctuation_chars: DEFAULT_PUNCTUATION_CHARS.chars().collect(),
            sentence_terminals: DEFAULT_SENTENCE_TERMINALS.chars().collect(),
            negation_lexicon: DEFAULT_NEGATION_SURFACES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl TextConfig {
    fn is_punctuation_surface(&self, surface: &str) -> bool {
        !surface.is_empty() && surface.chars().all(|c| self.punctuation_chars.contains(&c))
    }

    fn is_sentence_terminal(&self, token: &Token) -> bool {
        token.tag == CanonicalTag::Punctuation
            && token
                .surface
                .chars()
                .any(|c| self.sentence_terminals.contains(&c))
    }
}

/// A tokenized transcript with sentence spans and a negation count.
///
/// `sentence_spans` are half-open token-index ranges partitioning
/// `0..tokens.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenizedTranscript {
    pub tokens: Vec<Token>,
    pub sentence_spans: Vec<(usize, usize)>,
    /// Per-token negation classification; either injected through the
    /// interchange or produced by the lexicon.
    pub negation_flags: Vec<bool>,
}

impl TokenizedTranscript {
    fn new(tokens: Vec<Token>, negation_flags: Vec<bool>, config: &TextConfig) -> Self {
        debug_assert_eq!(tokens.len(), negation_flags.len());
        let sentence_spans = segment_sentences(&tokens, config);
        TokenizedTranscript {
            tokens,
            sentence_spans,
            negation_flags,
        }
    }

    /// Rebuilds a transcript from an explicit token slice, re-segmenting
    /// sentences. Used by phase slicing.
    pub fn from_parts(tokens: Vec<Token>, negation_flags: Vec<bool>, config: &TextConfig) -> Self {
        TokenizedTranscript::new(tokens, negation_flags, config)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn negation_count(&self) -> usize {
        self.negation_flags.iter().filter(|&&f| f).count()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_spans.len()
    }

    pub fn non_punctuation_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| t.tag != CanonicalTag::Punctuation)
            .count()
    }

    pub fn punctuation_count(&self) -> usize {
        self.len() - self.non_punctuation_count()
    }

    /// Content-word surfaces in order of appearance.
    pub fn content_word_surfaces(&self) -> Vec<&str> {
        self.tokens
            .iter()
            .filter(|t| t.tag.is_content())
            .map(|t| t.surface.as_str())
            .collect()
    }

    /// The text of sentence `i`: its token surfaces concatenated.
    pub fn sentence_text(&self, i: usize) -> String {
        let (start, end) = self.sentence_spans[i];
        let mut out = String::new();
        for token in &self.tokens[start..end] {
            out.push_str(&token.surface);
        }
        out
    }

    /// Re-serializes tokens into the interchange format.
    pub fn to_entries(&self) -> Vec<TaggedEntry> {
        self.tokens
            .iter()
            .zip(&self.negation_flags)
            .map(|(t, &neg)| TaggedEntry {
                surface: t.surface.clone(),
                tag: t.tag.as_str().to_string(),
                negation: Some(neg),
            })
            .collect()
    }
}

/// Maps pre-tagged analyzer output to canonical tags, segments sentences, and
/// resolves negation flags.
///
/// If any entry carries an explicit `negation` field the interchange counts
/// win and the lexicon is bypassed; otherwise tokens are matched against
/// `config.negation_lexicon`.
pub fn parse_tagged(
    entries: &[TaggedEntry],
    config: &TextConfig,
) -> Result<TokenizedTranscript, TextError> {
    let mut tokens = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        if entry.surface.is_empty() {
            return Err(TextError::EmptySurface { index });
        }
        let mapped = match config.mapping.lookup(&entry.tag) {
            Some(tag) => tag,
            None if config.strict => {
                return Err(TextError::UnmappableTag {
                    index,
                    tag: entry.tag.clone(),
                })
            }
            None => CanonicalTag::Other,
        };
        // The punctuation tag is tied to the surface: punctuation-only
        // surfaces are always punctuation, and a punctuation-mapped tag on a
        // lexical surface falls back to `other` so the tag/surface invariant
        // holds.
        let tag = if config.is_punctuation_surface(&entry.surface) {
            CanonicalTag::Punctuation
        } else if mapped == CanonicalTag::Punctuation {
            CanonicalTag::Other
        } else {
            mapped
        };
        tokens.push(Token {
            surface: entry.surface.clone(),
            tag,
        });
    }
    let negation_flags = if entries.iter().any(|e| e.negation.is_some()) {
        entries.iter().map(|e| e.negation == Some(true)).collect()
    } else {
        lexicon_flags(&tokens, &config.negation_lexicon)
    };
    Ok(TokenizedTranscript::new(tokens, negation_flags, config))
}

/// Whitespace/punctuation-boundary tokenizer with lexicon-based tagging.
///
/// Test-grade only: it exists so the pipeline runs without a morphological
/// analyzer. Punctuation characters become single-character tokens; all other
/// runs between boundaries become one token tagged from the bundled surface
/// lexicon, default `other`.
pub fn naive_tokenize(text: &str, config: &TextConfig) -> TokenizedTranscript {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<Token>| {
        if !word.is_empty() {
            let tag = naive_lexicon_tag(word);
            tokens.push(Token {
                surface: core::mem::take(word),
                tag,
            });
        }
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut word, &mut tokens);
        } else if config.punctuation_chars.contains(&c) {
            flush(&mut word, &mut tokens);
            tokens.push(Token {
                surface: c.to_string(),
                tag: CanonicalTag::Punctuation,
            });
        } else {
            word.push(c);
        }
    }
    flush(&mut word, &mut tokens);
    let negation_flags = lexicon_flags(&tokens, &config.negation_lexicon);
    TokenizedTranscript::new(tokens, negation_flags, config)
}

// Small bundled surface-form lexicon for the test tokenizer.
fn naive_lexicon_tag(surface: &str) -> CanonicalTag {
    use CanonicalTag::*;
    match surface {
        "は" | "が" | "を" | "に" | "の" | "と" | "も" | "で" | "へ" | "から" | "まで" | "よ"
        | "ね" | "か" => Particle,
        "です" | "ます" | "だ" | "だった" | "ない" | "なかった" | "ません" | "た" => {
            AuxiliaryVerb
        }
        "私" | "僕" | "彼" | "彼女" | "あなた" | "これ" | "それ" | "あれ" | "わたし" => {
            Pronoun
        }
        "そして" | "でも" | "しかし" | "だから" | "それで" => Conjunction,
        "ああ" | "えー" | "あのー" | "ええと" | "うん" | "はい" => Interjection,
        "この" | "その" | "あの" | "どの" => Adnominal,
        "とても" | "すごく" | "ちょっと" | "たくさん" => Adverb,
        "見る" | "見た" | "行く" | "行った" | "思う" | "思った" | "言う" | "言った" | "する"
        | "した" | "ある" | "いる" => Verb,
        "夢" | "犬" | "猫" | "家" | "仕事" | "人" | "友達" | "記憶" | "失敗" | "話" => {
            Noun
        }
        "大きい" | "小さい" | "怖い" | "悲しい" | "嬉しい" => Adjective,
        "好き" | "嫌い" | "静か" | "大変" => AdjectivalVerb,
        _ => Other,
    }
}

fn lexicon_flags(tokens: &[Token], lexicon: &BTreeSet<String>) -> Vec<bool> {
    tokens
        .iter()
        .map(|t| lexicon.contains(t.surface.as_str()))
        .collect()
}

/// Splits after each sentence-terminal punctuation token; trailing tokens
/// without a terminator form a final sentence. The result partitions
/// `0..tokens.len()` with no gaps or overlaps.
pub fn segment_sentences(tokens: &[Token], config: &TextConfig) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0usize;
    for (i, token) in tokens.iter().enumerate() {
        if config.is_sentence_terminal(token) {
            spans.push((start, i + 1));
            start = i + 1;
        }
    }
    if start < tokens.len() {
        spans.push((start, tokens.len()));
    }
    spans
}

/// Percentage of each non-punctuation tag among non-punctuation tokens.
///
/// Punctuation is excluded from numerator and denominator; its rate is a
/// temporal feature instead. All fourteen non-punctuation tags are present in
/// the result, zeros included, and the values sum to 100.
pub fn pos_percentages(t: &TokenizedTranscript) -> Result<BTreeMap<CanonicalTag, f64>, TextError> {
    let denom = t.non_punctuation_count();
    if denom == 0 {
        return if t.is_empty() {
            Err(TextError::NoTokens)
        } else {
            Err(TextError::OnlyPunctuation)
        };
    }
    let mut counts: BTreeMap<CanonicalTag, usize> = CanonicalTag::NON_PUNCTUATION
        .iter()
        .map(|&tag| (tag, 0))
        .collect();
    for token in &t.tokens {
        if token.tag != CanonicalTag::Punctuation {
            *counts.get_mut(&token.tag).expect("non-punctuation tag") += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(tag, c)| (tag, 100.0 * c as f64 / denom as f64))
        .collect())
}

/// Counts tokens whose surface form is in the lexicon.
pub fn detect_negations(tokens: &[Token], lexicon: &BTreeSet<String>) -> usize {
    tokens
        .iter()
        .filter(|t| lexicon.contains(t.surface.as_str()))
        .count()
}
