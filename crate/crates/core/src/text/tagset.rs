//! Mapping from external analyzer tag strings to the canonical tag set.
//!
//! The mapping is a longest-prefix table so one entry like `名詞` covers the
//! whole noun subtree while a longer entry like `名詞-形容動詞語幹` can carve
//! out an exception. Analyzer output joined with `-` or `,` both work because
//! matching is on raw string prefixes.

use super::CanonicalTag;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagsetError {
    /// A mapping-table line did not have the `prefix<ws>tag` form.
    MalformedLine { line: usize, content: String },
    /// The canonical tag name on a mapping line is unknown.
    UnknownCanonical { line: usize, name: String },
}

impl fmt::Display for TagsetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagsetError::MalformedLine { line, content } => {
                write!(
                    f,
                    "mapping line {line}: expected `prefix tag`, got '{content}'"
                )
            }
            TagsetError::UnknownCanonical { line, name } => {
                write!(f, "mapping line {line}: unknown canonical tag '{name}'")
            }
        }
    }
}

impl core::error::Error for TagsetError {}

/// Longest-prefix lookup table from external tag strings to canonical tags.
#[derive(Debug, Clone)]
pub struct TagsetMapping {
    // Sorted by descending prefix length so the first match wins.
    entries: Vec<(String, CanonicalTag)>,
}

impl TagsetMapping {
    pub fn from_pairs<I, S>(pairs: I) -> TagsetMapping
    where
        I: IntoIterator<Item = (S, CanonicalTag)>,
        S: Into<String>,
    {
        let mut entries: Vec<(String, CanonicalTag)> =
            pairs.into_iter().map(|(p, t)| (p.into(), t)).collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        TagsetMapping { entries }
    }

    /// Parses the text-table format: one `external_prefix<whitespace>tag`
    /// pair per line; `#` starts a comment; blank lines are ignored.
    pub fn parse(table: &str) -> Result<TagsetMapping, TagsetError> {
        let mut pairs = Vec::new();
        for (idx, raw) in table.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (prefix, tag_name) = match (it.next(), it.next(), it.next()) {
                (Some(p), Some(t), None) => (p, t),
                _ => {
                    return Err(TagsetError::MalformedLine {
                        line: idx + 1,
                        content: line.to_string(),
                    })
                }
            };
            let tag = CanonicalTag::parse(tag_name).ok_or(TagsetError::UnknownCanonical {
                line: idx + 1,
                name: tag_name.to_string(),
            })?;
            pairs.push((prefix.to_string(), tag));
        }
        Ok(TagsetMapping::from_pairs(pairs))
    }

    /// Longest-prefix lookup.
    pub fn lookup(&self, external_tag: &str) -> Option<CanonicalTag> {
        self.entries
            .iter()
            .find(|(prefix, _)| external_tag.starts_with(prefix.as_str()))
            .map(|&(_, tag)| tag)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for TagsetMapping {
    /// Covers UniDic/Sudachi-style and IPADIC-style Japanese tags plus the
    /// lowercase hyphenated names used in token interchange files.
    fn default() -> Self {
        use CanonicalTag::*;
        TagsetMapping::from_pairs([
            // UniDic / Sudachi top levels.
            ("名詞-形容動詞語幹", AdjectivalVerb), // IPADIC na-adjective stem
            ("名詞-接尾", Suffix),                 // IPADIC nominal suffix
            ("名詞-代名詞", Pronoun),              // IPADIC pronoun
            ("名詞", Noun),
            ("代名詞", Pronoun),
            ("形状詞", AdjectivalVerb),
            ("形容動詞", AdjectivalVerb),
            ("形容詞", Adjective),
            ("動詞", Verb),
            ("副詞", Adverb),
            ("連体詞", Adnominal),
            ("接続詞", Conjunction),
            ("感動詞", Interjection),
            ("フィラー", Interjection),
            ("助動詞", AuxiliaryVerb),
            ("助詞", Particle),
            ("接頭辞", Prefix),
            ("接頭詞", Prefix),
            ("接尾辞", Suffix),
            ("補助記号", Punctuation),
            ("記号", Punctuation),
            ("空白", Punctuation),
            // Lowercase interchange names.
            ("noun", Noun),
            ("pronoun", Pronoun),
            ("verb", Verb),
            ("adjectival-verb", AdjectivalVerb),
            ("adjectival_verb", AdjectivalVerb),
            ("adjective", Adjective),
            ("adverb", Adverb),
            ("adnominal", Adnominal),
            ("conjunction", Conjunction),
            ("interjection", Interjection),
            ("auxiliary-verb", AuxiliaryVerb),
            ("auxiliary_verb", AuxiliaryVerb),
            ("aux-verb", AuxiliaryVerb),
            ("particle", Particle),
            ("prefix", Prefix),
            ("suffix", Suffix),
            ("punctuation", Punctuation),
            ("punct", Punctuation),
            ("symbol", Punctuation),
            ("whitespace", Punctuation),
            ("other", Other),
        ])
    }
}

/// The default table rendered in the on-disk format, so a config file can be
/// seeded from it.
pub fn default_mapping_table() -> String {
    use core::fmt::Write;
    let mapping = TagsetMapping::default();
    let mut out = String::from("# external_tag_prefix  canonical_tag (longest prefix wins)\n");
    for (prefix, tag) in &mapping.entries {
        let _ = writeln!(out, "{prefix}\t{}", tag.as_str());
    }
    out
}
