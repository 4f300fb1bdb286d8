//! Content hashing shared by the embedding file format and corpus manifests.
//!
//! Texts are keyed by the SHA-256 of their UTF-8 bytes so the same
//! precomputed-vector file serves sentence-level and word-level lookups.

use alloc::string::String;
use alloc::vec::Vec;
use sha2::{Digest, Sha256};

/// SHA-256 digest of a byte string.
pub fn sha256(bytes: &[u8]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().into()
}

/// Lowercase hex of the SHA-256 of a text; the canonical embedding-file key.
pub fn text_key(text: &str) -> String {
    to_hex(&sha256(text.as_bytes()))
}

pub fn to_hex(bytes: &[u8]) -> String {
    const HEX: &[u8; 16] = b"0123456789abcdef";
    let mut out = String::with_capacity(bytes.len() * 2);
    for &b in bytes {
        out.push(HEX[(b >> 4) as usize] as char);
        out.push(HEX[(b & 0xf) as usize] as char);
    }
    out
}

/// Incremental SHA-256 builder for hashing structured records field by field.
/// Fields are length-prefixed so concatenation ambiguities cannot collide.
pub struct RecordHasher {
    hasher: Sha256,
}

impl RecordHasher {
    pub fn new(domain: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update((domain.len() as u64).to_le_bytes());
        hasher.update(domain.as_bytes());
        RecordHasher { hasher }
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
        self
    }

    pub fn text(&mut self, s: &str) -> &mut Self {
        self.field(s.as_bytes())
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_le_bytes())
    }

    pub fn finish(self) -> [u8; 32] {
        self.hasher.finalize().into()
    }

    pub fn finish_hex(self) -> String {
        to_hex(&self.finish())
    }
}

/// Fills `out` with bytes from SHA-256 in counter mode over a keyed message.
/// This is the "stated stable hash" behind the deterministic test embedder.
pub fn counter_stream(key: &[u8], out: &mut Vec<u8>, len: usize) {
    out.clear();
    let mut counter: u64 = 0;
    while out.len() < len {
        let mut hasher = Sha256::new();
        hasher.update(key);
        hasher.update(counter.to_le_bytes());
        let block: [u8; 32] = hasher.finalize().into();
        out.extend_from_slice(&block);
        counter += 1;
    }
    out.truncate(len);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        // SHA-256("abc")
        assert_eq!(
            to_hex(&sha256(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn text_key_stable() {
        assert_eq!(text_key("犬が走る"), text_key("犬が走る"));
        assert_ne!(text_key("a"), text_key("b"));
    }

    #[test]
    fn counter_stream_deterministic_and_sized() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        counter_stream(b"key", &mut a, 100);
        counter_stream(b"key", &mut b, 100);
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        counter_stream(b"other", &mut b, 100);
        assert_ne!(a, b);
    }

    #[test]
    fn record_hasher_field_boundaries_matter() {
        let mut a = RecordHasher::new("t");
        a.text("ab").text("c");
        let mut b = RecordHasher::new("t");
        b.text("a").text("bc");
        assert_ne!(a.finish(), b.finish());
    }
}
