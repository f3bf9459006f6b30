//! Text normalization, tokenization and hashing helpers shared by all stages.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

/// NFC-normalizes `s`, trims it and collapses internal whitespace runs to a
/// single ASCII space.
pub fn normalize(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    collapse_whitespace(&nfc)
}

pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn is_nfc(s: &str) -> bool {
    unicode_normalization::is_nfc(s)
}

/// Key under which two generated sentences count as duplicates.
pub fn dedup_key(s: &str) -> String {
    normalize(s).to_lowercase()
}

/// Half-open character span `[start, end)` counted in Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns the covered substring, or `None` when the span does not fit.
    pub fn slice<'a>(&self, s: &'a str) -> Option<&'a str> {
        if self.start >= self.end {
            return None;
        }
        let mut indices = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
        let start = indices.nth(self.start)?;
        let end = if self.end == self.start {
            start
        } else {
            indices.nth(self.end - self.start - 1)?
        };
        Some(&s[start..end])
    }
}

/// A word token with its character span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub span: Span,
}

/// Splits on every non-alphanumeric character. Offsets are character counts.
pub fn tokenize(s: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, usize)> = None; // (byte start, char start)
    let mut char_idx = 0;
    for (byte_idx, c) in s.char_indices() {
        if c.is_alphanumeric() {
            if current.is_none() {
                current = Some((byte_idx, char_idx));
            }
        } else if let Some((b0, c0)) = current.take() {
            tokens.push(Token {
                text: &s[b0..byte_idx],
                span: Span::new(c0, char_idx),
            });
        }
        char_idx += 1;
    }
    if let Some((b0, c0)) = current {
        tokens.push(Token {
            text: &s[b0..],
            span: Span::new(c0, char_idx),
        });
    }
    tokens
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Derives an independent 64-bit seed for `label` from a parent seed, so
/// per-lemma work produces the same stream in serial and parallel runs.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Short digest of any serializable configuration value.
pub fn config_digest<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config values serialize");
    sha256_hex(&json)[..16].to_string()
}
