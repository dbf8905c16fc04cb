//! Text to shingle sets: documents become sets of w-gram fingerprints that
//! the sketching layer treats as plain integer sets.
//!
//! Normalization is deliberately blunt (lowercase, strip non-alphanumerics,
//! split on whitespace) so that near-duplicate prose maps to overlapping
//! shingle sets regardless of punctuation and casing.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// How text is reduced to shingles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShingleConfig {
    w: u32,
    domain_bits: u32,
    lowercase: bool,
}

impl ShingleConfig {
    /// `w` is the shingle width in tokens (at least 1); `domain_bits` is the
    /// fingerprint width (1..=64); `lowercase` folds case before hashing.
    pub fn new(w: u32, domain_bits: u32, lowercase: bool) -> Result<Self> {
        if w == 0 {
            return Err(Error::Domain("shingle width must be at least 1"));
        }
        if domain_bits == 0 || domain_bits > 64 {
            return Err(Error::Domain("fingerprint width must lie in 1..=64"));
        }
        Ok(Self { w, domain_bits, lowercase })
    }

    /// Tokens per shingle.
    pub fn w(&self) -> u32 {
        self.w
    }

    /// Fingerprint width in bits.
    pub fn domain_bits(&self) -> u32 {
        self.domain_bits
    }

    /// Whether tokens are case-folded.
    pub fn lowercase(&self) -> bool {
        self.lowercase
    }
}

impl Default for ShingleConfig {
    /// Five-token shingles fingerprinted to 64 bits, case-folded.
    fn default() -> Self {
        Self { w: 5, domain_bits: 64, lowercase: true }
    }
}

/// A named set of shingle fingerprints, sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    id: String,
    shingles: Vec<u64>,
}

impl Document {
    /// Wraps a precomputed fingerprint set (sorted and deduplicated here).
    pub fn from_shingles(id: impl Into<String>, mut shingles: Vec<u64>) -> Self {
        shingles.sort_unstable();
        shingles.dedup();
        Self { id: id.into(), shingles }
    }

    /// Stable identifier, typically a file name or line number.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// The fingerprint set, sorted ascending.
    pub fn shingles(&self) -> &[u64] {
        &self.shingles
    }

    /// Number of distinct shingles.
    pub fn len(&self) -> usize {
        self.shingles.len()
    }

    /// True when normalization left no tokens at all.
    pub fn is_empty(&self) -> bool {
        self.shingles.is_empty()
    }
}

fn fnv1a_push(state: &mut u64, bytes: &[u8]) {
    for &byte in bytes {
        *state ^= u64::from(byte);
        *state = state.wrapping_mul(FNV_PRIME);
    }
}

fn fingerprint(window: &[String], domain_bits: u32) -> u64 {
    let mut state = FNV_OFFSET;
    for (i, token) in window.iter().enumerate() {
        if i > 0 {
            fnv1a_push(&mut state, b" ");
        }
        fnv1a_push(&mut state, token.as_bytes());
    }
    if domain_bits == 64 {
        state
    } else {
        state & ((1u64 << domain_bits) - 1)
    }
}

fn normalize_tokens(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let mut token = String::new();
            for ch in raw.chars().filter(|c| c.is_alphanumeric()) {
                if lowercase {
                    token.extend(ch.to_lowercase());
                } else {
                    token.push(ch);
                }
            }
            if token.is_empty() {
                None
            } else {
                Some(token)
            }
        })
        .collect()
}

/// Reduces `text` to its shingle set. Texts with fewer than `w` tokens (but
/// at least one) yield a single shingle over everything; texts that
/// normalize to nothing yield an empty document.
pub fn shingle(id: impl Into<String>, text: &str, cfg: &ShingleConfig) -> Document {
    let tokens = normalize_tokens(text, cfg.lowercase);
    let mut shingles: Vec<u64> = if tokens.is_empty() {
        Vec::new()
    } else if tokens.len() < cfg.w as usize {
        alloc::vec![fingerprint(&tokens, cfg.domain_bits)]
    } else {
        tokens
            .windows(cfg.w as usize)
            .map(|win| fingerprint(win, cfg.domain_bits))
            .collect()
    };
    shingles.sort_unstable();
    shingles.dedup();
    Document { id: id.into(), shingles }
}

/// Exact resemblance `|A n B| / |A u B|` of two shingle sets; `None` when
/// both sets are empty (the ratio is undefined there).
pub fn exact_resemblance(a: &Document, b: &Document) -> Option<f64> {
    if a.shingles.is_empty() && b.shingles.is_empty() {
        return None;
    }
    let mut inter = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.shingles.len() && j < b.shingles.len() {
        match a.shingles[i].cmp(&b.shingles[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.shingles.len() + b.shingles.len() - inter;
    Some(inter as f64 / union as f64)
}
