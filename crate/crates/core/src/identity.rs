//! Identity records, ID checksum validation and pair-level scoring.
//!
//! The atomic evaluation unit is a `(name, id_number)` pair. Scoring is exact
//! match after NFC normalization and whitespace trimming; there is no partial
//! credit for a correct name with a wrong ID or vice versa.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Length of a resident identity number.
pub const ID_LEN: usize = 18;

const WEIGHTS: [u32; 17] = [7, 9, 10, 5, 8, 4, 2, 1, 6, 3, 7, 9, 10, 5, 8, 4, 2];
const CHECK_CHARS: &[u8; 11] = b"10X98765432";

/// One `(name, id_number)` record, either ground truth or extracted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdentityPair {
    pub name: String,
    pub id_number: String,
}

impl IdentityPair {
    pub fn new(name: impl Into<String>, id_number: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            id_number: id_number.into(),
        }
    }

    fn normalized(&self) -> (String, String) {
        (normalize(&self.name), normalize(&self.id_number))
    }
}

/// An ordered collection of pairs belonging to one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSet {
    pub source_doc: String,
    pub pairs: Vec<IdentityPair>,
}

impl PairSet {
    pub fn new(source_doc: impl Into<String>, pairs: Vec<IdentityPair>) -> Self {
        Self {
            source_doc: source_doc.into(),
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True when no two pairs share an `id_number`. Ground-truth sets must
    /// satisfy this; extracted sets may not.
    pub fn has_unique_ids(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.pairs.len());
        self.pairs.iter().all(|p| seen.insert(p.id_number.as_str()))
    }

    pub fn id_numbers(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|p| p.id_number.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub true_positives: usize,
    pub extracted_total: usize,
    pub truth_total: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl AccuracyMetrics {
    pub fn is_perfect(&self) -> bool {
        self.f1 == 1.0
    }
}

fn normalize(s: &str) -> String {
    s.trim().nfc().collect()
}

/// Computes the MOD 11-2 check character for a 17-digit body. Returns `None`
/// when `body` is not exactly 17 ASCII digits.
pub fn check_char(body: &str) -> Option<char> {
    let bytes = body.as_bytes();
    if bytes.len() != ID_LEN - 1 || !bytes.iter().all(u8::is_ascii_digit) {
        return None;
    }
    let sum: u32 = bytes
        .iter()
        .zip(WEIGHTS)
        .map(|(b, w)| u32::from(b - b'0') * w)
        .sum();
    Some(CHECK_CHARS[(sum % 11) as usize] as char)
}

/// True iff `candidate` is 17 digits followed by the matching check character.
pub fn validate_id(candidate: &str) -> bool {
    if candidate.len() != ID_LEN || !candidate.is_ascii() {
        return false;
    }
    let (body, last) = candidate.split_at(ID_LEN - 1);
    check_char(body).is_some_and(|c| last.starts_with(c))
}

/// Byte ranges of ID-shaped tokens (17 digits then a digit or `X`) bounded
/// by non-alphanumeric ASCII on both sides. The checksum is not consulted.
pub fn find_id_candidates(text: &str) -> Vec<std::ops::Range<usize>> {
    static RUN: std::sync::OnceLock<regex::Regex> = std::sync::OnceLock::new();
    let run = RUN.get_or_init(|| regex::Regex::new("[0-9A-Za-z]+").expect("static regex"));
    run.find_iter(text)
        .filter(|m| {
            let b = m.as_str().as_bytes();
            b.len() == ID_LEN
                && b[..ID_LEN - 1].iter().all(u8::is_ascii_digit)
                && (b[ID_LEN - 1].is_ascii_digit() || b[ID_LEN - 1] == b'X')
        })
        .map(|m| m.range())
        .collect()
}

/// Counts exact matches between an extraction and the ground truth. Each
/// truth pair is consumed at most once, so duplicated extractions cannot
/// inflate precision.
pub fn match_pairs(extracted: &PairSet, truth: &PairSet) -> MatchResult {
    let mut remaining: HashMap<(String, String), usize> = HashMap::with_capacity(truth.len());
    for p in &truth.pairs {
        *remaining.entry(p.normalized()).or_default() += 1;
    }
    let mut tp = 0;
    for p in &extracted.pairs {
        if let Some(n) = remaining.get_mut(&p.normalized()) {
            if *n > 0 {
                *n -= 1;
                tp += 1;
            }
        }
    }
    MatchResult {
        true_positives: tp,
        extracted_total: extracted.len(),
        truth_total: truth.len(),
    }
}

pub fn compute_metrics(m: MatchResult) -> AccuracyMetrics {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(m.true_positives, m.extracted_total);
    let recall = ratio(m.true_positives, m.truth_total);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    AccuracyMetrics {
        precision,
        recall,
        f1,
    }
}

/// Convenience: match then score.
pub fn score(extracted: &PairSet, truth: &PairSet) -> AccuracyMetrics {
    compute_metrics(match_pairs(extracted, truth))
}
