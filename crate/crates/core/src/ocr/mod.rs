//! Simulated OCR over transcript fixtures, plus a client for a real OCR
//! service.
//!
//! A transcript fixture is the JSON page description docgen writes for the
//! image lane. Two engine behaviours are modelled: one keeps the page's
//! column alignment, the other emits text fragments in a jittered reading
//! order with no grouping. Both substitute look-alike glyphs at a configurable
//! rate.

mod remote;

use std::sync::OnceLock;

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::docgen::PageLayout;
use crate::format::DocFormat;
use crate::ingest::{Fidelity, StructuredText, TableModel};
use crate::lexicon::{confusables, display_width};
use crate::seed;

pub use remote::{remote_ocr, RemoteOcrConfig};

#[derive(Debug, thiserror::Error)]
pub enum OcrError {
    #[error("document has no tabular page to transcribe: {0}")]
    NotRasterizable(String),
    #[error("OCR service timed out or is unreachable: {0}")]
    Timeout(String),
    #[error("OCR service failed: {0}")]
    RemoteFailure(String),
    #[error("OCR service response is malformed: {0}")]
    MalformedResponse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OcrMode {
    LayoutPreserving,
    LayoutDestroying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcrProfile {
    pub mode: OcrMode,
    pub char_noise_rate: f64,
    pub noise_seed: u64,
    pub simulated_ocr_seconds: f64,
}

impl OcrProfile {
    /// Column-keeping engine: low glyph noise, 0.3 s per page.
    pub fn layout_preserving() -> Self {
        Self {
            mode: OcrMode::LayoutPreserving,
            char_noise_rate: 0.0015,
            noise_seed: 0,
            simulated_ocr_seconds: 0.3,
        }
    }

    /// Fragmenting engine: higher glyph noise, 1.2 s per page.
    pub fn layout_destroying() -> Self {
        Self {
            mode: OcrMode::LayoutDestroying,
            char_noise_rate: 0.02,
            noise_seed: 0,
            simulated_ocr_seconds: 1.2,
        }
    }

    pub fn with_noise(mut self, rate: f64) -> Self {
        self.char_noise_rate = rate;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.noise_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.char_noise_rate) {
            return Err(format!(
                "char_noise_rate {} outside [0, 1]",
                self.char_noise_rate
            ));
        }
        if self.simulated_ocr_seconds.is_nan() || self.simulated_ocr_seconds < 0.0 {
            return Err("simulated_ocr_seconds must be >= 0".into());
        }
        Ok(())
    }
}

/// Raw engine output before structure recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub lines: Vec<String>,
    pub provenance: OcrProfile,
}

/// How far a fragment may drift from its reading-order slot, in fragments.
const JITTER_WINDOW: f64 = 1.5;

fn pad_to(s: &str, width: usize) -> String {
    let mut out = s.to_owned();
    out.extend(std::iter::repeat_n(
        ' ',
        width.saturating_sub(display_width(s)),
    ));
    out
}

fn aligned_lines(page: &PageLayout) -> Vec<String> {
    let mut lines = vec![page.title.clone()];
    lines.extend(page.context_lines());
    let widths: Vec<usize> = (0..page.header.len())
        .map(|c| {
            std::iter::once(&page.header[c])
                .chain(page.rows.iter().map(|r| &r[c]))
                .map(|s| display_width(s))
                .max()
                .unwrap_or(0)
        })
        .collect();
    for row in std::iter::once(&page.header).chain(&page.rows) {
        let last = row.len().saturating_sub(1);
        let line: String = row
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                if i == last {
                    cell.clone()
                } else {
                    pad_to(cell, widths[i] + 2)
                }
            })
            .collect();
        lines.push(line);
    }
    lines.push(page.footer.clone());
    lines
}

fn fragments(page: &PageLayout, doc_id: &str, profile: &OcrProfile) -> Vec<String> {
    let mut frags = vec![page.title.clone()];
    frags.extend(page.context_lines());
    frags.extend(page.header.iter().cloned());
    for row in &page.rows {
        frags.extend(row.iter().cloned());
    }
    frags.push(page.footer.clone());
    let mut rng = seed::rng(profile.noise_seed, &format!("ocr-order/{doc_id}"), 0);
    let mut keyed: Vec<(f64, String)> = frags
        .into_iter()
        .enumerate()
        .map(|(i, f)| (i as f64 + rng.gen::<f64>() * JITTER_WINDOW, f))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, f)| f).collect()
}

/// Substitutes each glyph that has look-alikes with probability `rate`.
/// Deterministic in `(seed, doc_id)` and the input text.
pub fn apply_noise(lines: &mut [String], rate: f64, seed: u64, doc_id: &str) {
    if rate <= 0.0 {
        return;
    }
    let mut rng = seed::rng(seed, &format!("ocr-noise/{doc_id}"), 0);
    for line in lines.iter_mut() {
        let noisy: String = line
            .chars()
            .map(|c| {
                let subs = confusables(c);
                if subs.is_empty() || !rng.gen_bool(rate) {
                    c
                } else {
                    subs[rng.gen_range(0..subs.len())]
                }
            })
            .collect();
        *line = noisy;
    }
}

/// Renders the engine's line output for a page.
pub fn render_transcript(page: &PageLayout, doc_id: &str, profile: &OcrProfile) -> Transcript {
    let mut lines = match profile.mode {
        OcrMode::LayoutPreserving => aligned_lines(page),
        OcrMode::LayoutDestroying => fragments(page, doc_id, profile),
    };
    apply_noise(
        &mut lines,
        profile.char_noise_rate,
        profile.noise_seed,
        doc_id,
    );
    Transcript {
        lines,
        provenance: *profile,
    }
}

fn column_gap() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\s{2,}").expect("static regex"))
}

/// Recovers a table from column-aligned lines: the first line with two or
/// more whitespace-separated fields is the header, and following lines with
/// the same field count are rows.
pub fn table_from_aligned(lines: &[String]) -> Option<TableModel> {
    let split =
        |l: &str| -> Vec<String> { column_gap().split(l.trim()).map(str::to_owned).collect() };
    let start = lines.iter().position(|l| split(l).len() >= 2)?;
    let header = split(&lines[start]);
    let rows: Vec<Vec<String>> = lines[start + 1..]
        .iter()
        .map(|l| split(l))
        .take_while(|cells| cells.len() == header.len())
        .collect();
    let table = TableModel::new(header, rows);
    (!table.is_degenerate()).then_some(table)
}

/// Turns a transcript into structured text. `extract_time` is the profile's
/// simulated engine time.
pub fn structure(transcript: Transcript) -> StructuredText {
    let (table, fidelity) = match transcript.provenance.mode {
        OcrMode::LayoutPreserving => match table_from_aligned(&transcript.lines) {
            Some(t) => (Some(t), Fidelity::Preserved),
            None => (None, Fidelity::SymbolicOnly),
        },
        OcrMode::LayoutDestroying => (None, Fidelity::Lost),
    };
    StructuredText {
        plain_text: transcript.lines.join("\n"),
        table,
        fidelity,
        source_format: DocFormat::Transcript,
        extract_time: transcript.provenance.simulated_ocr_seconds,
    }
}

/// Decodes a transcript fixture.
pub fn read_fixture(bytes: &[u8]) -> Result<PageLayout, OcrError> {
    let page: PageLayout = serde_json::from_slice(bytes)
        .map_err(|e| OcrError::NotRasterizable(format!("not a transcript fixture: {e}")))?;
    if !page.has_table() {
        return Err(OcrError::NotRasterizable("page has no table".into()));
    }
    if page.rows.iter().any(|r| r.len() != page.header.len()) {
        return Err(OcrError::NotRasterizable("ragged table rows".into()));
    }
    Ok(page)
}

/// Simulated OCR of a transcript fixture.
pub fn transcribe(
    fixture: &[u8],
    doc_id: &str,
    profile: &OcrProfile,
) -> Result<StructuredText, OcrError> {
    profile.validate().map_err(OcrError::NotRasterizable)?;
    let page = read_fixture(fixture)?;
    Ok(structure(render_transcript(&page, doc_id, profile)))
}
