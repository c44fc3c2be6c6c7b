//! Format-aware routing: pick an (ingest backend, paradigm) pair per document
//! format, run it with stage timing, and walk a fallback chain on fatal
//! failures.

mod policy;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::docgen::DocumentRecord;
use crate::extract::{ExtractionOutcome, FailureKind, Paradigm};
use crate::format::DocFormat;
use crate::identity::PairSet;
use crate::ingest::{self, IngestError, StructuredText};
use crate::llm::{ClockMode, Gateway};
use crate::ocr::{self, OcrProfile, RemoteOcrConfig};

pub use policy::{default_policy, PolicyError, RoutingPolicy};

/// Text-extraction lanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IngestBackend {
    NativeMarkdown,
    NativeDocx,
    NativeXlsx,
    NativePdf,
    OcrPreserving,
    OcrDestroying,
    /// Native PDF text with the table re-emitted as markup tags.
    TagWrappingFixture,
    RemoteOcr,
}

impl IngestBackend {
    pub const ALL: [IngestBackend; 8] = [
        IngestBackend::NativeMarkdown,
        IngestBackend::NativeDocx,
        IngestBackend::NativeXlsx,
        IngestBackend::NativePdf,
        IngestBackend::OcrPreserving,
        IngestBackend::OcrDestroying,
        IngestBackend::TagWrappingFixture,
        IngestBackend::RemoteOcr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IngestBackend::NativeMarkdown => "native_markdown",
            IngestBackend::NativeDocx => "native_docx",
            IngestBackend::NativeXlsx => "native_xlsx",
            IngestBackend::NativePdf => "native_pdf",
            IngestBackend::OcrPreserving => "ocr_preserving",
            IngestBackend::OcrDestroying => "ocr_destroying",
            IngestBackend::TagWrappingFixture => "tag_wrapping_fixture",
            IngestBackend::RemoteOcr => "remote_ocr",
        }
    }

    /// The fixed support matrix.
    pub fn supports(self, format: DocFormat) -> bool {
        use IngestBackend::*;
        matches!(
            (self, format),
            (NativeMarkdown, DocFormat::Markdown)
                | (NativeDocx, DocFormat::Docx)
                | (NativeXlsx, DocFormat::Xlsx)
                | (NativePdf, DocFormat::Pdf)
                | (TagWrappingFixture, DocFormat::Pdf)
                | (
                    OcrPreserving | OcrDestroying | RemoteOcr,
                    DocFormat::Transcript
                )
        )
    }

    pub fn native_for(format: DocFormat) -> Option<IngestBackend> {
        match format {
            DocFormat::Markdown => Some(IngestBackend::NativeMarkdown),
            DocFormat::Docx => Some(IngestBackend::NativeDocx),
            DocFormat::Xlsx => Some(IngestBackend::NativeXlsx),
            DocFormat::Pdf => Some(IngestBackend::NativePdf),
            DocFormat::Transcript | DocFormat::Unknown => None,
        }
    }

    /// Virtual-clock cost of the native parsers, in seconds per document.
    fn virtual_parse_seconds(self) -> Option<f64> {
        match self {
            IngestBackend::NativeMarkdown => Some(0.01),
            IngestBackend::NativeDocx => Some(0.05),
            IngestBackend::NativeXlsx => Some(0.02),
            IngestBackend::NativePdf | IngestBackend::TagWrappingFixture => Some(0.1),
            _ => None,
        }
    }
}

impl fmt::Display for IngestBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IngestBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IngestBackend::ALL
            .into_iter()
            .find(|b| b.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                let names: Vec<&str> = IngestBackend::ALL.iter().map(|b| b.as_str()).collect();
                format!(
                    "unknown ingest backend {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// One cell of the evaluation matrix. Written `backend+paradigm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MethodConfig {
    pub backend: IngestBackend,
    pub paradigm: Paradigm,
}

impl MethodConfig {
    pub fn new(backend: IngestBackend, paradigm: Paradigm) -> Self {
        Self { backend, paradigm }
    }

    pub fn name(&self) -> String {
        format!("{}+{}", self.backend, self.paradigm)
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.backend, self.paradigm)
    }
}

impl FromStr for MethodConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (b, p) = s
            .split_once('+')
            .ok_or_else(|| format!("method {s:?} must look like backend+paradigm"))?;
        Ok(Self::new(b.parse()?, p.parse()?))
    }
}

/// How each ingest backend is parameterized for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestContext {
    pub ocr_preserving: OcrProfile,
    pub ocr_destroying: OcrProfile,
    pub remote_ocr: Option<RemoteOcrConfig>,
    pub clock: ClockMode,
}

impl Default for IngestContext {
    fn default() -> Self {
        Self {
            ocr_preserving: OcrProfile::layout_preserving(),
            ocr_destroying: OcrProfile::layout_destroying(),
            remote_ocr: None,
            clock: ClockMode::Virtual,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RouteError {
    #[error("no route for format {0}")]
    UnroutableFormat(DocFormat),
    #[error(transparent)]
    Io(#[from] IngestError),
}

/// A document's bytes with its identity and detected format.
#[derive(Debug, Clone)]
pub struct SourceDocument {
    pub doc_id: String,
    pub format: DocFormat,
    pub bytes: Vec<u8>,
}

impl SourceDocument {
    pub fn from_record(record: &DocumentRecord, corpus_root: &Path) -> Result<Self, IngestError> {
        let path = record.payload_path(corpus_root);
        let bytes = std::fs::read(&path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self {
            doc_id: record.doc_id.clone(),
            format: record.format,
            bytes,
        })
    }

    /// Reads a file and detects its format; the file stem becomes the id.
    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let (format, bytes) = ingest::load(path)?;
        let doc_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("document")
            .to_owned();
        Ok(Self {
            doc_id,
            format,
            bytes,
        })
    }
}

/// Runs one ingest backend. `extract_time` follows the clock: fixed per-lane
/// constants under the virtual clock, measured time under the wall clock.
/// Simulated OCR always charges its profile's engine time.
pub fn ingest_with(
    doc: &SourceDocument,
    backend: IngestBackend,
    ctx: &IngestContext,
) -> Result<StructuredText, String> {
    if !backend.supports(doc.format) {
        return Err(format!("{backend} does not read {} documents", doc.format));
    }
    let started = Instant::now();
    let mut st = match backend {
        IngestBackend::NativeMarkdown
        | IngestBackend::NativeDocx
        | IngestBackend::NativeXlsx
        | IngestBackend::NativePdf => {
            ingest::parse_native(doc.format, &doc.bytes).map_err(|e| e.to_string())?
        }
        IngestBackend::TagWrappingFixture => {
            ingest::wrap_table_tags(ingest::parse_pdf(&doc.bytes).map_err(|e| e.to_string())?)
        }
        IngestBackend::OcrPreserving => {
            ocr::transcribe(&doc.bytes, &doc.doc_id, &ctx.ocr_preserving)
                .map_err(|e| e.to_string())?
        }
        IngestBackend::OcrDestroying => {
            ocr::transcribe(&doc.bytes, &doc.doc_id, &ctx.ocr_destroying)
                .map_err(|e| e.to_string())?
        }
        IngestBackend::RemoteOcr => {
            let cfg = ctx
                .remote_ocr
                .as_ref()
                .ok_or_else(|| "remote OCR endpoint is not configured".to_owned())?;
            ocr::remote_ocr(&doc.bytes, cfg).map_err(|e| e.to_string())?
        }
    };
    if let Some(constant) = backend.virtual_parse_seconds() {
        st.extract_time = match ctx.clock {
            ClockMode::Virtual => constant,
            ClockMode::Wall => started.elapsed().as_secs_f64(),
        };
    }
    Ok(st)
}

/// Ingest plus one paradigm. Ingest errors become a fatal `IngestFailed`
/// outcome.
pub fn run_method(
    doc: &SourceDocument,
    method: MethodConfig,
    gateway: &Gateway,
    ctx: &IngestContext,
) -> ExtractionOutcome {
    let mut outcome = match ingest_with(doc, method.backend, ctx) {
        Ok(st) => method.paradigm.run(&st, gateway),
        Err(detail) => ExtractionOutcome {
            pairs: PairSet::default(),
            paradigm: method.paradigm,
            ocr_seconds: 0.0,
            llm_seconds: 0.0,
            total_seconds: 0.0,
            fatal: true,
            failure_kind: Some(FailureKind::IngestFailed),
            failure_detail: Some(detail),
            llm_calls: 0,
            output_tokens: 0,
        },
    };
    outcome.pairs.source_doc = doc.doc_id.clone();
    outcome
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub method: MethodConfig,
    pub failure_kind: Option<FailureKind>,
    pub failure_detail: Option<String>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedOutcome {
    /// Pairs from the successful attempt; timings summed over all attempts.
    pub outcome: ExtractionOutcome,
    /// The method that produced the pairs, if any did.
    pub method: Option<MethodConfig>,
    pub attempts: Vec<Attempt>,
}

/// Runs the policy's primary method for the document's format and, on a fatal
/// outcome, each fallback in order.
pub fn route_and_extract(
    doc: &SourceDocument,
    policy: &RoutingPolicy,
    gateway: &Gateway,
    ctx: &IngestContext,
) -> Result<RoutedOutcome, RouteError> {
    let chain = policy
        .chain(doc.format)
        .ok_or(RouteError::UnroutableFormat(doc.format))?;
    let mut attempts = Vec::new();
    let (mut ocr_s, mut llm_s, mut total_s) = (0.0, 0.0, 0.0);
    let (mut calls, mut tokens) = (0, 0);
    let mut last_paradigm = chain[0].paradigm;
    for method in chain {
        let out = run_method(doc, method, gateway, ctx);
        ocr_s += out.ocr_seconds;
        llm_s += out.llm_seconds;
        total_s += out.total_seconds;
        calls += out.llm_calls;
        tokens += out.output_tokens;
        last_paradigm = method.paradigm;
        attempts.push(Attempt {
            method,
            failure_kind: out.failure_kind,
            failure_detail: out.failure_detail.clone(),
            total_seconds: out.total_seconds,
        });
        if !out.fatal {
            return Ok(RoutedOutcome {
                outcome: ExtractionOutcome {
                    ocr_seconds: ocr_s,
                    llm_seconds: llm_s,
                    total_seconds: total_s,
                    llm_calls: calls,
                    output_tokens: tokens,
                    ..out
                },
                method: Some(method),
                attempts,
            });
        }
    }
    let detail = attempts
        .iter()
        .map(|a| {
            format!(
                "{}: {}",
                a.method,
                a.failure_kind.map_or("ok", FailureKind::as_str)
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(RoutedOutcome {
        outcome: ExtractionOutcome {
            pairs: PairSet::new(doc.doc_id.clone(), Vec::new()),
            paradigm: last_paradigm,
            ocr_seconds: ocr_s,
            llm_seconds: llm_s,
            total_seconds: total_s,
            fatal: true,
            failure_kind: Some(FailureKind::Exhausted),
            failure_detail: Some(detail),
            llm_calls: calls,
            output_tokens: tokens,
        },
        method: None,
        attempts,
    })
}
