//! Identity-pair extraction from heterogeneous documents.
//!
//! Documents are parsed (or OCR-simulated) into [`StructuredText`], handed to
//! one of three extraction paradigms backed by a language-model [`Gateway`],
//! and scored against ground truth. The [`router`] picks a method per format
//! and [`eval`] runs the full method × format matrix.

pub mod docgen;
pub mod eval;
pub mod extract;
pub mod format;
mod http;
pub mod identity;
pub mod ingest;
pub mod lexicon;
pub mod llm;
pub mod ocr;
pub mod router;
pub mod seed;

pub use docgen::{CorpusSpec, DocumentRecord, Manifest};
pub use eval::{CellReport, DocOutcome, EvalError, MatrixReport};
pub use extract::{ExtractionOutcome, FailureKind, Paradigm};
pub use format::DocFormat;
pub use identity::{score, validate_id, AccuracyMetrics, IdentityPair, PairSet};
pub use ingest::{Fidelity, IngestError, StructuredText, TableModel};
pub use llm::{ClockMode, CostModel, Gateway, GatewayError};
pub use ocr::{OcrMode, OcrProfile, RemoteOcrConfig};
pub use router::{
    default_policy, IngestBackend, IngestContext, MethodConfig, RouteError, RoutedOutcome,
    RoutingPolicy, SourceDocument,
};
