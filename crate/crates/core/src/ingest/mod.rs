//! Format detection and first-party parsers producing [`StructuredText`].

pub mod layout;
mod markdown;
mod ooxml;
mod pdf;
mod tags;

use std::io::Cursor;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::format::DocFormat;

pub use markdown::parse_markdown;
pub use ooxml::{expand_numeric, parse_docx, parse_xlsx};
pub use pdf::parse_pdf;
pub use tags::wrap_table_tags;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("unsupported PDF feature: {0}")]
    UnsupportedPdfFeature(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        IngestError::MalformedInput(msg.into())
    }
}

/// How much row/column structure survived text extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// A usable table grid is attached.
    Preserved,
    /// Structure exists only as symbols in the text (pipes, tags, tabs).
    SymbolicOnly,
    /// Reading order and grouping are gone.
    Lost,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableModel {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub n_cols: usize,
}

impl TableModel {
    /// Builds a table whose width is the header width; short rows are padded
    /// and long rows truncated.
    pub fn new(header: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        let n_cols = header.len();
        let rows = rows
            .into_iter()
            .map(|mut r| {
                r.resize(n_cols, String::new());
                r
            })
            .collect();
        Self {
            header,
            rows,
            n_cols,
        }
    }

    /// Fewer than two columns or no data rows.
    pub fn is_degenerate(&self) -> bool {
        self.n_cols < 2 || self.rows.is_empty()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&str> {
        self.rows
            .get(row)
            .and_then(|r| r.get(col))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredText {
    pub plain_text: String,
    pub table: Option<TableModel>,
    pub fidelity: Fidelity,
    pub source_format: DocFormat,
    /// Seconds spent producing this text.
    pub extract_time: f64,
}

impl StructuredText {
    /// Assembles a result, keeping the fidelity/table invariant: `Preserved`
    /// only with a non-degenerate table, otherwise `fallback`.
    pub(crate) fn assemble(
        plain_text: String,
        table: Option<TableModel>,
        fallback: Fidelity,
        source_format: DocFormat,
        started: Instant,
    ) -> Result<Self, IngestError> {
        if plain_text.trim().is_empty() {
            return Err(IngestError::malformed("document contains no text"));
        }
        let table = table.filter(|t| !t.is_degenerate());
        let fidelity = if table.is_some() {
            Fidelity::Preserved
        } else {
            fallback
        };
        Ok(Self {
            plain_text,
            table,
            fidelity,
            source_format,
            extract_time: started.elapsed().as_secs_f64(),
        })
    }
}

const ZIP_MAGIC: &[u8] = b"PK\x03\x04";

/// Decides the format from leading bytes, zip part names and the file
/// extension, in that order of precedence.
pub fn detect_format(path: &Path, bytes: &[u8]) -> DocFormat {
    if bytes.is_empty() {
        return DocFormat::Unknown;
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if bytes.starts_with(b"%PDF-") {
        return DocFormat::Pdf;
    }
    if bytes.starts_with(ZIP_MAGIC) {
        if let Ok(archive) = zip::ZipArchive::new(Cursor::new(bytes)) {
            let names: Vec<&str> = archive.file_names().collect();
            if names.contains(&"word/document.xml") {
                return DocFormat::Docx;
            }
            if names
                .iter()
                .any(|n| *n == "xl/workbook.xml" || n.starts_with("xl/worksheets/"))
            {
                return DocFormat::Xlsx;
            }
            return DocFormat::Unknown;
        }
        // Unreadable archive: let the extension pick the parser, which then
        // reports the damage.
        return match ext.as_str() {
            "docx" => DocFormat::Docx,
            "xlsx" => DocFormat::Xlsx,
            _ => DocFormat::Unknown,
        };
    }
    match ext.as_str() {
        "md" | "markdown" => DocFormat::Markdown,
        "transcript" => DocFormat::Transcript,
        _ => DocFormat::Unknown,
    }
}

/// Reads `path` and detects its format.
pub fn load(path: &Path) -> Result<(DocFormat, Vec<u8>), IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok((detect_format(path, &bytes), bytes))
}

/// Dispatches to the native parser for `format`.
pub fn parse_native(format: DocFormat, bytes: &[u8]) -> Result<StructuredText, IngestError> {
    match format {
        DocFormat::Markdown => parse_markdown(bytes),
        DocFormat::Docx => parse_docx(bytes),
        DocFormat::Xlsx => parse_xlsx(bytes),
        DocFormat::Pdf => parse_pdf(bytes),
        DocFormat::Transcript | DocFormat::Unknown => Err(IngestError::malformed(format!(
            "no native parser for {format}"
        ))),
    }
}
