use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Document container formats handled by the pipeline. `Transcript` stands in
/// for scanned images: it carries the page layout that an OCR engine would see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocFormat {
    Markdown,
    Docx,
    Xlsx,
    Pdf,
    Transcript,
    Unknown,
}

impl DocFormat {
    pub const ALL: [DocFormat; 5] = [
        DocFormat::Markdown,
        DocFormat::Docx,
        DocFormat::Xlsx,
        DocFormat::Pdf,
        DocFormat::Transcript,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocFormat::Markdown => "markdown",
            DocFormat::Docx => "docx",
            DocFormat::Xlsx => "xlsx",
            DocFormat::Pdf => "pdf",
            DocFormat::Transcript => "transcript",
            DocFormat::Unknown => "unknown",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            DocFormat::Markdown => "md",
            DocFormat::Docx => "docx",
            DocFormat::Xlsx => "xlsx",
            DocFormat::Pdf => "pdf",
            DocFormat::Transcript => "transcript",
            DocFormat::Unknown => "bin",
        }
    }
}

impl fmt::Display for DocFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown document format `{0}`")]
pub struct ParseFormatError(pub String);

impl FromStr for DocFormat {
    type Err = ParseFormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(DocFormat::Markdown),
            "docx" => Ok(DocFormat::Docx),
            "xlsx" => Ok(DocFormat::Xlsx),
            "pdf" => Ok(DocFormat::Pdf),
            "transcript" | "png" | "image" => Ok(DocFormat::Transcript),
            _ => Err(ParseFormatError(s.to_owned())),
        }
    }
}
