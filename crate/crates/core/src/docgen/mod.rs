//! Seeded synthetic corpus: identity entries embedded in templated documents,
//! rendered to markdown, DOCX, XLSX, PDF and OCR-transcript fixtures, with a
//! JSON manifest carrying the ground truth.
//!
//! On-disk layout: `<root>/<format>/<doc_id>.<ext>` plus `<root>/manifest.json`.

pub mod adversarial;
mod identities;
pub mod ooxml;
pub mod pdf;
pub mod templates;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::format::DocFormat;
use crate::identity::PairSet;
use crate::seed;

pub use identities::generate_identities;
pub use templates::{layout, PageLayout, TemplateId};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum DocgenError {
    #[error("unsupported output format: {0}")]
    UnsupportedFormat(DocFormat),
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error("I/O failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest is not valid JSON: {0}")]
    Manifest(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DocgenError + '_ {
    move |source| DocgenError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub docs_per_format: usize,
    pub entries_min: usize,
    pub entries_max: usize,
    pub formats: Vec<DocFormat>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            seed: 2025,
            docs_per_format: 100,
            entries_min: 10,
            entries_max: 30,
            formats: vec![
                DocFormat::Transcript,
                DocFormat::Docx,
                DocFormat::Xlsx,
                DocFormat::Pdf,
            ],
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), DocgenError> {
        if self.entries_min < 1 || self.entries_min > self.entries_max {
            return Err(DocgenError::InvalidSpec(format!(
                "need 1 <= entries_min <= entries_max, got {}..{}",
                self.entries_min, self.entries_max
            )));
        }
        if self.docs_per_format < 1 {
            return Err(DocgenError::InvalidSpec(
                "docs_per_format must be >= 1".into(),
            ));
        }
        if self.formats.is_empty() {
            return Err(DocgenError::InvalidSpec("no formats requested".into()));
        }
        if let Some(f) = self.formats.iter().find(|f| **f == DocFormat::Unknown) {
            return Err(DocgenError::UnsupportedFormat(*f));
        }
        Ok(())
    }
}

/// One generated document. `path` is relative to the corpus root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub format: DocFormat,
    pub path: String,
    pub truth: PairSet,
    pub template_id: Option<TemplateId>,
    pub seed: u64,
    pub context_fields: BTreeMap<String, String>,
}

impl DocumentRecord {
    pub fn payload_path(&self, root: &Path) -> PathBuf {
        root.join(&self.path)
    }
}

#[derive(Debug, Clone)]
pub struct RenderedDocument {
    pub record: DocumentRecord,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: CorpusSpec,
    pub documents: Vec<DocumentRecord>,
}

impl Manifest {
    pub fn total_pairs(&self) -> usize {
        self.documents.iter().map(|d| d.truth.len()).sum()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(root: &Path) -> Result<Manifest, DocgenError> {
        let path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// SHA-256 of the serialized manifest, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

pub fn render_markdown(page: &PageLayout) -> String {
    let mut out = format!("# {}\n\n", page.title);
    for line in page.context_lines() {
        out.push_str(&line);
        out.push_str("  \n");
    }
    out.push('\n');
    let row = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
    out.push_str(&row(&page.header));
    out.push_str(&format!("|{}\n", " --- |".repeat(page.header.len())));
    for r in &page.rows {
        out.push_str(&row(r));
    }
    out.push('\n');
    out.push_str(&page.footer);
    out.push('\n');
    out
}

/// Renders `truth` in `format`. The document id is taken from
/// `truth.source_doc`.
pub fn render_document(
    truth: &PairSet,
    format: DocFormat,
    template: TemplateId,
    seed: u64,
) -> Result<RenderedDocument, DocgenError> {
    let page = layout(truth, template, seed);
    let bytes = match format {
        DocFormat::Markdown => render_markdown(&page).into_bytes(),
        DocFormat::Docx => ooxml::write_docx(&page),
        DocFormat::Xlsx => ooxml::write_xlsx(&page),
        DocFormat::Pdf => pdf::write_pdf(&page),
        DocFormat::Transcript => {
            let mut s = serde_json::to_string_pretty(&page)?;
            s.push('\n');
            s.into_bytes()
        }
        DocFormat::Unknown => return Err(DocgenError::UnsupportedFormat(format)),
    };
    let record = DocumentRecord {
        doc_id: truth.source_doc.clone(),
        format,
        path: format!(
            "{}/{}.{}",
            format.as_str(),
            truth.source_doc,
            format.extension()
        ),
        truth: truth.clone(),
        template_id: Some(template),
        seed,
        context_fields: page.context_map(),
    };
    Ok(RenderedDocument { record, bytes })
}

/// Truth for the `index`-th source document, shared by every format it is
/// rendered to.
pub fn corpus_entry(spec: &CorpusSpec, index: usize) -> (PairSet, TemplateId, u64) {
    let mut rng = seed::rng(spec.seed, "corpus-entry", index as u64);
    let n = rng.gen_range(spec.entries_min..=spec.entries_max);
    let doc_seed = rng.gen::<u64>();
    let template = TemplateId::ALL[rng.gen_range(0..TemplateId::ALL.len())];
    (generate_identities(doc_seed, n), template, doc_seed)
}

/// Renders every requested document in memory. Deterministic in `spec`.
pub fn build_corpus(spec: &CorpusSpec) -> Result<Vec<RenderedDocument>, DocgenError> {
    spec.validate()?;
    let jobs: Vec<(DocFormat, usize)> = spec
        .formats
        .iter()
        .flat_map(|f| (1..=spec.docs_per_format).map(move |i| (*f, i)))
        .collect();
    jobs.par_iter()
        .map(|&(format, i)| {
            let (mut truth, template, doc_seed) = corpus_entry(spec, i);
            truth.source_doc = format!("{}_{i:04}", format.as_str());
            render_document(&truth, format, template, doc_seed)
        })
        .collect()
}

/// Generates the corpus under `root` and writes the manifest last.
pub fn generate_corpus(spec: &CorpusSpec, root: &Path) -> Result<Manifest, DocgenError> {
    let docs = build_corpus(spec)?;
    for f in &spec.formats {
        let dir = root.join(f.as_str());
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    }
    docs.par_iter().try_for_each(|d| {
        let path = d.record.payload_path(root);
        fs::write(&path, &d.bytes).map_err(io_err(&path))
    })?;
    let manifest = Manifest {
        spec: spec.clone(),
        documents: docs.into_iter().map(|d| d.record).collect(),
    };
    let path = root.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    Ok(manifest)
}
