use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::{IngestBackend, MethodConfig};
use crate::extract::Paradigm;
use crate::format::DocFormat;

/// Primary method and ordered fallbacks for each routable format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingPolicy {
    pub primary: BTreeMap<DocFormat, MethodConfig>,
    pub fallback: BTreeMap<DocFormat, Vec<MethodConfig>>,
}

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("{path}:{line}:{col}: {message}")]
    Syntax {
        path: String,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("invalid policy: {0}")]
    Invalid(String),
    #[error("cannot read policy {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Native parser with table lookup for every structured format, layout
/// preserving OCR with table lookup for transcripts, and direct extraction
/// on the same lane as the single fallback.
pub fn default_policy() -> RoutingPolicy {
    let mut primary = BTreeMap::new();
    let mut fallback = BTreeMap::new();
    for format in DocFormat::ALL {
        let backend = IngestBackend::native_for(format).unwrap_or(IngestBackend::OcrPreserving);
        primary.insert(format, MethodConfig::new(backend, Paradigm::Table));
        fallback.insert(format, vec![MethodConfig::new(backend, Paradigm::Direct)]);
    }
    RoutingPolicy { primary, fallback }
}

impl Default for RoutingPolicy {
    fn default() -> Self {
        default_policy()
    }
}

impl RoutingPolicy {
    /// Primary followed by fallbacks, or `None` when the format has no route.
    pub fn chain(&self, format: DocFormat) -> Option<Vec<MethodConfig>> {
        let first = *self.primary.get(&format)?;
        let mut chain = vec![first];
        chain.extend(self.fallback.get(&format).into_iter().flatten().copied());
        Some(chain)
    }

    /// Appends remote OCR with direct extraction to the transcript chain.
    pub fn with_remote_ocr_fallback(mut self) -> Self {
        if self.primary.contains_key(&DocFormat::Transcript) {
            let m = MethodConfig::new(IngestBackend::RemoteOcr, Paradigm::Direct);
            let chain = self.fallback.entry(DocFormat::Transcript).or_default();
            if !chain.contains(&m) {
                chain.push(m);
            }
        }
        self
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        for (format, chain) in self
            .primary
            .keys()
            .map(|f| (f, self.chain(*f).unwrap_or_default()))
        {
            check_chain(*format, &chain).map_err(PolicyError::Invalid)?;
        }
        if let Some(f) = self.fallback.keys().find(|f| !self.primary.contains_key(f)) {
            return Err(PolicyError::Invalid(format!(
                "{f} has fallbacks but no primary method"
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, PolicyError> {
        let raw: RawPolicy = toml::from_str(text).map_err(|e| {
            let (line, col) = e.span().map_or((1, 1), |s| line_col(text, s.start));
            PolicyError::Syntax {
                path: origin.to_owned(),
                line,
                col,
                message: e.message().trim().to_owned(),
            }
        })?;
        let at = |span: std::ops::Range<usize>, message: String| {
            let (line, col) = line_col(text, span.start);
            PolicyError::Syntax {
                path: origin.to_owned(),
                line,
                col,
                message,
            }
        };
        let mut policy = RoutingPolicy {
            primary: BTreeMap::new(),
            fallback: BTreeMap::new(),
        };
        for (format, section) in raw.sections() {
            let Some(section) = section else { continue };
            let section = section.get_ref();
            let parse = |s: &Spanned<String>| {
                s.get_ref()
                    .parse::<MethodConfig>()
                    .map_err(|m| at(s.span(), m))
            };
            let mut chain = vec![parse(&section.primary)?];
            let spans: Vec<_> = std::iter::once(&section.primary)
                .chain(section.fallback.iter())
                .collect();
            for s in &section.fallback {
                chain.push(parse(s)?);
            }
            if let Err(message) = check_chain(format, &chain) {
                let bad = first_bad(format, &chain);
                return Err(at(spans[bad].span(), message));
            }
            policy.primary.insert(format, chain[0]);
            policy.fallback.insert(format, chain[1..].to_vec());
        }
        if policy.primary.is_empty() {
            return Err(PolicyError::Invalid(format!(
                "{origin}: no formats are routed"
            )));
        }
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let text = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        for (format, primary) in &self.primary {
            let fallbacks: Vec<String> = self
                .fallback
                .get(format)
                .into_iter()
                .flatten()
                .map(|m| format!("{:?}", m.name()))
                .collect();
            out.push_str(&format!(
                "[{format}]\nprimary = {:?}\nfallback = [{}]\n\n",
                primary.name(),
                fallbacks.join(", ")
            ));
        }
        out
    }
}

fn check_chain(format: DocFormat, chain: &[MethodConfig]) -> Result<(), String> {
    let idx = first_bad(format, chain);
    if idx == chain.len() {
        return Ok(());
    }
    let m = chain[idx];
    if !m.backend.supports(format) {
        Err(format!("{} cannot read {format} documents", m.backend))
    } else {
        Err(format!("{m} appears more than once in the {format} chain"))
    }
}

/// Index of the first unsupported or repeated method, or `chain.len()`.
fn first_bad(format: DocFormat, chain: &[MethodConfig]) -> usize {
    chain
        .iter()
        .enumerate()
        .position(|(i, m)| !m.backend.supports(format) || chain[..i].contains(m))
        .unwrap_or(chain.len())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    primary: Spanned<String>,
    #[serde(default)]
    fallback: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    markdown: Option<Spanned<RawSection>>,
    docx: Option<Spanned<RawSection>>,
    xlsx: Option<Spanned<RawSection>>,
    pdf: Option<Spanned<RawSection>>,
    transcript: Option<Spanned<RawSection>>,
}

impl RawPolicy {
    fn sections(&self) -> [(DocFormat, Option<&Spanned<RawSection>>); 5] {
        [
            (DocFormat::Markdown, self.markdown.as_ref()),
            (DocFormat::Docx, self.docx.as_ref()),
            (DocFormat::Xlsx, self.xlsx.as_ref()),
            (DocFormat::Pdf, self.pdf.as_ref()),
            (DocFormat::Transcript, self.transcript.as_ref()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syntax(err: PolicyError) -> (usize, usize, String) {
        match err {
            PolicyError::Syntax {
                line, col, message, ..
            } => (line, col, message),
            other => panic!("expected a located error, got {other}"),
        }
    }

    #[test]
    fn default_is_valid_and_round_trips() {
        let p = default_policy();
        p.validate().unwrap();
        assert_eq!(p.chain(DocFormat::Unknown), None);
        let back = RoutingPolicy::from_toml_str(&p.to_toml(), "mem").unwrap();
        assert_eq!(back, p);
        let chain = p
            .clone()
            .with_remote_ocr_fallback()
            .chain(DocFormat::Transcript)
            .unwrap();
        assert_eq!(chain.last().unwrap().backend, IngestBackend::RemoteOcr);
    }

    #[test]
    fn unsupported_backend_points_at_value() {
        let text = "[docx]\nprimary = \"native_docx+table\"\nfallback = [\"native_pdf+direct\"]\n";
        let (line, col, msg) = syntax(RoutingPolicy::from_toml_str(text, "p.toml").unwrap_err());
        assert_eq!((line, col), (3, 13));
        assert!(msg.contains("native_pdf"), "{msg}");
    }

    #[test]
    fn duplicate_and_unknown_entries() {
        let dup = "[pdf]\nprimary = \"native_pdf+table\"\nfallback = [\"native_pdf+table\"]\n";
        let (line, _, msg) = syntax(RoutingPolicy::from_toml_str(dup, "p").unwrap_err());
        assert_eq!(line, 3);
        assert!(msg.contains("more than once"));
        let unknown = "[pdf]\nprimary = \"native_pdf+table\"\nextra = 1\n";
        let (line, _, _) = syntax(RoutingPolicy::from_toml_str(unknown, "p").unwrap_err());
        assert_eq!(line, 3);
        let bad_method = "[pdf]\nprimary = \"native_pdf+guess\"\n";
        let (line, col, _) = syntax(RoutingPolicy::from_toml_str(bad_method, "p").unwrap_err());
        assert_eq!((line, col), (2, 11));
        let bad_format = "[image]\nprimary = \"ocr_preserving+table\"\n";
        assert_eq!(
            syntax(RoutingPolicy::from_toml_str(bad_format, "p").unwrap_err()).0,
            1
        );
        assert!(matches!(
            RoutingPolicy::from_toml_str("", "p"),
            Err(PolicyError::Invalid(_))
        ));
    }
}
