//! Method × format evaluation matrix: runs every supported combination over a
//! corpus, scores each document, aggregates per cell and writes the reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::docgen::{Manifest, MANIFEST_FILE};
use crate::extract::{FailureKind, Paradigm};
use crate::format::DocFormat;
use crate::identity::score;
use crate::llm::{ClockMode, Gateway};
use crate::router::{run_method, IngestBackend, IngestContext, MethodConfig, SourceDocument};

/// Name of the constant-cost multimodal row.
pub const MULTIMODAL_REFERENCE: &str = "multimodal_reference";

/// Published figures for a vision-language model reading page images
/// directly. Nothing is executed for this row.
pub const MULTIMODAL_F1: f64 = 0.999;
pub const MULTIMODAL_SUCCESS_RATE: f64 = 1.0;
pub const MULTIMODAL_PERFECT_RATE: f64 = 0.97;
pub const MULTIMODAL_TOTAL_S: f64 = 33.9;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no corpus manifest at {0}")]
    CorpusMissing(PathBuf),
    #[error("invalid evaluation config: {0}")]
    ConfigInvalid(String),
    #[error("no {method} cell for {format}")]
    CellMissing { method: String, format: DocFormat },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Every backend except remote OCR crossed with every paradigm.
pub fn default_methods() -> Vec<MethodConfig> {
    IngestBackend::ALL
        .into_iter()
        .filter(|b| *b != IngestBackend::RemoteOcr)
        .flat_map(|b| {
            Paradigm::ALL
                .into_iter()
                .map(move |p| MethodConfig::new(b, p))
        })
        .collect()
}

/// The default methods that can read at least one of `formats`.
pub fn default_methods_for(formats: &[DocFormat]) -> Vec<MethodConfig> {
    default_methods()
        .into_iter()
        .filter(|m| formats.iter().any(|f| m.backend.supports(*f)))
        .collect()
}

/// One scored (document, method) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocOutcome {
    pub doc_id: String,
    pub format: DocFormat,
    pub method: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub success: bool,
    pub failure_kind: Option<FailureKind>,
    pub ocr_s: f64,
    pub llm_s: f64,
    pub total_s: f64,
    pub llm_calls: usize,
    pub output_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub format: DocFormat,
    pub method: String,
    /// True for rows carrying published constants instead of measurements.
    pub reference_constants: bool,
    pub documents: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Population standard deviation of per-document F1.
    pub f1_std: Option<f64>,
    pub success_rate: f64,
    pub perfect_rate: f64,
    pub ocr_s: Option<f64>,
    pub llm_s: Option<f64>,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub clock_mode: ClockMode,
    pub corpus_digest: String,
    pub config_digest: String,
    pub formats: Vec<DocFormat>,
    pub methods: Vec<String>,
    pub cells: Vec<CellReport>,
    pub documents: Vec<DocOutcome>,
}

impl MatrixReport {
    pub fn cell(&self, method: &str, format: DocFormat) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.format == format)
    }

    /// Measured cells with the highest F1 per format; ties go to the higher
    /// perfect rate, then the lower mean time.
    pub fn best_methods(&self) -> Vec<&CellReport> {
        self.formats
            .iter()
            .filter_map(|f| {
                self.cells
                    .iter()
                    .filter(|c| c.format == *f && !c.reference_constants)
                    .max_by(|a, b| {
                        a.f1.total_cmp(&b.f1)
                            .then(a.perfect_rate.total_cmp(&b.perfect_rate))
                            .then(b.total_s.total_cmp(&a.total_s))
                    })
            })
            .collect()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (if n == 0 { 0.0 } else { sum / n as f64 }, n)
}

/// Folds per-document outcomes into one cell. `docs` must already be in
/// canonical (doc_id) order for bit-identical sums.
pub fn aggregate(format: DocFormat, method: &str, docs: &[&DocOutcome]) -> CellReport {
    let m = |f: fn(&DocOutcome) -> f64| mean(docs.iter().map(|d| f(d))).0;
    let f1 = m(|d| d.f1);
    let var = m_var(docs, f1);
    let rate = |pred: fn(&DocOutcome) -> bool| {
        if docs.is_empty() {
            0.0
        } else {
            docs.iter().filter(|d| pred(d)).count() as f64 / docs.len() as f64
        }
    };
    CellReport {
        format,
        method: method.to_owned(),
        reference_constants: false,
        documents: docs.len(),
        precision: m(|d| d.precision),
        recall: m(|d| d.recall),
        f1,
        f1_std: Some(var.sqrt()),
        success_rate: rate(|d| d.success),
        perfect_rate: rate(|d| d.f1 == 1.0),
        ocr_s: Some(m(|d| d.ocr_s)),
        llm_s: Some(m(|d| d.llm_s)),
        total_s: m(|d| d.total_s),
    }
}

fn m_var(docs: &[&DocOutcome], mu: f64) -> f64 {
    mean(docs.iter().map(|d| (d.f1 - mu).powi(2))).0
}

pub fn multimodal_reference_cell() -> CellReport {
    CellReport {
        format: DocFormat::Transcript,
        method: MULTIMODAL_REFERENCE.to_owned(),
        reference_constants: true,
        documents: 0,
        precision: MULTIMODAL_F1,
        recall: MULTIMODAL_F1,
        f1: MULTIMODAL_F1,
        f1_std: None,
        success_rate: MULTIMODAL_SUCCESS_RATE,
        perfect_rate: MULTIMODAL_PERFECT_RATE,
        ocr_s: None,
        llm_s: None,
        total_s: MULTIMODAL_TOTAL_S,
    }
}

fn config_digest(methods: &[MethodConfig], gateway: &Gateway, ctx: &IngestContext) -> String {
    let names: Vec<String> = methods.iter().map(MethodConfig::name).collect();
    let text = format!(
        "methods={}\nbackend={}\ncost={:?}\nclock={}\nocr_preserving={:?}\nocr_destroying={:?}\nremote_ocr={:?}\n",
        names.join(","),
        gateway.backend_name(),
        gateway.cost(),
        ctx.clock,
        ctx.ocr_preserving,
        ctx.ocr_destroying,
        ctx.remote_ocr.as_ref().map(|c| &c.endpoint),
    );
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Runs every (document, method) pair the support matrix allows.
pub fn run_matrix(
    manifest: &Manifest,
    corpus_root: &Path,
    methods: &[MethodConfig],
    gateway: &Gateway,
    ctx: &IngestContext,
    workers: usize,
) -> Result<MatrixReport, EvalError> {
    if workers == 0 {
        return Err(EvalError::ConfigInvalid(
            "workers must be at least 1".into(),
        ));
    }
    if gateway.clock() != ctx.clock {
        return Err(EvalError::ConfigInvalid(format!(
            "gateway clock {} differs from ingest clock {}",
            gateway.clock(),
            ctx.clock
        )));
    }
    let mut formats: Vec<DocFormat> = manifest.documents.iter().map(|d| d.format).collect();
    formats.sort();
    formats.dedup();
    let mut seen = Vec::new();
    for m in methods {
        if seen.contains(m) {
            return Err(EvalError::ConfigInvalid(format!("{m} listed twice")));
        }
        seen.push(*m);
        if !formats.iter().any(|f| m.backend.supports(*f)) {
            return Err(EvalError::ConfigInvalid(format!(
                "{m} supports none of the corpus formats"
            )));
        }
    }
    let mut records: Vec<_> = manifest.documents.iter().collect();
    records.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let docs: Vec<SourceDocument> = records
        .iter()
        .map(|r| SourceDocument::from_record(r, corpus_root))
        .collect::<Result<_, _>>()
        .map_err(|e| EvalError::CorpusMissing(PathBuf::from(e.to_string())))?;
    let jobs: Vec<(usize, MethodConfig)> = methods
        .iter()
        .flat_map(|m| {
            docs.iter()
                .enumerate()
                .filter(|(_, d)| m.backend.supports(d.format))
                .map(move |(i, _)| (i, *m))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvalError::ConfigInvalid(e.to_string()))?;
    let outcomes: Vec<DocOutcome> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, method)| {
                let doc = &docs[i];
                let out = run_method(doc, method, gateway, ctx);
                let acc = score(&out.pairs, &records[i].truth);
                DocOutcome {
                    doc_id: doc.doc_id.clone(),
                    format: doc.format,
                    method: method.name(),
                    precision: acc.precision,
                    recall: acc.recall,
                    f1: acc.f1,
                    success: !out.fatal,
                    failure_kind: out.failure_kind,
                    ocr_s: out.ocr_seconds,
                    llm_s: out.llm_seconds,
                    total_s: out.total_seconds,
                    llm_calls: out.llm_calls,
                    output_tokens: out.output_tokens,
                }
            })
            .collect()
    });
    let method_names: Vec<String> = methods.iter().map(MethodConfig::name).collect();
    let mut cells = aggregate_all(&formats, &method_names, &outcomes);
    if formats.contains(&DocFormat::Transcript) {
        cells.push(multimodal_reference_cell());
    }
    Ok(MatrixReport {
        clock_mode: ctx.clock,
        corpus_digest: manifest.digest(),
        config_digest: config_digest(methods, gateway, ctx),
        formats,
        methods: method_names,
        cells,
        documents: outcomes,
    })
}

/// Rebuilds measured cells from per-document outcomes, in method then format
/// order. Combinations without outcomes produce no cell.
pub fn aggregate_all(
    formats: &[DocFormat],
    methods: &[String],
    outcomes: &[DocOutcome],
) -> Vec<CellReport> {
    let mut groups: BTreeMap<(&str, DocFormat), Vec<&DocOutcome>> = BTreeMap::new();
    for o in outcomes {
        groups
            .entry((o.method.as_str(), o.format))
            .or_default()
            .push(o);
    }
    let mut cells = Vec::new();
    for m in methods {
        for f in formats {
            if let Some(docs) = groups.get_mut(&(m.as_str(), *f)) {
                docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
                cells.push(aggregate(*f, m, docs));
            }
        }
    }
    cells
}

/// Loads `<root>/manifest.json` and runs the matrix.
pub fn evaluate_corpus(
    corpus_root: &Path,
    methods: &[MethodConfig],
    gateway: &Gateway,
    ctx: &IngestContext,
    workers: usize,
) -> Result<MatrixReport, EvalError> {
    let path = corpus_root.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(EvalError::CorpusMissing(path));
    }
    let manifest =
        Manifest::load(corpus_root).map_err(|e| EvalError::ConfigInvalid(e.to_string()))?;
    run_matrix(&manifest, corpus_root, methods, gateway, ctx, workers)
}

/// `slow.total_s / fast.total_s` for two cells of the same format.
pub fn compare_speedup(
    r: &MatrixReport,
    fast: &str,
    slow: &str,
    format: DocFormat,
) -> Result<f64, EvalError> {
    let get = |name: &str| {
        r.cell(name, format)
            .filter(|c| c.success_rate > 0.0 && c.total_s > 0.0)
            .ok_or_else(|| EvalError::CellMissing {
                method: name.to_owned(),
                format,
            })
    };
    Ok(get(slow)?.total_s / get(fast)?.total_s)
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".to_owned(), num)
}

pub const TABLE_HEADER: &str =
    "format,method,precision,recall,f1,success_rate,perfect_rate,ocr_s,llm_s,total_s,f1_std,reference_constants";

pub fn render_table_csv(r: &MatrixReport) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for c in &r.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            c.format,
            c.method,
            num(c.precision),
            num(c.recall),
            num(c.f1),
            num(c.success_rate),
            num(c.perfect_rate),
            opt(c.ocr_s),
            opt(c.llm_s),
            num(c.total_s),
            opt(c.f1_std),
            c.reference_constants,
        );
    }
    out
}

/// One row per format, one column per method; `null` marks unsupported
/// combinations.
pub fn render_heatmap(r: &MatrixReport, value: fn(&CellReport) -> f64) -> String {
    let mut out = String::from("format");
    for m in &r.methods {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for f in &r.formats {
        out.push_str(f.as_str());
        for m in &r.methods {
            out.push(',');
            out.push_str(&opt(r.cell(m, *f).map(value)));
        }
        out.push('\n');
    }
    out
}

pub const REPORT_FILES: [&str; 4] = [
    "matrix.json",
    "table.csv",
    "heatmap_f1.csv",
    "heatmap_time.csv",
];

/// Writes the four report files into `out_dir` and returns their paths.
pub fn emit_reports(r: &MatrixReport, out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EvalError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut json = serde_json::to_string_pretty(r).expect("report serializes");
    json.push('\n');
    let contents = [
        json,
        render_table_csv(r),
        render_heatmap(r, |c| c.f1),
        render_heatmap(r, |c| c.total_s),
    ];
    let mut written = Vec::new();
    for (name, body) in REPORT_FILES.iter().zip(contents) {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(doc: &str, method: &str, f1: f64, success: bool, t: f64) -> DocOutcome {
        DocOutcome {
            doc_id: doc.into(),
            format: DocFormat::Docx,
            method: method.into(),
            precision: f1,
            recall: f1,
            f1,
            success,
            failure_kind: None,
            ocr_s: 0.0,
            llm_s: t,
            total_s: t,
            llm_calls: 1,
            output_tokens: 1,
        }
    }

    #[test]
    fn default_method_count() {
        assert_eq!(default_methods().len(), 21);
    }

    #[test]
    fn aggregation_counts_failures_as_zero() {
        let docs = [
            outcome("a", "m", 1.0, true, 1.0),
            outcome("b", "m", 0.0, false, 3.0),
            outcome("c", "m", 0.5, true, 2.0),
        ];
        let refs: Vec<&DocOutcome> = docs.iter().collect();
        let c = aggregate(DocFormat::Docx, "m", &refs);
        assert_eq!(c.f1, 0.5);
        assert!((c.success_rate - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.perfect_rate - 1.0 / 3.0).abs() < 1e-12);
        assert!((c.f1_std.unwrap() - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert_eq!(c.total_s, 2.0);
    }

    #[test]
    fn speedup_and_missing_cells() {
        let docs = [
            outcome("a", "fast", 1.0, true, 0.5),
            outcome("a", "slow", 1.0, true, 20.0),
        ];
        let methods = vec!["fast".to_owned(), "slow".to_owned(), "absent".to_owned()];
        let r = MatrixReport {
            clock_mode: ClockMode::Virtual,
            corpus_digest: String::new(),
            config_digest: String::new(),
            formats: vec![DocFormat::Docx, DocFormat::Pdf],
            cells: aggregate_all(&[DocFormat::Docx, DocFormat::Pdf], &methods, &docs),
            methods,
            documents: docs.to_vec(),
        };
        assert_eq!(
            compare_speedup(&r, "fast", "slow", DocFormat::Docx).unwrap(),
            40.0
        );
        assert_eq!(
            compare_speedup(&r, "fast", "fast", DocFormat::Docx).unwrap(),
            1.0
        );
        assert!(matches!(
            compare_speedup(&r, "fast", "absent", DocFormat::Docx),
            Err(EvalError::CellMissing { .. })
        ));
        let heat = render_heatmap(&r, |c| c.f1);
        assert_eq!(heat.matches("null").count(), 4);
        assert!(heat.starts_with("format,fast,slow,absent\ndocx,1.000000,1.000000,null\n"));
    }

    #[test]
    fn multimodal_row_ratio() {
        let ratio = MULTIMODAL_TOTAL_S / 0.63;
        assert!((ratio - 53.8).abs() < 0.1);
        assert!(
            multimodal_reference_cell().perfect_rate <= multimodal_reference_cell().success_rate
        );
    }
}
