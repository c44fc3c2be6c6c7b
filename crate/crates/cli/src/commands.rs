use std::path::{Path, PathBuf};
use std::process::ExitCode;

use idextract_core::docgen::{self, DocgenError, Manifest, MANIFEST_FILE};
use idextract_core::eval::{self, EvalError};
use idextract_core::identity::check_char;
use idextract_core::router::{self, Attempt};
use idextract_core::{
    validate_id as id_is_valid, DocFormat, FailureKind, IdentityPair, IngestBackend, MethodConfig,
    Paradigm, RouteError, SourceDocument,
};
use serde::Serialize;

use crate::config::{AppConfig, ConfigError};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_io() {
        ExitCode::from(EXIT_IO)
    } else {
        ExitCode::from(EXIT_CONFIG)
    }
}

pub fn generate(cfg: &AppConfig) -> ExitCode {
    let root = cfg.corpus_dir();
    match docgen::generate_corpus(&cfg.corpus_spec(), &root) {
        Ok(manifest) => {
            println!("manifest: {}", root.join(MANIFEST_FILE).display());
            println!("documents: {}", manifest.documents.len());
            println!("pairs: {}", manifest.total_pairs());
            println!("digest: {}", manifest.digest());
            ExitCode::SUCCESS
        }
        Err(e @ DocgenError::Io { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

#[derive(Serialize)]
struct Timings {
    ocr_s: f64,
    llm_s: f64,
    total_s: f64,
}

#[derive(Serialize)]
struct ExtractRecord<'a> {
    doc_id: &'a str,
    format: DocFormat,
    method: Option<String>,
    pairs: &'a [IdentityPair],
    fatal: bool,
    failure_kind: Option<FailureKind>,
    failure_detail: Option<&'a str>,
    timings: Timings,
    llm_calls: usize,
    output_tokens: usize,
    attempts: &'a [Attempt],
}

pub fn extract(
    cfg: &AppConfig,
    path: &Path,
    paradigm: Option<Paradigm>,
    ingest: Option<IngestBackend>,
) -> ExitCode {
    let policy = match cfg.routing_policy() {
        Ok(p) => p,
        Err(e) => return config_failure(&e),
    };
    let doc = match SourceDocument::from_path(path) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let (gateway, ctx) = (cfg.gateway(), cfg.ingest_context());
    let routed = if paradigm.is_some() || ingest.is_some() {
        let backend = ingest.or_else(|| policy.primary.get(&doc.format).map(|m| m.backend));
        let Some(backend) = backend else {
            eprintln!("error: {}", RouteError::UnroutableFormat(doc.format));
            return ExitCode::from(EXIT_FAILURE);
        };
        let method = MethodConfig::new(backend, paradigm.unwrap_or(Paradigm::Table));
        let outcome = router::run_method(&doc, method, &gateway, &ctx);
        let attempt = Attempt {
            method,
            failure_kind: outcome.failure_kind,
            failure_detail: outcome.failure_detail.clone(),
            total_seconds: outcome.total_seconds,
        };
        router::RoutedOutcome {
            method: (!outcome.fatal).then_some(method),
            outcome,
            attempts: vec![attempt],
        }
    } else {
        match router::route_and_extract(&doc, &policy, &gateway, &ctx) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAILURE);
            }
        }
    };
    let o = &routed.outcome;
    let record = ExtractRecord {
        doc_id: &doc.doc_id,
        format: doc.format,
        method: routed.method.map(|m| m.name()),
        pairs: &o.pairs.pairs,
        fatal: o.fatal,
        failure_kind: o.failure_kind,
        failure_detail: o.failure_detail.as_deref(),
        timings: Timings {
            ocr_s: o.ocr_seconds,
            llm_s: o.llm_seconds,
            total_s: o.total_seconds,
        },
        llm_calls: o.llm_calls,
        output_tokens: o.output_tokens,
        attempts: &routed.attempts,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&record).expect("record serializes")
    );
    if o.fatal {
        eprintln!(
            "extraction failed: {}",
            o.failure_kind.map_or("unknown", FailureKind::as_str)
        );
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn evaluate(cfg: &AppConfig, corpus: Option<PathBuf>) -> ExitCode {
    let root = corpus.unwrap_or_else(|| cfg.corpus_dir());
    if !root.join(MANIFEST_FILE).is_file() {
        eprintln!(
            "error: {}",
            EvalError::CorpusMissing(root.join(MANIFEST_FILE))
        );
        return ExitCode::from(EXIT_IO);
    }
    let manifest = match Manifest::load(&root) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mut formats: Vec<DocFormat> = manifest.documents.iter().map(|d| d.format).collect();
    formats.sort();
    formats.dedup();
    let methods = eval::default_methods_for(&formats);
    let (gateway, ctx) = (cfg.gateway(), cfg.ingest_context());
    let report = match eval::run_matrix(&manifest, &root, &methods, &gateway, &ctx, cfg.workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                EvalError::CorpusMissing(_) | EvalError::Io { .. } => ExitCode::from(EXIT_IO),
                _ => ExitCode::from(EXIT_CONFIG),
            };
        }
    };
    let written = match eval::emit_reports(&report, &cfg.report_dir()) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    for path in written {
        println!("report: {}", path.display());
    }
    for cell in report.best_methods() {
        println!(
            "best {}: {} f1={:.3} perfect={:.2} total_s={:.3}",
            cell.format, cell.method, cell.f1, cell.perfect_rate, cell.total_s
        );
    }
    ExitCode::SUCCESS
}

pub fn validate_id(id: &str) -> ExitCode {
    let id = id.trim();
    if id_is_valid(id) {
        println!("valid");
        return ExitCode::SUCCESS;
    }
    println!("invalid");
    if id.len() == 18 {
        if let Some(expected) = id.get(..17).and_then(check_char) {
            println!("expected check character: {expected}");
        }
    }
    ExitCode::from(EXIT_FAILURE)
}
