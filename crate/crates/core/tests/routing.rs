use std::collections::BTreeMap;

use idextract_core::docgen::{self, CorpusSpec, TemplateId};
use idextract_core::identity::score;
use idextract_core::router::{route_and_extract, run_method, PolicyError};
use idextract_core::{
    default_policy, ClockMode, DocFormat, FailureKind, Gateway, IngestBackend, IngestContext,
    MethodConfig, Paradigm, RouteError, RoutingPolicy, SourceDocument,
};

fn corpus(formats: Vec<DocFormat>, docs: usize) -> Vec<SourceDocument> {
    let spec = CorpusSpec {
        seed: 77,
        docs_per_format: docs,
        entries_min: 8,
        entries_max: 20,
        formats,
    };
    docgen::build_corpus(&spec)
        .unwrap()
        .into_iter()
        .map(|d| SourceDocument {
            doc_id: d.record.doc_id,
            format: d.record.format,
            bytes: d.bytes,
        })
        .collect()
}

#[test]
fn default_policy_routes_every_format_to_its_table_lane() {
    let policy = default_policy();
    let gw = Gateway::reference();
    let ctx = IngestContext::default();
    for doc in corpus(DocFormat::ALL.to_vec(), 2) {
        let routed = route_and_extract(&doc, &policy, &gw, &ctx).unwrap();
        let method = routed.method.unwrap();
        assert_eq!(method.paradigm, Paradigm::Table);
        assert_eq!(routed.attempts.len(), 1);
        assert_eq!(routed.outcome.pairs.source_doc, doc.doc_id);
        let expected =
            IngestBackend::native_for(doc.format).unwrap_or(IngestBackend::OcrPreserving);
        assert_eq!(method.backend, expected);
    }
}

#[test]
fn fallback_runs_after_a_fatal_primary_and_sums_costs() {
    let destroying = |p| MethodConfig::new(IngestBackend::OcrDestroying, p);
    let policy = RoutingPolicy {
        primary: BTreeMap::from([(DocFormat::Transcript, destroying(Paradigm::Table))]),
        fallback: BTreeMap::from([(DocFormat::Transcript, vec![destroying(Paradigm::Direct)])]),
    };
    policy.validate().unwrap();
    let gw = Gateway::reference();
    let ctx = IngestContext::default();
    for doc in corpus(vec![DocFormat::Transcript], 4) {
        let routed = route_and_extract(&doc, &policy, &gw, &ctx).unwrap();
        assert_eq!(routed.method, Some(destroying(Paradigm::Direct)));
        assert_eq!(
            routed.attempts[0].failure_kind,
            Some(FailureKind::CoordinateUnresolvable)
        );
        assert_eq!(routed.attempts[1].failure_kind, None);
        let direct_alone = run_method(&doc, destroying(Paradigm::Direct), &gw, &ctx);
        let sum = routed.attempts.iter().map(|a| a.total_seconds).sum::<f64>();
        assert!((routed.outcome.total_seconds - sum).abs() < 1e-9);
        assert!(
            (routed.outcome.ocr_seconds - 2.0 * ctx.ocr_destroying.simulated_ocr_seconds).abs()
                < 1e-9
        );
        assert_eq!(routed.outcome.pairs, direct_alone.pairs);
    }
}

#[test]
fn exhausted_chain_reports_every_attempt() {
    let doc = &corpus(vec![DocFormat::Docx], 1)[0];
    let routed = route_and_extract(
        doc,
        &default_policy(),
        &Gateway::unavailable(),
        &IngestContext::default(),
    )
    .unwrap();
    assert!(routed.outcome.fatal);
    assert_eq!(routed.outcome.failure_kind, Some(FailureKind::Exhausted));
    assert_eq!(routed.method, None);
    assert_eq!(routed.attempts.len(), 2);
    assert!(routed
        .attempts
        .iter()
        .all(|a| a.failure_kind == Some(FailureKind::GatewayFailure)));
}

#[test]
fn unknown_formats_are_unroutable() {
    let doc = SourceDocument {
        doc_id: "blob".into(),
        format: DocFormat::Unknown,
        bytes: vec![0, 1, 2],
    };
    let err = route_and_extract(
        &doc,
        &default_policy(),
        &Gateway::reference(),
        &IngestContext::default(),
    );
    assert!(matches!(
        err,
        Err(RouteError::UnroutableFormat(DocFormat::Unknown))
    ));
}

#[test]
fn wall_clock_keeps_accuracy() {
    let gw_v = Gateway::reference();
    let gw_w = Gateway::reference().with_clock(ClockMode::Wall);
    let ctx_w = IngestContext {
        clock: ClockMode::Wall,
        ..IngestContext::default()
    };
    for doc in corpus(vec![DocFormat::Pdf, DocFormat::Xlsx], 2) {
        let m = MethodConfig::new(
            IngestBackend::native_for(doc.format).unwrap(),
            Paradigm::Direct,
        );
        let v = run_method(&doc, m, &gw_v, &IngestContext::default());
        let w = run_method(&doc, m, &gw_w, &ctx_w);
        assert_eq!(v.pairs, w.pairs);
        assert!(w.total_seconds >= w.ocr_seconds);
    }
}

#[test]
fn policy_files_load_and_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        "[xlsx]\nprimary = \"native_xlsx+replace\"\nfallback = [\"native_xlsx+direct\"]\n",
    )
    .unwrap();
    let policy = RoutingPolicy::load(&good).unwrap();
    assert_eq!(policy.chain(DocFormat::Xlsx).unwrap().len(), 2);
    assert_eq!(policy.chain(DocFormat::Docx), None);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[xlsx]\n\nprimary = \"ocr_preserving+table\"\n").unwrap();
    match RoutingPolicy::load(&bad) {
        Err(
            e @ PolicyError::Syntax {
                line: 3, col: 11, ..
            },
        ) => {
            assert!(e
                .to_string()
                .starts_with(&format!("{}:3:11:", bad.display())))
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        RoutingPolicy::load(&dir.path().join("missing.toml")),
        Err(PolicyError::Io { .. })
    ));
}

#[test]
fn documents_load_from_disk_with_detected_format() {
    let dir = tempfile::tempdir().unwrap();
    let mut truth = docgen::generate_identities(4, 6);
    truth.source_doc = "roster".into();
    let doc = docgen::render_document(&truth, DocFormat::Xlsx, TemplateId::ALL[1], 4).unwrap();
    let path = dir.path().join("roster.xlsx");
    std::fs::write(&path, &doc.bytes).unwrap();
    let src = SourceDocument::from_path(&path).unwrap();
    assert_eq!(
        (src.doc_id.as_str(), src.format),
        ("roster", DocFormat::Xlsx)
    );
    let routed = route_and_extract(
        &src,
        &default_policy(),
        &Gateway::reference(),
        &IngestContext::default(),
    )
    .unwrap();
    assert_eq!(score(&routed.outcome.pairs, &truth).f1, 1.0);
}
