use idextract_core::docgen::{self, adversarial, CorpusSpec, TemplateId};
use idextract_core::extract::{self, FailureKind, Paradigm};
use idextract_core::identity::{find_id_candidates, score};
use idextract_core::ingest::{self, Fidelity};
use idextract_core::ocr::{self, OcrProfile};
use idextract_core::{DocFormat, Gateway};
use proptest::prelude::*;

fn spec(formats: Vec<DocFormat>, docs: usize, entries: usize) -> CorpusSpec {
    CorpusSpec {
        seed: 31,
        docs_per_format: docs,
        entries_min: entries,
        entries_max: entries,
        formats,
    }
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

#[test]
fn table_is_exact_on_every_native_template() {
    let gw = Gateway::reference();
    for format in [
        DocFormat::Markdown,
        DocFormat::Docx,
        DocFormat::Xlsx,
        DocFormat::Pdf,
    ] {
        for (i, template) in TemplateId::ALL.into_iter().enumerate() {
            let mut truth = docgen::generate_identities(i as u64 + 5, 12);
            truth.source_doc = format!("t{i}");
            let doc = docgen::render_document(&truth, format, template, 9).unwrap();
            let st = ingest::parse_native(format, &doc.bytes).unwrap();
            assert_eq!(st.fidelity, Fidelity::Preserved, "{format} {template:?}");
            let out = extract::extract_table(&st, &gw);
            assert!(
                !out.fatal,
                "{format} {template:?}: {:?}",
                out.failure_detail
            );
            assert_eq!(score(&out.pairs, &truth).f1, 1.0, "{format} {template:?}");
            assert_eq!(out.llm_calls, 1);
        }
    }
}

#[test]
fn table_answer_is_an_order_of_magnitude_shorter() {
    let gw = Gateway::reference();
    for doc in docgen::build_corpus(&spec(vec![DocFormat::Docx], 5, 30)).unwrap() {
        let st = ingest::parse_native(DocFormat::Docx, &doc.bytes).unwrap();
        let direct = extract::extract_direct(&st, &gw);
        let table = extract::extract_table(&st, &gw);
        assert!(
            direct.output_tokens >= 15 * table.output_tokens,
            "{} vs {}",
            direct.output_tokens,
            table.output_tokens
        );
        assert!(direct.llm_seconds / table.llm_seconds > 20.0);
    }
}

#[test]
fn destroyed_layout_defeats_table_but_not_direct() {
    let gw = Gateway::reference();
    let profile = OcrProfile::layout_destroying();
    let mut f1_sum = 0.0;
    let docs = docgen::build_corpus(&spec(vec![DocFormat::Transcript], 10, 20)).unwrap();
    for doc in &docs {
        let st = ocr::transcribe(&doc.bytes, &doc.record.doc_id, &profile).unwrap();
        assert_eq!(st.fidelity, Fidelity::Lost);
        let table = extract::extract_table(&st, &gw);
        assert_eq!(
            table.failure_kind,
            Some(FailureKind::CoordinateUnresolvable)
        );
        assert_eq!(table.llm_calls, 0);
        let direct = extract::extract_direct(&st, &gw);
        assert!(!direct.fatal);
        f1_sum += score(&direct.pairs, &doc.record.truth).f1;
    }
    let mean = f1_sum / docs.len() as f64;
    assert!(mean > 0.3 && mean < 1.0, "mean direct F1 {mean}");
}

#[test]
fn replace_misattributes_on_adjacency_traps() {
    let gw = Gateway::reference();
    let mut imperfect = 0;
    for seed in 0..30u64 {
        let mut truth = docgen::generate_identities(seed, 12);
        truth.source_doc = format!("adv_{seed}");
        let doc = adversarial::render_ambiguous(&truth, seed);
        let st = ingest::parse_native(DocFormat::Markdown, &doc.bytes).unwrap();
        let out = extract::extract_replace(&st, &gw);
        assert!(!out.fatal, "{:?}", out.failure_detail);
        let got = sorted(out.pairs.id_numbers().map(str::to_owned).collect());
        let text_ids = sorted(
            find_id_candidates(&st.plain_text)
                .into_iter()
                .map(|r| st.plain_text[r].to_owned())
                .collect(),
        );
        assert_eq!(got, text_ids);
        if score(&out.pairs, &truth).f1 < 1.0 {
            imperfect += 1;
        }
    }
    assert!(imperfect > 0);
}

#[test]
fn unreachable_model_is_a_gateway_failure() {
    let truth = docgen::generate_identities(1, 5);
    let doc = docgen::render_document(&truth, DocFormat::Markdown, TemplateId::ALL[0], 1).unwrap();
    let st = ingest::parse_native(DocFormat::Markdown, &doc.bytes).unwrap();
    for p in Paradigm::ALL {
        let out = p.run(&st, &Gateway::unavailable());
        assert!(out.fatal);
        assert_eq!(out.failure_kind, Some(FailureKind::GatewayFailure), "{p}");
        assert!(out.pairs.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn masking_round_trips(seed in 0u64..10_000, n in 1usize..25) {
        let truth = docgen::generate_identities(seed, n);
        let text: String = truth
            .pairs
            .iter()
            .map(|p| format!("{}：{}，", p.name, p.id_number))
            .collect();
        let (masked, map) = extract::mask_ids(&text);
        prop_assert_eq!(map.len(), n);
        prop_assert!(find_id_candidates(&masked).is_empty());
        let mut restored = masked.clone();
        for e in &map.entries {
            restored = restored.replacen(&e.token, &e.id_number, 1);
        }
        prop_assert_eq!(restored, text);
    }

    #[test]
    fn preserved_tables_are_exact_for_any_seed(seed in 0u64..10_000, n in 1usize..31) {
        let mut truth = docgen::generate_identities(seed, n);
        truth.source_doc = "p".into();
        let template = TemplateId::ALL[(seed % TemplateId::ALL.len() as u64) as usize];
        let doc = docgen::render_document(&truth, DocFormat::Xlsx, template, seed).unwrap();
        let st = ingest::parse_native(DocFormat::Xlsx, &doc.bytes).unwrap();
        let out = extract::extract_table(&st, &Gateway::reference());
        prop_assert_eq!(score(&out.pairs, &truth).f1, 1.0);
    }
}
