//! Prose fixtures where names and IDs are not laid out in a table and the
//! nearest name to an ID is sometimes the wrong one.
//!
//! Entries are written on one running line, each either name-first
//! (`张三 110...；`) or ID-first with a trailing attribution of varying length
//! (`110...（持有人：张三）`). A long attribution after an ID-first entry
//! leaves the previous entry's name closer than its own.

use rand::Rng;

use super::{DocumentRecord, RenderedDocument};
use crate::format::DocFormat;
use crate::identity::PairSet;
use crate::seed;

const SHORT_ATTRIBUTION: &str = "（持有人：";
const LONG_ATTRIBUTIONS: &[&str] = &[
    "（以上证件经现场核验，持有人：",
    "（证件原件已查验无误，登记人：",
];

/// Renders `truth` as an adjacency-ambiguous markdown document.
pub fn render_ambiguous(truth: &PairSet, seed: u64) -> RenderedDocument {
    let mut rng = seed::rng(seed, "ambiguous", truth.len() as u64);
    let mut body = String::new();
    for (i, p) in truth.pairs.iter().enumerate() {
        if i > 0 {
            body.push('；');
        }
        if i == 0 || rng.gen_bool(0.8) {
            body.push_str(&format!("{} {}", p.name, p.id_number));
        } else {
            let lead = if rng.gen_bool(0.5) {
                SHORT_ATTRIBUTION
            } else {
                LONG_ATTRIBUTIONS[rng.gen_range(0..LONG_ATTRIBUTIONS.len())]
            };
            body.push_str(&format!("{} {lead}{}）", p.id_number, p.name));
        }
    }
    body.push('。');
    let text = format!("# 人员核验记录\n\n核验人员如下：{body}\n");
    let record = DocumentRecord {
        doc_id: truth.source_doc.clone(),
        format: DocFormat::Markdown,
        path: format!("markdown/{}.md", truth.source_doc),
        truth: truth.clone(),
        template_id: None,
        seed,
        context_fields: Default::default(),
    };
    RenderedDocument {
        record,
        bytes: text.into_bytes(),
    }
}
