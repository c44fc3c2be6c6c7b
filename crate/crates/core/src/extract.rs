//! The three extraction paradigms: whole-text model extraction (Direct),
//! pattern-anchored placeholder resolution (Replace), and model-located
//! columns read by a deterministic cell reader (Table).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::identity::{find_id_candidates, IdentityPair, PairSet};
use crate::ingest::{Fidelity, StructuredText};
use crate::llm::prompts::{self, CellCoordinateSpec};
use crate::llm::{ClockMode, CompletionRequest, CompletionResponse, Gateway, GatewayError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    Direct,
    Replace,
    Table,
}

impl Paradigm {
    pub const ALL: [Paradigm; 3] = [Paradigm::Direct, Paradigm::Replace, Paradigm::Table];

    pub fn as_str(self) -> &'static str {
        match self {
            Paradigm::Direct => "direct",
            Paradigm::Replace => "replace",
            Paradigm::Table => "table",
        }
    }

    pub fn run(self, st: &StructuredText, gateway: &Gateway) -> ExtractionOutcome {
        match self {
            Paradigm::Direct => extract_direct(st, gateway),
            Paradigm::Replace => extract_replace(st, gateway),
            Paradigm::Table => extract_table(st, gateway),
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Paradigm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Paradigm::Direct),
            "replace" => Ok(Paradigm::Replace),
            "table" => Ok(Paradigm::Table),
            other => Err(format!(
                "unknown paradigm {other:?} (expected direct, replace or table)"
            )),
        }
    }
}

/// Why a document produced no pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    MalformedInput,
    GatewayFailure,
    UnparseableOutput,
    NoIdsFound,
    ArityMismatch,
    CoordinateUnresolvable,
    SpecOutOfBounds,
    IngestFailed,
    Exhausted,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::MalformedInput => "malformed_input",
            FailureKind::GatewayFailure => "gateway_failure",
            FailureKind::UnparseableOutput => "unparseable_output",
            FailureKind::NoIdsFound => "no_ids_found",
            FailureKind::ArityMismatch => "arity_mismatch",
            FailureKind::CoordinateUnresolvable => "coordinate_unresolvable",
            FailureKind::SpecOutOfBounds => "spec_out_of_bounds",
            FailureKind::IngestFailed => "ingest_failed",
            FailureKind::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    pub pairs: PairSet,
    pub paradigm: Paradigm,
    pub ocr_seconds: f64,
    pub llm_seconds: f64,
    pub total_seconds: f64,
    pub fatal: bool,
    pub failure_kind: Option<FailureKind>,
    pub failure_detail: Option<String>,
    pub llm_calls: usize,
    pub output_tokens: usize,
}

/// Accumulates timing for one paradigm run.
struct Run<'a> {
    paradigm: Paradigm,
    gateway: &'a Gateway,
    ocr_seconds: f64,
    llm_seconds: f64,
    llm_calls: usize,
    output_tokens: usize,
    started: Instant,
}

impl<'a> Run<'a> {
    fn new(paradigm: Paradigm, st: &StructuredText, gateway: &'a Gateway) -> Self {
        Self {
            paradigm,
            gateway,
            ocr_seconds: st.extract_time,
            llm_seconds: 0.0,
            llm_calls: 0,
            output_tokens: 0,
            started: Instant::now(),
        }
    }

    fn complete(&mut self, req: &CompletionRequest) -> Result<CompletionResponse, GatewayError> {
        self.llm_calls += 1;
        let resp = self.gateway.complete(req)?;
        self.llm_seconds += self.gateway.charged_seconds(&resp);
        self.output_tokens += resp.output_token_count;
        Ok(resp)
    }

    fn finish(self, result: Result<Vec<IdentityPair>, (FailureKind, String)>) -> ExtractionOutcome {
        let total_seconds = match self.gateway.clock() {
            ClockMode::Virtual => self.ocr_seconds + self.llm_seconds,
            // Measured extraction time already contains the model round trips.
            ClockMode::Wall => {
                self.ocr_seconds + self.started.elapsed().as_secs_f64().max(self.llm_seconds)
            }
        };
        let (pairs, failure_kind, failure_detail) = match result {
            Ok(p) => (p, None, None),
            Err((kind, detail)) => (Vec::new(), Some(kind), Some(detail)),
        };
        ExtractionOutcome {
            pairs: PairSet::new("", pairs),
            paradigm: self.paradigm,
            ocr_seconds: self.ocr_seconds,
            llm_seconds: self.llm_seconds,
            total_seconds,
            fatal: failure_kind.is_some(),
            failure_kind,
            failure_detail,
            llm_calls: self.llm_calls,
            output_tokens: self.output_tokens,
        }
    }
}

fn gateway_failure(e: GatewayError) -> (FailureKind, String) {
    (FailureKind::GatewayFailure, e.to_string())
}

fn require_text(st: &StructuredText) -> Result<(), (FailureKind, String)> {
    if st.plain_text.trim().is_empty() {
        Err((FailureKind::MalformedInput, "document text is empty".into()))
    } else {
        Ok(())
    }
}

/// Asks the model for every pair in the full text. IDs that fail the
/// checksum are kept; scoring decides what is correct.
pub fn extract_direct(st: &StructuredText, gateway: &Gateway) -> ExtractionOutcome {
    let mut run = Run::new(Paradigm::Direct, st, gateway);
    let result = (|| {
        require_text(st)?;
        let resp = run
            .complete(&prompts::direct_request(&st.plain_text))
            .map_err(gateway_failure)?;
        let pairs = prompts::parse_pairs(&resp.text).ok_or_else(|| {
            let snippet: String = resp.text.chars().take(80).collect();
            (
                FailureKind::UnparseableOutput,
                format!("no pair list in answer: {snippet:?}"),
            )
        })?;
        Ok(pairs
            .into_iter()
            .map(|(name, id)| IdentityPair::new(name, id))
            .collect())
    })();
    run.finish(result)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaceholderEntry {
    pub token: String,
    pub id_number: String,
    /// Char offset of the ID in the original text.
    pub char_offset: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PlaceholderMap {
    pub entries: Vec<PlaceholderEntry>,
}

impl PlaceholderMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.token.clone()).collect()
    }
}

/// Replaces the k-th ID-shaped token with `⟦ID_k⟧` (k from 1).
pub fn mask_ids(text: &str) -> (String, PlaceholderMap) {
    let mut masked = String::with_capacity(text.len());
    let mut map = PlaceholderMap::default();
    let mut last = 0;
    let mut chars_before = 0;
    for (k, range) in find_id_candidates(text).into_iter().enumerate() {
        chars_before += text[last..range.start].chars().count();
        masked.push_str(&text[last..range.start]);
        let token = prompts::placeholder(k + 1);
        masked.push_str(&token);
        map.entries.push(PlaceholderEntry {
            token,
            id_number: text[range.clone()].to_owned(),
            char_offset: chars_before,
        });
        chars_before += range.len();
        last = range.end;
    }
    masked.push_str(&text[last..]);
    (masked, map)
}

/// Anchors on ID patterns, then resolves all placeholders to names in one
/// batched completion. IDs are copied from the text, never generated.
pub fn extract_replace(st: &StructuredText, gateway: &Gateway) -> ExtractionOutcome {
    let mut run = Run::new(Paradigm::Replace, st, gateway);
    let result = (|| {
        require_text(st)?;
        let (masked, map) = mask_ids(&st.plain_text);
        if map.is_empty() {
            return Err((
                FailureKind::NoIdsFound,
                "no ID-shaped tokens in text".into(),
            ));
        }
        let resp = run
            .complete(&prompts::replace_request(&masked, &map.tokens()))
            .map_err(gateway_failure)?;
        let answers = prompts::parse_resolutions(&resp.text);
        let mut pairs = Vec::with_capacity(map.len());
        for entry in &map.entries {
            let name = answers
                .iter()
                .find(|(t, _)| *t == entry.token)
                .map(|(_, n)| n.clone());
            match name {
                Some(n) => pairs.push(IdentityPair::new(n, entry.id_number.clone())),
                None => break,
            }
        }
        if pairs.len() != map.len() || answers.len() != map.len() {
            return Err((
                FailureKind::ArityMismatch,
                format!("{} placeholders, {} answers", map.len(), answers.len()),
            ));
        }
        Ok(pairs)
    })();
    run.finish(result)
}

/// Sends only the header and first row; the model returns column indices and
/// the row span, and the cell reader copies the pairs.
pub fn extract_table(st: &StructuredText, gateway: &Gateway) -> ExtractionOutcome {
    let mut run = Run::new(Paradigm::Table, st, gateway);
    let result = (|| {
        let table = match (&st.table, st.fidelity) {
            (Some(t), f) if f != Fidelity::Lost => t,
            _ => {
                return Err((
                    FailureKind::CoordinateUnresolvable,
                    "no table structure survived text extraction".into(),
                ))
            }
        };
        let sample = table.rows.first().cloned().unwrap_or_default();
        let resp = run
            .complete(&prompts::table_request(
                &table.header,
                &sample,
                table.rows.len(),
            ))
            .map_err(gateway_failure)?;
        let spec = prompts::parse_spec(&resp.text)
            .filter(CellCoordinateSpec::is_well_formed)
            .ok_or_else(|| {
                (
                    FailureKind::CoordinateUnresolvable,
                    format!("no usable coordinates in answer {:?}", resp.text.trim()),
                )
            })?;
        read_cells(table, &spec)
    })();
    run.finish(result)
}

/// Copies `(name, id)` cells over the coordinate row span.
pub fn read_cells(
    table: &crate::ingest::TableModel,
    spec: &CellCoordinateSpec,
) -> Result<Vec<IdentityPair>, (FailureKind, String)> {
    if spec.name_col >= table.n_cols
        || spec.id_col >= table.n_cols
        || spec.row_end >= table.rows.len()
    {
        return Err((
            FailureKind::SpecOutOfBounds,
            format!(
                "spec {} outside table of {} columns x {} rows",
                prompts::render_spec(spec),
                table.n_cols,
                table.rows.len()
            ),
        ));
    }
    Ok(table.rows[spec.row_start..=spec.row_end]
        .iter()
        .map(|r| (r[spec.name_col].trim(), r[spec.id_col].trim()))
        .filter(|(n, i)| !(n.is_empty() && i.is_empty()))
        .map(|(n, i)| IdentityPair::new(n, i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::DocFormat;
    use crate::ingest::TableModel;

    fn text(s: &str) -> StructuredText {
        StructuredText {
            plain_text: s.into(),
            table: None,
            fidelity: Fidelity::SymbolicOnly,
            source_format: DocFormat::Markdown,
            extract_time: 0.0,
        }
    }

    #[test]
    fn masking_builds_ordered_map() {
        let (masked, map) = mask_ids("张三 110105194912310029；李四：11010519491231002X。");
        assert_eq!(masked, "张三 ⟦ID_1⟧；李四：⟦ID_2⟧。");
        assert_eq!(map.len(), 2);
        assert_eq!(map.entries[0].char_offset, 3);
        assert_eq!(map.entries[1].char_offset, 3 + 18 + 4);
        assert_eq!(map.entries[1].id_number, "11010519491231002X");
    }

    #[test]
    fn replace_without_ids() {
        let out = extract_replace(&text("没有证件号码"), &Gateway::reference());
        assert!(out.fatal);
        assert_eq!(out.failure_kind, Some(FailureKind::NoIdsFound));
        assert_eq!(out.llm_calls, 0);
        assert!(out.pairs.is_empty());
    }

    #[test]
    fn replace_uses_one_call() {
        let body: String = (0..12)
            .map(|i| format!("张{} 1101051949123100{:02}\n", ["三", "四", "五"][i % 3], i))
            .collect();
        let out = extract_replace(&text(&body), &Gateway::reference());
        assert!(!out.fatal, "{:?}", out.failure_detail);
        assert_eq!(out.llm_calls, 1);
        assert_eq!(out.pairs.len(), 12);
    }

    #[test]
    fn direct_on_empty_text() {
        let out = extract_direct(&text("  "), &Gateway::reference());
        assert_eq!(out.failure_kind, Some(FailureKind::MalformedInput));
    }

    #[test]
    fn gateway_failure_is_fatal() {
        for p in Paradigm::ALL {
            let mut st = text("| 姓名 | 身份证号 |\n张三 110105194912310029");
            st.table = Some(TableModel::new(
                vec!["姓名".into(), "身份证号".into()],
                vec![vec!["张三".into(), "110105194912310029".into()]],
            ));
            st.fidelity = Fidelity::Preserved;
            let out = p.run(&st, &Gateway::unavailable());
            assert_eq!(out.failure_kind, Some(FailureKind::GatewayFailure), "{p}");
            assert!(out.pairs.is_empty());
        }
    }

    #[test]
    fn table_fails_closed_without_structure() {
        let mut st = text("张三\n110105194912310029");
        st.fidelity = Fidelity::Lost;
        let out = extract_table(&st, &Gateway::reference());
        assert_eq!(out.failure_kind, Some(FailureKind::CoordinateUnresolvable));
        assert_eq!(out.llm_calls, 0);
    }

    #[test]
    fn out_of_bounds_spec() {
        let t = TableModel::new(
            vec!["a".into(), "b".into()],
            vec![vec!["1".into(), "2".into()]],
        );
        let spec = CellCoordinateSpec {
            name_col: 0,
            id_col: 2,
            row_start: 0,
            row_end: 0,
        };
        assert_eq!(
            read_cells(&t, &spec).unwrap_err().0,
            FailureKind::SpecOutOfBounds
        );
        let spec = CellCoordinateSpec {
            name_col: 0,
            id_col: 1,
            row_start: 0,
            row_end: 1,
        };
        assert_eq!(
            read_cells(&t, &spec).unwrap_err().0,
            FailureKind::SpecOutOfBounds
        );
    }

    #[test]
    fn paradigm_names() {
        for p in Paradigm::ALL {
            assert_eq!(p.as_str().parse::<Paradigm>().unwrap(), p);
        }
    }
}
