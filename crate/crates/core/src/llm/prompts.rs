//! Prompt texts and the output formats the paradigms ask for.
//!
//! Every system prompt opens with a one-line task tag so a backend (and a
//! reader of logs) can tell the three tasks apart. Document text travels in
//! the user prompt between `<<<` and `>>>` lines.

use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use super::CompletionRequest;
use crate::lexicon::{ideograph_runs, is_id_label, is_name_label, ID_HEADER, NAME_HEADER};

pub const DIRECT_TAG: &str = "Task: direct-extract.";
pub const REPLACE_TAG: &str = "Task: replace-resolve.";
pub const TABLE_TAG: &str = "Task: table-locate.";

/// Output a locate call returns when no column pair can be identified.
pub const UNRESOLVED: &str = "unresolved";

const OPEN: &str = "<<<\n";
const CLOSE: &str = "\n>>>";

/// Output budgets per task. Locating emits a handful of tokens; the other
/// two grow with the number of entries.
pub const DIRECT_MAX_TOKENS: usize = 4096;
pub const REPLACE_MAX_TOKENS: usize = 4096;
pub const TABLE_MAX_TOKENS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    DirectExtract,
    ReplaceResolve,
    TableLocate,
}

pub fn task_kind(system_prompt: &str) -> Option<TaskKind> {
    match system_prompt.lines().next()?.trim() {
        DIRECT_TAG => Some(TaskKind::DirectExtract),
        REPLACE_TAG => Some(TaskKind::ReplaceResolve),
        TABLE_TAG => Some(TaskKind::TableLocate),
        _ => None,
    }
}

/// The document text enclosed in the user prompt.
pub fn payload(user_prompt: &str) -> Option<&str> {
    let start = user_prompt.find(OPEN)? + OPEN.len();
    let end = user_prompt.rfind(CLOSE)?;
    (end >= start).then(|| &user_prompt[start..end])
}

fn enclose(text: &str) -> String {
    format!("{OPEN}{text}{CLOSE}")
}

pub fn direct_request(text: &str) -> CompletionRequest {
    CompletionRequest {
        system_prompt: format!(
            "{DIRECT_TAG}\nYou read Chinese business documents. List every person in the document \
             together with their 18-character resident ID number. Answer with a JSON array only, \
             one object per person, using the keys \"{NAME_HEADER}\" and \"{ID_HEADER}\". Copy \
             names and numbers exactly as written."
        ),
        user_prompt: format!("Document:\n{}", enclose(text)),
        max_output_tokens: DIRECT_MAX_TOKENS,
    }
}

pub fn replace_request(masked_text: &str, placeholders: &[String]) -> CompletionRequest {
    CompletionRequest {
        system_prompt: format!(
            "{REPLACE_TAG}\nEach ID number in the document has been replaced by a placeholder such \
             as ⟦ID_1⟧. For every listed placeholder, give the name of the person the ID belongs \
             to. Answer with one line per placeholder in the form `⟦ID_k⟧: name`, in the listed \
             order."
        ),
        user_prompt: format!(
            "Placeholders: {}\nDocument:\n{}",
            placeholders.join(", "),
            enclose(masked_text)
        ),
        max_output_tokens: REPLACE_MAX_TOKENS,
    }
}

pub fn table_request(
    header: &[String],
    sample_row: &[String],
    data_rows: usize,
) -> CompletionRequest {
    CompletionRequest {
        system_prompt: format!(
            "{TABLE_TAG}\nYou are shown the header and first data row of a table. Identify the \
             zero-based column holding person names, the column holding ID numbers, and the span \
             of data rows. Answer with exactly one line: `name_col=<i> id_col=<j> rows=<first>-<last>`, \
             or `{UNRESOLVED}` if the columns cannot be identified."
        ),
        user_prompt: format!(
            "Header: {}\nSample row: {}\nData rows: {data_rows}",
            header.join(" | "),
            sample_row.join(" | ")
        ),
        max_output_tokens: TABLE_MAX_TOKENS,
    }
}

/// Header, sample row and data-row count from a locate prompt.
pub fn parse_table_request(user_prompt: &str) -> Option<(Vec<String>, Vec<String>, usize)> {
    let mut header = None;
    let mut sample = None;
    let mut rows = None;
    let cells = |s: &str| {
        s.split(" | ")
            .map(|c| c.trim().to_owned())
            .collect::<Vec<_>>()
    };
    for line in user_prompt.lines() {
        if let Some(h) = line.strip_prefix("Header: ") {
            header = Some(cells(h));
        } else if let Some(s) = line.strip_prefix("Sample row: ") {
            sample = Some(cells(s));
        } else if let Some(n) = line.strip_prefix("Data rows: ") {
            rows = n.trim().parse().ok();
        }
    }
    Some((header?, sample.unwrap_or_default(), rows?))
}

/// Table position returned by a locate call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellCoordinateSpec {
    pub name_col: usize,
    pub id_col: usize,
    pub row_start: usize,
    /// Inclusive.
    pub row_end: usize,
}

impl CellCoordinateSpec {
    pub fn is_well_formed(&self) -> bool {
        self.name_col != self.id_col && self.row_start <= self.row_end
    }
}

pub fn render_spec(spec: &CellCoordinateSpec) -> String {
    format!(
        "name_col={} id_col={} rows={}-{}",
        spec.name_col, spec.id_col, spec.row_start, spec.row_end
    )
}

/// Reads a locate answer. Accepts `key=value` or JSON-ish `"key": value`.
pub fn parse_spec(text: &str) -> Option<CellCoordinateSpec> {
    static RE: OnceLock<[Regex; 3]> = OnceLock::new();
    let [name, id, rows] = RE.get_or_init(|| {
        [
            Regex::new(r#"name_col"?\s*[:=]\s*(\d+)"#).expect("static regex"),
            Regex::new(r#"id_col"?\s*[:=]\s*(\d+)"#).expect("static regex"),
            Regex::new(r#"rows"?\s*[:=]\s*"?(\d+)\s*-\s*(\d+)"#).expect("static regex"),
        ]
    });
    let num = |re: &Regex, i: usize| -> Option<usize> {
        re.captures(text)?.get(i)?.as_str().parse().ok()
    };
    Some(CellCoordinateSpec {
        name_col: num(name, 1)?,
        id_col: num(id, 1)?,
        row_start: num(rows, 1)?,
        row_end: num(rows, 2)?,
    })
}

#[derive(Serialize)]
struct PairOut<'a> {
    #[serde(rename = "姓名")]
    name: &'a str,
    #[serde(rename = "身份证号")]
    id: &'a str,
}

/// Direct-extraction answer: a pretty-printed JSON array.
pub fn render_pairs(pairs: &[(String, String)]) -> String {
    let out: Vec<PairOut<'_>> = pairs
        .iter()
        .map(|(name, id)| PairOut { name, id })
        .collect();
    serde_json::to_string_pretty(&out).expect("pairs serialize")
}

fn id_candidate() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[0-9]{17}[0-9Xx]").expect("static regex"))
}

fn json_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.trim().to_owned()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn pairs_from_json(text: &str) -> Option<Vec<(String, String)>> {
    let start = text.find('[')?;
    let end = text.rfind(']')?;
    if end < start {
        return None;
    }
    let value: serde_json::Value = serde_json::from_str(&text[start..=end]).ok()?;
    let items = value.as_array()?;
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let obj = item.as_object()?;
        let mut name = None;
        let mut id = None;
        for (k, v) in obj {
            let key = k.trim();
            if is_name_label(key) || key.eq_ignore_ascii_case("name") {
                name = json_string(v);
            } else if is_id_label(key)
                || ["id", "id_number", "idnumber"]
                    .iter()
                    .any(|l| key.eq_ignore_ascii_case(l))
            {
                id = json_string(v);
            }
        }
        out.push((name.unwrap_or_default(), id?));
    }
    Some(out)
}

fn pairs_from_lines(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|line| {
            let id = id_candidate().find(line)?.as_str().to_owned();
            let name = ideograph_runs(line)
                .into_iter()
                .map(|(_, run)| run)
                .find(|run| !is_name_label(run) && !is_id_label(run))
                .unwrap_or_default();
            Some((name, id))
        })
        .collect()
}

/// Lenient reading of a direct-extraction answer: a JSON array of objects
/// anywhere in the text, else one pair per line that carries an ID. `None`
/// when neither shape is present.
pub fn parse_pairs(text: &str) -> Option<Vec<(String, String)>> {
    if let Some(p) = pairs_from_json(text) {
        return Some(p);
    }
    let lines = pairs_from_lines(text);
    (!lines.is_empty()).then_some(lines)
}

pub fn placeholder(k: usize) -> String {
    format!("⟦ID_{k}⟧")
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"⟦ID_(\d+)⟧").expect("static regex"))
}

/// Placeholders in order of appearance, with char offsets.
pub fn find_placeholders(text: &str) -> Vec<(usize, usize, String)> {
    placeholder_re()
        .find_iter(text)
        .map(|m| {
            let start = text[..m.start()].chars().count();
            let len = m.as_str().chars().count();
            (start, start + len, m.as_str().to_owned())
        })
        .collect()
}

pub fn render_resolutions(resolved: &[(String, String)]) -> String {
    resolved
        .iter()
        .map(|(token, name)| format!("{token}: {name}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `(placeholder, name)` for every answer line that names a placeholder.
pub fn parse_resolutions(text: &str) -> Vec<(String, String)> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(⟦ID_\d+⟧)\s*[:：]\s*(.*)").expect("static regex"));
    text.lines()
        .filter_map(|l| {
            let c = re.captures(l)?;
            Some((c[1].to_owned(), c[2].trim().to_owned()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::count_tokens;

    #[test]
    fn task_tags_round_trip() {
        assert_eq!(
            task_kind(&direct_request("x").system_prompt),
            Some(TaskKind::DirectExtract)
        );
        assert_eq!(
            task_kind(&replace_request("x", &[]).system_prompt),
            Some(TaskKind::ReplaceResolve)
        );
        assert_eq!(
            task_kind(&table_request(&[], &[], 1).system_prompt),
            Some(TaskKind::TableLocate)
        );
        assert_eq!(task_kind("hello"), None);
    }

    #[test]
    fn payload_survives_marker_lookalikes() {
        let r = direct_request("a\n>>>\nb");
        assert_eq!(payload(&r.user_prompt), Some("a\n>>>\nb"));
    }

    #[test]
    fn table_prompt_round_trip() {
        let h: Vec<String> = vec!["序号".into(), "姓名".into(), "身份证号".into()];
        let s: Vec<String> = vec!["1".into(), "张三".into(), "110105194912310029".into()];
        let r = table_request(&h, &s, 30);
        assert_eq!(parse_table_request(&r.user_prompt), Some((h, s, 30)));
    }

    #[test]
    fn spec_formats() {
        let spec = CellCoordinateSpec {
            name_col: 1,
            id_col: 2,
            row_start: 0,
            row_end: 29,
        };
        assert_eq!(render_spec(&spec), "name_col=1 id_col=2 rows=0-29");
        assert_eq!(parse_spec(&render_spec(&spec)), Some(spec));
        assert_eq!(
            parse_spec(r#"{"name_col": 1, "id_col": 2, "rows": "0-29"}"#),
            Some(spec)
        );
        assert_eq!(parse_spec(UNRESOLVED), None);
        assert!(count_tokens(&render_spec(&spec)) <= 10);
    }

    #[test]
    fn pairs_round_trip_and_fallback() {
        let pairs = vec![("张三".to_owned(), "11010519491231002X".to_owned())];
        assert_eq!(parse_pairs(&render_pairs(&pairs)), Some(pairs.clone()));
        let fenced = format!("```json\n{}\n```", render_pairs(&pairs));
        assert_eq!(parse_pairs(&fenced), Some(pairs.clone()));
        assert_eq!(parse_pairs("1. 张三 11010519491231002X"), Some(pairs));
        assert_eq!(parse_pairs("[]"), Some(vec![]));
        assert_eq!(parse_pairs("no idea"), None);
    }

    #[test]
    fn thirty_pair_answer_size() {
        let pairs: Vec<(String, String)> = (0..30)
            .map(|_| ("张三".to_owned(), "110105194912310029".to_owned()))
            .collect();
        let tokens = count_tokens(&render_pairs(&pairs));
        // 21 tokens per two-character-name entry plus the brackets
        assert_eq!(tokens, 30 * 21 + 2);
    }

    #[test]
    fn resolutions() {
        let r = vec![
            (placeholder(1), "张三".to_owned()),
            (placeholder(2), "李四".to_owned()),
        ];
        assert_eq!(parse_resolutions(&render_resolutions(&r)), r);
        assert_eq!(
            find_placeholders("ab⟦ID_1⟧c⟦ID_2⟧"),
            vec![(2, 8, placeholder(1)), (9, 15, placeholder(2))]
        );
    }
}
