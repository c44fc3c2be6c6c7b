//! Deterministic offline stand-in for an instruction-tuned model.
//!
//! It answers the three task prompts with simple positional heuristics, so
//! its mistakes come from the same place a model's would: text whose layout
//! no longer shows which name belongs to which number.

use super::prompts::{
    find_placeholders, parse_table_request, payload, render_pairs, render_resolutions, render_spec,
    task_kind, CellCoordinateSpec, TaskKind, UNRESOLVED,
};
use super::{CompletionBackend, CompletionRequest, GatewayError, RawCompletion};
use crate::identity::find_id_candidates;
use crate::lexicon::{ideograph_runs, is_id_label, is_name_label, looks_like_name};

#[derive(Debug, Default, Clone, Copy)]
pub struct ReferenceBackend;

/// Name-like ideograph runs as `(start, end)` char offsets plus text.
fn name_tokens(text: &str) -> Vec<(usize, usize, String)> {
    ideograph_runs(text)
        .into_iter()
        .filter(|(_, run)| looks_like_name(run))
        .map(|(start, run)| {
            let end = start + run.chars().count();
            (start, end, run)
        })
        .collect()
}

fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Pairs each ID with the nearest name before it on its line, else the last
/// name on the closest earlier line that has one.
pub(crate) fn direct_extract(text: &str) -> Vec<(String, String)> {
    let lines: Vec<&str> = text.lines().collect();
    let names: Vec<Vec<(usize, usize, String)>> = lines.iter().map(|l| name_tokens(l)).collect();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        for range in find_id_candidates(line) {
            let id_start = char_offset(line, range.start);
            let same_line = names[i]
                .iter()
                .rfind(|(_, end, _)| *end <= id_start)
                .map(|(_, _, n)| n.clone());
            let name = same_line
                .or_else(|| {
                    names[..i]
                        .iter()
                        .rev()
                        .find_map(|ns| ns.last().map(|(_, _, n)| n.clone()))
                })
                .unwrap_or_default();
            out.push((name, line[range].to_owned()));
        }
    }
    out
}

/// For each placeholder, the name token closest in characters; a name before
/// the placeholder wins ties.
pub(crate) fn resolve_placeholders(text: &str, wanted: &[String]) -> Vec<(String, String)> {
    let names = name_tokens(text);
    let found = find_placeholders(text);
    wanted
        .iter()
        .map(|token| {
            let name = found
                .iter()
                .find(|(_, _, t)| t == token)
                .and_then(|(start, end, _)| {
                    names
                        .iter()
                        .map(|(ns, ne, n)| {
                            let (dist, after) = if *ne <= *start {
                                (start - ne, 0)
                            } else {
                                (ns.saturating_sub(*end), 1)
                            };
                            (dist, after, n)
                        })
                        .min_by_key(|(d, after, _)| (*d, *after))
                        .map(|(_, _, n)| n.clone())
                })
                .unwrap_or_default();
            (token.clone(), name)
        })
        .collect()
}

pub(crate) fn locate(
    header: &[String],
    sample: &[String],
    data_rows: usize,
) -> Option<CellCoordinateSpec> {
    let by_label = |f: fn(&str) -> bool| header.iter().position(|h| f(h));
    let name_col =
        by_label(is_name_label).or_else(|| sample.iter().position(|c| looks_like_name(c)))?;
    let id_col = by_label(is_id_label).or_else(|| {
        sample.iter().position(|c| {
            find_id_candidates(c)
                .first()
                .is_some_and(|r| r.len() == c.len())
        })
    })?;
    let spec = CellCoordinateSpec {
        name_col,
        id_col,
        row_start: 0,
        row_end: data_rows.checked_sub(1)?,
    };
    spec.is_well_formed().then_some(spec)
}

fn listed_placeholders(user_prompt: &str) -> Vec<String> {
    user_prompt
        .lines()
        .find_map(|l| l.strip_prefix("Placeholders: "))
        .map(|list| {
            list.split(',')
                .map(|t| t.trim().to_owned())
                .filter(|t| !t.is_empty())
                .collect()
        })
        .unwrap_or_default()
}

impl CompletionBackend for ReferenceBackend {
    fn name(&self) -> &str {
        "reference"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<RawCompletion, GatewayError> {
        let text = match task_kind(&req.system_prompt) {
            Some(TaskKind::DirectExtract) => render_pairs(&direct_extract(
                payload(&req.user_prompt).unwrap_or(&req.user_prompt),
            )),
            Some(TaskKind::ReplaceResolve) => {
                let body = payload(&req.user_prompt).unwrap_or(&req.user_prompt);
                let mut wanted = listed_placeholders(&req.user_prompt);
                if wanted.is_empty() {
                    wanted = find_placeholders(body)
                        .into_iter()
                        .map(|(_, _, t)| t)
                        .collect();
                }
                render_resolutions(&resolve_placeholders(body, &wanted))
            }
            Some(TaskKind::TableLocate) => parse_table_request(&req.user_prompt)
                .and_then(|(h, s, n)| locate(&h, &s, n))
                .map_or_else(|| UNRESOLVED.to_owned(), |spec| render_spec(&spec)),
            None => "I can only help with document extraction tasks.".to_owned(),
        };
        Ok(RawCompletion {
            text,
            truncated: false,
        })
    }
}
