use std::time::Instant;

use super::{Fidelity, IngestError, StructuredText, TableModel};
use crate::format::DocFormat;

/// Splits a pipe-table line into trimmed cells. `\|` stays a literal pipe.
fn pipe_cells(line: &str) -> Option<Vec<String>> {
    let line = line.trim();
    if !line.contains('|') {
        return None;
    }
    let inner = line.strip_prefix('|').unwrap_or(line);
    let inner = inner.strip_suffix('|').unwrap_or(inner);
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'|') => {
                cur.push('|');
                chars.next();
            }
            '|' => cells.push(std::mem::take(&mut cur).trim().to_owned()),
            _ => cur.push(c),
        }
    }
    cells.push(cur.trim().to_owned());
    Some(cells)
}

fn is_delimiter_row(cells: &[String]) -> bool {
    !cells.is_empty()
        && cells.iter().all(|c| {
            let c = c.trim_start_matches(':').trim_end_matches(':');
            c.len() >= 3 && c.bytes().all(|b| b == b'-')
        })
}

/// First pipe table: a header line, a delimiter row of the same width, then
/// contiguous pipe lines.
fn first_table(lines: &[&str]) -> Option<TableModel> {
    for i in 0..lines.len().saturating_sub(1) {
        let Some(header) = pipe_cells(lines[i]) else {
            continue;
        };
        let Some(delim) = pipe_cells(lines[i + 1]) else {
            continue;
        };
        if !is_delimiter_row(&delim) || delim.len() != header.len() {
            continue;
        }
        let rows = lines[i + 2..].iter().map_while(|l| pipe_cells(l)).collect();
        return Some(TableModel::new(header, rows));
    }
    None
}

pub fn parse_markdown(bytes: &[u8]) -> Result<StructuredText, IngestError> {
    let started = Instant::now();
    let text = std::str::from_utf8(bytes)
        .map_err(|e| IngestError::malformed(format!("markdown is not UTF-8: {e}")))?;
    let lines: Vec<&str> = text.lines().collect();
    let table = first_table(&lines);
    StructuredText::assemble(
        text.to_owned(),
        table,
        Fidelity::SymbolicOnly,
        DocFormat::Markdown,
        started,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_row_table() {
        let md = "# t\n\n| 姓名 | 身份证号 |\n|---|:---:|\n| 张三 | 1 |\n| 李四 | 2 |\n\nend\n";
        let st = parse_markdown(md.as_bytes()).unwrap();
        assert_eq!(st.fidelity, Fidelity::Preserved);
        let t = st.table.unwrap();
        assert_eq!(t.header, vec!["姓名", "身份证号"]);
        assert_eq!(t.rows, vec![vec!["张三", "1"], vec!["李四", "2"]]);
    }

    #[test]
    fn prose_only() {
        let st = parse_markdown("张三 110105194912310029".as_bytes()).unwrap();
        assert_eq!(st.fidelity, Fidelity::SymbolicOnly);
        assert!(st.table.is_none());
    }

    #[test]
    fn delimiter_row_required() {
        let st = parse_markdown(b"| a | b |\n| 1 | 2 |\n").unwrap();
        assert!(st.table.is_none());
    }

    #[test]
    fn rejects_invalid_utf8_and_empty() {
        assert!(matches!(
            parse_markdown(&[0xff, 0xfe]),
            Err(IngestError::MalformedInput(_))
        ));
        assert!(parse_markdown(b"  \n").is_err());
    }

    #[test]
    fn escaped_pipe() {
        assert_eq!(pipe_cells(r"| a\|b | c |").unwrap(), vec!["a|b", "c"]);
    }
}
