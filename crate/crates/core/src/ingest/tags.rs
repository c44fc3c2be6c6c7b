//! Test fixture for parsers that emit tables as HTML-style markup: the grid
//! is serialized into `<table><tr><td>` text and the [`TableModel`] is
//! dropped, so downstream code sees tags instead of structure.
//!
//! [`TableModel`]: super::TableModel

use quick_xml::escape::escape;

use super::{Fidelity, StructuredText};

fn render_row(out: &mut String, cells: &[String], tag: &str) {
    out.push_str("<tr>");
    for c in cells {
        out.push_str(&format!("<{tag}>{}</{tag}>", escape(c.as_str())));
    }
    out.push_str("</tr>\n");
}

/// Replaces the table with tagged markup. Text before the first table line
/// stays in front of it, everything else follows it.
pub fn wrap_table_tags(mut st: StructuredText) -> StructuredText {
    let Some(table) = st.table.take() else {
        st.fidelity = Fidelity::SymbolicOnly.min_with(st.fidelity);
        return st;
    };
    let header_line = table.header.join("\t");
    let row_lines: std::collections::HashSet<String> =
        table.rows.iter().map(|r| r.join("\t")).collect();

    let mut before = Vec::new();
    let mut after = Vec::new();
    let mut seen_header = false;
    for line in st.plain_text.lines() {
        if !seen_header && line == header_line {
            seen_header = true;
        } else if seen_header && row_lines.contains(line) {
            continue;
        } else if seen_header {
            after.push(line);
        } else {
            before.push(line);
        }
    }

    let mut markup = String::from("<table>\n");
    render_row(&mut markup, &table.header, "th");
    for r in &table.rows {
        render_row(&mut markup, r, "td");
    }
    markup.push_str("</table>");

    let mut text = before.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    text.push_str(&markup);
    for line in after {
        text.push('\n');
        text.push_str(line);
    }
    st.plain_text = text;
    st.fidelity = Fidelity::SymbolicOnly;
    st
}

impl Fidelity {
    /// The weaker of two fidelities.
    pub fn min_with(self, other: Fidelity) -> Fidelity {
        let rank = |f: Fidelity| match f {
            Fidelity::Preserved => 2,
            Fidelity::SymbolicOnly => 1,
            Fidelity::Lost => 0,
        };
        if rank(self) <= rank(other) {
            self
        } else {
            other
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_markdown;

    #[test]
    fn drops_table_and_tags_cells() {
        let md =
            "# 名单\n\n| 姓名 | 身份证号 |\n| --- | --- |\n| 张三 | 110105194912310029 |\n\n完\n";
        let st = wrap_table_tags(parse_markdown(md.as_bytes()).unwrap());
        assert!(st.table.is_none());
        assert_eq!(st.fidelity, Fidelity::SymbolicOnly);
        assert!(st
            .plain_text
            .contains("<td>张三</td><td>110105194912310029</td>"));
        assert!(st.plain_text.contains("<th>姓名</th>"));
    }

    #[test]
    fn tab_separated_lines_are_replaced() {
        let st = StructuredText {
            plain_text: "标题\n姓名\t身份证号\n张三\t1\n完".into(),
            table: Some(crate::ingest::TableModel::new(
                vec!["姓名".into(), "身份证号".into()],
                vec![vec!["张三".into(), "1".into()]],
            )),
            fidelity: Fidelity::Preserved,
            source_format: crate::format::DocFormat::Pdf,
            extract_time: 0.0,
        };
        let out = wrap_table_tags(st);
        let lines: Vec<&str> = out.plain_text.lines().collect();
        assert_eq!(lines[0], "标题");
        assert_eq!(*lines.last().unwrap(), "完");
        assert!(!out.plain_text.contains("张三\t1"));
    }
}
