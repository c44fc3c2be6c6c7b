//! Minimal Office Open XML writers: just enough parts for Word and Excel to
//! open the file.

use std::io::{Cursor, Write};

use quick_xml::escape::escape;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use super::templates::PageLayout;

const XML_DECL: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#;
const NS_W: &str = "http://schemas.openxmlformats.org/wordprocessingml/2006/main";
const NS_SHEET: &str = "http://schemas.openxmlformats.org/spreadsheetml/2006/main";
const NS_REL: &str = "http://schemas.openxmlformats.org/officeDocument/2006/relationships";
const NS_PKG_REL: &str = "http://schemas.openxmlformats.org/package/2006/relationships";
const REL_OFFICE_DOC: &str =
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument";

fn zip_parts(parts: &[(&str, String)]) -> Vec<u8> {
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(DateTime::default());
    for (name, body) in parts {
        zip.start_file(*name, options).expect("in-memory zip");
        zip.write_all(body.as_bytes()).expect("in-memory zip");
    }
    zip.finish().expect("in-memory zip").into_inner()
}

fn docx_paragraph(text: &str, bold: bool) -> String {
    let rpr = if bold { "<w:rPr><w:b/></w:rPr>" } else { "" };
    format!(
        r#"<w:p><w:r>{rpr}<w:t xml:space="preserve">{}</w:t></w:r></w:p>"#,
        escape(text)
    )
}

fn docx_row(cells: &[String], width: u32) -> String {
    let mut out = String::from("<w:tr>");
    for cell in cells {
        out.push_str(&format!(
            r#"<w:tc><w:tcPr><w:tcW w:w="{width}" w:type="dxa"/></w:tcPr><w:p><w:r><w:t xml:space="preserve">{}</w:t></w:r></w:p></w:tc>"#,
            escape(cell.as_str())
        ));
    }
    out.push_str("</w:tr>");
    out
}

pub fn write_docx(page: &PageLayout) -> Vec<u8> {
    let width = 9000 / page.header.len().max(1) as u32;
    let mut body = String::new();
    body.push_str(&docx_paragraph(&page.title, true));
    for line in page.context_lines() {
        body.push_str(&docx_paragraph(&line, false));
    }
    body.push_str(r#"<w:tbl><w:tblPr><w:tblW w:w="0" w:type="auto"/><w:tblBorders><w:top w:val="single" w:sz="4"/><w:left w:val="single" w:sz="4"/><w:bottom w:val="single" w:sz="4"/><w:right w:val="single" w:sz="4"/><w:insideH w:val="single" w:sz="4"/><w:insideV w:val="single" w:sz="4"/></w:tblBorders></w:tblPr><w:tblGrid>"#);
    for _ in &page.header {
        body.push_str(&format!(r#"<w:gridCol w:w="{width}"/>"#));
    }
    body.push_str("</w:tblGrid>");
    body.push_str(&docx_row(&page.header, width));
    for row in &page.rows {
        body.push_str(&docx_row(row, width));
    }
    body.push_str("</w:tbl>");
    body.push_str(&docx_paragraph(&page.footer, false));
    body.push_str("<w:sectPr/>");

    let document =
        format!(r#"{XML_DECL}<w:document xmlns:w="{NS_W}"><w:body>{body}</w:body></w:document>"#);
    let content_types = format!(
        r#"{XML_DECL}<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"><Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/><Default Extension="xml" ContentType="application/xml"/><Override PartName="/word/document.xml" ContentType="application/vnd.openxmlformats-officedocument.wordprocessingml.document.main+xml"/></Types>"#
    );
    let rels = format!(
        r#"{XML_DECL}<Relationships xmlns="{NS_PKG_REL}"><Relationship Id="rId1" Type="{REL_OFFICE_DOC}" Target="word/document.xml"/></Relationships>"#
    );
    zip_parts(&[
        ("[Content_Types].xml", content_types),
        ("_rels/.rels", rels),
        ("word/document.xml", document),
    ])
}

/// Spreadsheet column letters for a zero-based index (0 → A, 26 → AA).
pub fn column_letters(mut index: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

struct SharedStrings {
    items: Vec<String>,
    index: std::collections::HashMap<String, usize>,
}

impl SharedStrings {
    fn new() -> Self {
        Self {
            items: Vec::new(),
            index: Default::default(),
        }
    }

    fn intern(&mut self, s: &str) -> usize {
        if let Some(&i) = self.index.get(s) {
            return i;
        }
        self.items.push(s.to_owned());
        self.index.insert(s.to_owned(), self.items.len() - 1);
        self.items.len() - 1
    }
}

fn is_plain_number(s: &str) -> bool {
    !s.is_empty() && s.len() < 12 && s.bytes().all(|b| b.is_ascii_digit()) && !s.starts_with('0')
}

fn sheet_xml(rows: &[Vec<String>], strings: &mut SharedStrings, string_cols: &[usize]) -> String {
    let mut data = String::new();
    for (r, row) in rows.iter().enumerate() {
        let rn = r + 1;
        data.push_str(&format!(r#"<row r="{rn}">"#));
        for (c, cell) in row.iter().enumerate() {
            let cref = format!("{}{rn}", column_letters(c));
            if r > 0 && !string_cols.contains(&c) && is_plain_number(cell) {
                data.push_str(&format!(r#"<c r="{cref}"><v>{cell}</v></c>"#));
            } else {
                let i = strings.intern(cell);
                data.push_str(&format!(r#"<c r="{cref}" t="s"><v>{i}</v></c>"#));
            }
        }
        data.push_str("</row>");
    }
    format!(r#"{XML_DECL}<worksheet xmlns="{NS_SHEET}"><sheetData>{data}</sheetData></worksheet>"#)
}

/// Writes the identity table to the first worksheet (header in row 1) and the
/// document context to a second worksheet.
pub fn write_xlsx(page: &PageLayout) -> Vec<u8> {
    let mut strings = SharedStrings::new();
    let mut table = vec![page.header.clone()];
    table.extend(page.rows.iter().cloned());
    // ID cells are always written as strings so no reader coerces them.
    let sheet1 = sheet_xml(&table, &mut strings, &[page.id_col, page.name_col]);

    let mut info = vec![vec!["标题".to_owned(), page.title.clone()]];
    info.extend(page.context.iter().map(|(k, v)| vec![k.clone(), v.clone()]));
    info.push(vec!["备注".to_owned(), page.footer.clone()]);
    let sheet2 = sheet_xml(&info, &mut strings, &[0, 1]);

    let total: usize = table.iter().chain(&info).map(Vec::len).sum();
    let mut sst = format!(
        r#"{XML_DECL}<sst xmlns="{NS_SHEET}" count="{total}" uniqueCount="{}">"#,
        strings.items.len()
    );
    for s in &strings.items {
        sst.push_str(&format!(
            r#"<si><t xml:space="preserve">{}</t></si>"#,
            escape(s.as_str())
        ));
    }
    sst.push_str("</sst>");

    let workbook = format!(
        r#"{XML_DECL}<workbook xmlns="{NS_SHEET}" xmlns:r="{NS_REL}"><sheets><sheet name="名单" sheetId="1" r:id="rId1"/><sheet name="信息" sheetId="2" r:id="rId2"/></sheets></workbook>"#
    );
    let workbook_rels = format!(
        r#"{XML_DECL}<Relationships xmlns="{NS_PKG_REL}"><Relationship Id="rId1" Type="{NS_REL}/worksheet" Target="worksheets/sheet1.xml"/><Relationship Id="rId2" Type="{NS_REL}/worksheet" Target="worksheets/sheet2.xml"/><Relationship Id="rId3" Type="{NS_REL}/sharedStrings" Target="sharedStrings.xml"/></Relationships>"#
    );
    let content_types = format!(
        r#"{XML_DECL}<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types"><Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/><Default Extension="xml" ContentType="application/xml"/><Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/><Override PartName="/xl/worksheets/sheet1.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/><Override PartName="/xl/worksheets/sheet2.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/><Override PartName="/xl/sharedStrings.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"/></Types>"#
    );
    let rels = format!(
        r#"{XML_DECL}<Relationships xmlns="{NS_PKG_REL}"><Relationship Id="rId1" Type="{REL_OFFICE_DOC}" Target="xl/workbook.xml"/></Relationships>"#
    );
    zip_parts(&[
        ("[Content_Types].xml", content_types),
        ("_rels/.rels", rels),
        ("xl/workbook.xml", workbook),
        ("xl/_rels/workbook.xml.rels", workbook_rels),
        ("xl/worksheets/sheet1.xml", sheet1),
        ("xl/worksheets/sheet2.xml", sheet2),
        ("xl/sharedStrings.xml", sst),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters() {
        assert_eq!(column_letters(0), "A");
        assert_eq!(column_letters(25), "Z");
        assert_eq!(column_letters(26), "AA");
        assert_eq!(column_letters(701), "ZZ");
        assert_eq!(column_letters(702), "AAA");
    }
}
