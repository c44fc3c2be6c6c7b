//! Single-page PDF writer for the identity table.
//!
//! Output stays inside the subset the ingest reader understands: uncompressed
//! content streams, absolute `Tm` positioning for every text run, Helvetica
//! for ASCII runs and the predefined `STSong-Light` CID font (UCS-2 encoded)
//! for everything else. ASCII runs are written as literal strings, so ID
//! numbers appear verbatim in the content stream.

use std::fmt::Write as _;

use super::templates::PageLayout;
use crate::ingest::layout::text_width;

const PAGE_W: f64 = 595.0;
const PAGE_H: f64 = 842.0;
const MARGIN: f64 = 50.0;
const BODY_SIZE: f64 = 10.0;
const TITLE_SIZE: f64 = 14.0;
const LEADING: f64 = 18.0;
const COLUMN_GAP: f64 = 24.0;

fn segments(text: &str) -> Vec<(bool, String)> {
    let mut out: Vec<(bool, String)> = Vec::new();
    for c in text.chars() {
        let ascii = c.is_ascii();
        match out.last_mut() {
            Some((a, s)) if *a == ascii => s.push(c),
            _ => out.push((ascii, c.to_string())),
        }
    }
    out
}

fn literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('(');
    for c in s.chars() {
        if matches!(c, '(' | ')' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(')');
    out
}

fn ucs2_hex(s: &str) -> String {
    let mut out = String::from("<");
    for c in s.chars() {
        let code = u32::from(c);
        let unit = if code <= 0xFFFF { code } else { u32::from('?') };
        let _ = write!(out, "{unit:04X}");
    }
    out.push('>');
    out
}

fn show(ops: &mut String, text: &str, x: f64, y: f64, size: f64) {
    let mut cursor = x;
    for (ascii, seg) in segments(text) {
        let (font, operand) = if ascii {
            ("F1", literal(&seg))
        } else {
            ("F2", ucs2_hex(&seg))
        };
        let _ = writeln!(
            ops,
            "/{font} {size} Tf 1 0 0 1 {cursor:.2} {y:.2} Tm {operand} Tj"
        );
        cursor += text_width(&seg, size);
    }
}

fn content_stream(page: &PageLayout) -> String {
    let mut ops = String::from("BT\n");
    let mut y = PAGE_H - MARGIN - TITLE_SIZE;
    show(&mut ops, &page.title, MARGIN, y, TITLE_SIZE);
    y -= LEADING * 1.5;
    for line in page.context_lines() {
        show(&mut ops, &line, MARGIN, y, BODY_SIZE);
        y -= LEADING;
    }
    y -= LEADING * 0.5;

    let mut xs = vec![MARGIN];
    for col in 0..page.header.len() {
        let widest = std::iter::once(&page.header[col])
            .chain(page.rows.iter().map(|r| &r[col]))
            .map(|s| text_width(s, BODY_SIZE))
            .fold(0.0, f64::max);
        xs.push(xs[col] + widest + COLUMN_GAP);
    }
    for row in std::iter::once(&page.header).chain(&page.rows) {
        for (cell, x) in row.iter().zip(&xs) {
            show(&mut ops, cell, *x, y, BODY_SIZE);
        }
        y -= LEADING;
    }
    y -= LEADING * 0.5;
    show(&mut ops, &page.footer, MARGIN, y, BODY_SIZE);
    ops.push_str("ET\n");
    ops
}

pub fn write_pdf(page: &PageLayout) -> Vec<u8> {
    let stream = content_stream(page);
    let objects = [
        "<< /Type /Catalog /Pages 2 0 R >>".to_owned(),
        "<< /Type /Pages /Kids [3 0 R] /Count 1 >>".to_owned(),
        format!(
            "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 {PAGE_W} {PAGE_H}] /Resources << /Font << /F1 4 0 R /F2 5 0 R >> >> /Contents 8 0 R >>"
        ),
        "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>".to_owned(),
        "<< /Type /Font /Subtype /Type0 /BaseFont /STSong-Light /Encoding /UniGB-UCS2-H /DescendantFonts [6 0 R] >>".to_owned(),
        "<< /Type /Font /Subtype /CIDFontType0 /BaseFont /STSong-Light /CIDSystemInfo << /Registry (Adobe) /Ordering (GB1) /Supplement 4 >> /FontDescriptor 7 0 R /DW 1000 >>".to_owned(),
        "<< /Type /FontDescriptor /FontName /STSong-Light /Flags 6 /FontBBox [-25 -254 1000 880] /ItalicAngle 0 /Ascent 880 /Descent -120 /CapHeight 880 /StemV 93 >>".to_owned(),
        format!("<< /Length {} >>\nstream\n{stream}endstream", stream.len()),
    ];

    let mut out: Vec<u8> = b"%PDF-1.4\n%\xE2\xE3\xCF\xD3\n".to_vec();
    let mut offsets = Vec::with_capacity(objects.len());
    for (i, body) in objects.iter().enumerate() {
        offsets.push(out.len());
        out.extend_from_slice(format!("{} 0 obj\n{body}\nendobj\n", i + 1).as_bytes());
    }
    let xref_at = out.len();
    let mut xref = format!("xref\n0 {}\n0000000000 65535 f \n", objects.len() + 1);
    for off in offsets {
        let _ = writeln!(xref, "{off:010} 00000 n ");
    }
    let _ = write!(
        xref,
        "trailer\n<< /Size {} /Root 1 0 R >>\nstartxref\n{xref_at}\n%%EOF\n",
        objects.len() + 1
    );
    out.extend_from_slice(xref.as_bytes());
    out
}
