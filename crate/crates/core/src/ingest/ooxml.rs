//! DOCX and XLSX readers over `zip` + `quick-xml`.

use std::collections::BTreeMap;
use std::io::{Cursor, Read};
use std::time::Instant;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{Fidelity, IngestError, StructuredText, TableModel};
use crate::format::DocFormat;

type Archive<'a> = zip::ZipArchive<Cursor<&'a [u8]>>;

fn open(bytes: &[u8]) -> Result<Archive<'_>, IngestError> {
    zip::ZipArchive::new(Cursor::new(bytes))
        .map_err(|e| IngestError::malformed(format!("not a readable zip archive: {e}")))
}

fn read_part(archive: &mut Archive<'_>, name: &str) -> Result<Option<String>, IngestError> {
    let mut file = match archive.by_name(name) {
        Ok(f) => f,
        Err(zip::result::ZipError::FileNotFound) => return Ok(None),
        Err(e) => return Err(IngestError::malformed(format!("{name}: {e}"))),
    };
    let mut s = String::new();
    file.read_to_string(&mut s)
        .map_err(|e| IngestError::malformed(format!("{name}: {e}")))?;
    Ok(Some(s))
}

fn require_part(archive: &mut Archive<'_>, name: &str) -> Result<String, IngestError> {
    read_part(archive, name)?.ok_or_else(|| IngestError::malformed(format!("missing part {name}")))
}

fn xml_err(part: &str) -> impl Fn(quick_xml::Error) -> IngestError + '_ {
    move |e| IngestError::malformed(format!("{part}: XML error: {e}"))
}

fn attr(e: &BytesStart<'_>, key: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.as_ref() == key)
        .and_then(|a| a.unescape_value().ok())
        .map(|v| v.into_owned())
}

fn unescape_text(t: &quick_xml::events::BytesText<'_>, part: &str) -> Result<String, IngestError> {
    t.unescape()
        .map(|c| c.into_owned())
        .map_err(|e| IngestError::malformed(format!("{part}: bad text: {e}")))
}

/// Reads `word/document.xml`: body paragraphs in order, and the first
/// top-level table as a grid.
pub fn parse_docx(bytes: &[u8]) -> Result<StructuredText, IngestError> {
    const PART: &str = "word/document.xml";
    let started = Instant::now();
    let mut archive = open(bytes)?;
    let xml = require_part(&mut archive, PART)?;
    let mut reader = Reader::from_str(&xml);

    let mut lines: Vec<String> = Vec::new();
    let mut para = String::new();
    let mut in_text = false;
    let mut tbl_depth = 0usize;
    let mut tables_seen = 0usize;
    let mut grid: Vec<Vec<String>> = Vec::new();
    let mut row: Vec<String> = Vec::new();
    let mut cell = String::new();

    loop {
        match reader.read_event().map_err(xml_err(PART))? {
            Event::Start(e) => match e.local_name().as_ref() {
                b"tbl" => {
                    tbl_depth += 1;
                    if tbl_depth == 1 {
                        tables_seen += 1;
                    }
                }
                b"tr" if tbl_depth == 1 => row.clear(),
                b"tc" if tbl_depth == 1 => cell.clear(),
                b"p" => para.clear(),
                b"t" => in_text = true,
                _ => {}
            },
            Event::Empty(e) => match e.local_name().as_ref() {
                b"tab" => para.push('\t'),
                b"br" => para.push('\n'),
                _ => {}
            },
            Event::Text(t) if in_text => para.push_str(&unescape_text(&t, PART)?),
            Event::End(e) => match e.local_name().as_ref() {
                b"t" => in_text = false,
                b"p" => {
                    if tbl_depth > 0 {
                        if !cell.is_empty() && !para.is_empty() {
                            cell.push(' ');
                        }
                        cell.push_str(&para);
                    } else {
                        lines.push(std::mem::take(&mut para));
                    }
                }
                b"tc" if tbl_depth == 1 => row.push(cell.trim().to_owned()),
                b"tr" if tbl_depth == 1 => {
                    lines.push(row.join("\t"));
                    if tables_seen == 1 {
                        grid.push(std::mem::take(&mut row));
                    }
                }
                b"tbl" => tbl_depth = tbl_depth.saturating_sub(1),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    let table = (!grid.is_empty()).then(|| {
        let header = grid.remove(0);
        TableModel::new(header, grid)
    });
    StructuredText::assemble(
        lines.join("\n"),
        table,
        Fidelity::SymbolicOnly,
        DocFormat::Docx,
        started,
    )
}

/// Rewrites a numeric cell's lexical form without exponent notation or a
/// trailing `.0`, digit for digit. `1.10105194912310E+17` becomes
/// `110105194912310000`; text that is not a number is returned unchanged.
pub fn expand_numeric(raw: &str) -> String {
    let s = raw.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => match s[i + 1..].parse::<i32>() {
            Ok(e) => (&s[..i], e),
            Err(_) => return raw.to_owned(),
        },
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
    {
        return raw.to_owned();
    }
    let digits: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + i64::from(exp);
    let (int_digits, frac_digits) = if point <= 0 {
        (
            "0".to_owned(),
            format!("{}{digits}", "0".repeat((-point) as usize)),
        )
    } else if point as usize >= digits.len() {
        (
            format!("{digits}{}", "0".repeat(point as usize - digits.len())),
            String::new(),
        )
    } else {
        (
            digits[..point as usize].to_owned(),
            digits[point as usize..].to_owned(),
        )
    };
    let int_digits = int_digits.trim_start_matches('0');
    let int_digits = if int_digits.is_empty() {
        "0"
    } else {
        int_digits
    };
    let frac_digits = frac_digits.trim_end_matches('0');
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(int_digits);
    if !frac_digits.is_empty() {
        out.push('.');
        out.push_str(frac_digits);
    }
    out
}

fn shared_strings(xml: &str) -> Result<Vec<String>, IngestError> {
    const PART: &str = "xl/sharedStrings.xml";
    let mut reader = Reader::from_str(xml);
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_t = false;
    // Phonetic runs (`rPh`) carry readings, not cell text.
    let mut in_phonetic = false;
    loop {
        match reader.read_event().map_err(xml_err(PART))? {
            Event::Start(e) => match e.local_name().as_ref() {
                b"si" => cur.clear(),
                b"t" => in_t = true,
                b"rPh" => in_phonetic = true,
                _ => {}
            },
            Event::Empty(e) if e.local_name().as_ref() == b"si" => out.push(String::new()),
            Event::Text(t) if in_t && !in_phonetic => cur.push_str(&unescape_text(&t, PART)?),
            Event::End(e) => match e.local_name().as_ref() {
                b"t" => in_t = false,
                b"rPh" => in_phonetic = false,
                b"si" => out.push(std::mem::take(&mut cur)),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }
    Ok(out)
}

/// Zero-based column index from a cell reference such as `AB12`.
fn column_index(cell_ref: &str) -> Option<usize> {
    let letters: Vec<u8> = cell_ref
        .bytes()
        .take_while(u8::is_ascii_alphabetic)
        .collect();
    if letters.is_empty() {
        return None;
    }
    let mut n = 0usize;
    for b in letters {
        n = n * 26 + usize::from(b.to_ascii_uppercase() - b'A') + 1;
    }
    Some(n - 1)
}

/// Path of the first worksheet named in the workbook, resolved through the
/// workbook relationships.
fn first_sheet_path(archive: &mut Archive<'_>) -> Result<String, IngestError> {
    let fallback = "xl/worksheets/sheet1.xml".to_owned();
    let Some(workbook) = read_part(archive, "xl/workbook.xml")? else {
        return Ok(fallback);
    };
    let mut reader = Reader::from_str(&workbook);
    let mut rid = None;
    loop {
        match reader.read_event().map_err(xml_err("xl/workbook.xml"))? {
            Event::Start(e) | Event::Empty(e) if e.local_name().as_ref() == b"sheet" => {
                rid = e
                    .attributes()
                    .flatten()
                    .find(|a| a.key.local_name().as_ref() == b"id")
                    .and_then(|a| a.unescape_value().ok())
                    .map(|v| v.into_owned());
                break;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    let (Some(rid), Some(rels)) = (rid, read_part(archive, "xl/_rels/workbook.xml.rels")?) else {
        return Ok(fallback);
    };
    let mut reader = Reader::from_str(&rels);
    loop {
        match reader
            .read_event()
            .map_err(xml_err("xl/_rels/workbook.xml.rels"))?
        {
            Event::Start(e) | Event::Empty(e)
                if e.local_name().as_ref() == b"Relationship"
                    && attr(&e, b"Id").as_deref() == Some(rid.as_str()) =>
            {
                let target = attr(&e, b"Target").unwrap_or_default();
                return Ok(match target.strip_prefix('/') {
                    Some(abs) => abs.to_owned(),
                    None => format!("xl/{target}"),
                });
            }
            Event::Eof => return Ok(fallback),
            _ => {}
        }
    }
}

fn read_sheet(xml: &str, part: &str, strings: &[String]) -> Result<Vec<Vec<String>>, IngestError> {
    let mut reader = Reader::from_str(xml);
    let mut rows: BTreeMap<usize, BTreeMap<usize, String>> = BTreeMap::new();
    let mut row_no = 0usize;
    let mut next_col = 0usize;
    let mut cell_col = 0usize;
    let mut cell_type = String::new();
    let mut value = String::new();
    let mut in_value = false;
    let mut in_inline = false;

    loop {
        match reader.read_event().map_err(xml_err(part))? {
            Event::Start(e) => match e.local_name().as_ref() {
                b"row" => {
                    row_no = attr(&e, b"r")
                        .and_then(|r| r.parse().ok())
                        .unwrap_or(row_no + 1);
                    next_col = 0;
                }
                b"c" => {
                    cell_col = attr(&e, b"r")
                        .as_deref()
                        .and_then(column_index)
                        .unwrap_or(next_col);
                    next_col = cell_col + 1;
                    cell_type = attr(&e, b"t").unwrap_or_default();
                    value.clear();
                }
                b"v" => in_value = true,
                b"is" => in_inline = true,
                b"t" if in_inline => in_value = true,
                _ => {}
            },
            Event::Text(t) if in_value => value.push_str(&unescape_text(&t, part)?),
            Event::End(e) => match e.local_name().as_ref() {
                b"v" | b"t" => in_value = false,
                b"is" => in_inline = false,
                b"c" => {
                    let text = match cell_type.as_str() {
                        "s" => {
                            let i: usize = value.trim().parse().map_err(|_| {
                                IngestError::malformed(format!(
                                    "{part}: bad shared-string index {value:?}"
                                ))
                            })?;
                            strings.get(i).cloned().ok_or_else(|| {
                                IngestError::malformed(format!(
                                    "{part}: shared-string index {i} out of range"
                                ))
                            })?
                        }
                        "inlineStr" | "str" | "e" => value.clone(),
                        "b" => if value.trim() == "1" { "TRUE" } else { "FALSE" }.to_owned(),
                        _ => expand_numeric(&value),
                    };
                    rows.entry(row_no).or_default().insert(cell_col, text);
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
    }

    Ok(rows
        .into_values()
        .map(|cells| {
            let width = cells.keys().next_back().map_or(0, |c| c + 1);
            let mut row = vec![String::new(); width];
            for (c, v) in cells {
                row[c] = v;
            }
            row
        })
        .collect())
}

/// Reads the first worksheet as the table (row 1 = header). Every worksheet
/// contributes tab-joined lines to the plain text.
pub fn parse_xlsx(bytes: &[u8]) -> Result<StructuredText, IngestError> {
    let started = Instant::now();
    let mut archive = open(bytes)?;
    let strings = match read_part(&mut archive, "xl/sharedStrings.xml")? {
        Some(xml) => shared_strings(&xml)?,
        None => Vec::new(),
    };
    let first = first_sheet_path(&mut archive)?;
    let mut sheet_names: Vec<String> = archive
        .file_names()
        .filter(|n| n.starts_with("xl/worksheets/") && n.ends_with(".xml") && *n != first)
        .map(str::to_owned)
        .collect();
    sheet_names.sort();
    sheet_names.insert(0, first.clone());

    let mut lines = Vec::new();
    let mut table_rows = None;
    for name in &sheet_names {
        let xml = require_part(&mut archive, name)?;
        let rows = read_sheet(&xml, name, &strings)?;
        lines.extend(rows.iter().map(|r| r.join("\t")));
        if table_rows.is_none() {
            table_rows = Some(rows);
        }
    }
    let mut rows = table_rows.unwrap_or_default();
    if rows.is_empty() {
        return Err(IngestError::malformed(format!(
            "{first}: worksheet is empty"
        )));
    }
    let header = rows.remove(0);
    StructuredText::assemble(
        lines.join("\n"),
        Some(TableModel::new(header, rows)),
        Fidelity::SymbolicOnly,
        DocFormat::Xlsx,
        started,
    )
}
