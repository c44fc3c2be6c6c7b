//! PDF text reader for uncompressed documents.
//!
//! Objects are located by scanning for `N G obj` headers rather than trusting
//! the xref table, so mildly damaged offsets still parse. Text comes from the
//! text-showing operators of each page's content streams; positioned runs go
//! through [`grid_from_runs`] for line and column recovery. Anything that
//! needs a decoder (filters, inline images) is reported as unsupported.

use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Instant;

use regex::bytes::Regex;

use super::layout::{grid_from_runs, text_width, TextRun};
use super::{Fidelity, IngestError, StructuredText};
use crate::format::DocFormat;

#[derive(Debug, Clone, PartialEq)]
enum Obj {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Name(String),
    Str(Vec<u8>),
    Array(Vec<Obj>),
    Dict(HashMap<String, Obj>),
    Ref(u32),
    Stream(HashMap<String, Obj>, Vec<u8>),
}

impl Obj {
    fn as_f64(&self) -> Option<f64> {
        match self {
            Obj::Int(i) => Some(*i as f64),
            Obj::Real(r) => Some(*r),
            _ => None,
        }
    }

    fn as_name(&self) -> Option<&str> {
        match self {
            Obj::Name(n) => Some(n),
            _ => None,
        }
    }

    fn dict(&self) -> Option<&HashMap<String, Obj>> {
        match self {
            Obj::Dict(d) | Obj::Stream(d, _) => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Obj(Obj),
    ArrayOpen,
    ArrayClose,
    DictOpen,
    DictClose,
    Keyword(String),
}

fn is_white(b: u8) -> bool {
    matches!(b, 0 | b'\t' | b'\n' | 0x0c | b'\r' | b' ')
}

fn is_delim(b: u8) -> bool {
    matches!(
        b,
        b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%'
    )
}

fn malformed(msg: impl Into<String>) -> IngestError {
    IngestError::malformed(format!("pdf: {}", msg.into()))
}

struct Lexer<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self { data, pos }
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    fn skip_space(&mut self) {
        while let Some(b) = self.peek() {
            if is_white(b) {
                self.pos += 1;
            } else if b == b'%' {
                while let Some(b) = self.peek() {
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn regular_run(&mut self) -> &'a [u8] {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if is_white(b) || is_delim(b) {
                break;
            }
            self.pos += 1;
        }
        &self.data[start..self.pos]
    }

    fn literal_string(&mut self) -> Result<Vec<u8>, IngestError> {
        // opening paren already consumed
        let mut out = Vec::new();
        let mut depth = 1usize;
        loop {
            let b = self
                .peek()
                .ok_or_else(|| malformed("unterminated string"))?;
            self.pos += 1;
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(out);
                    }
                    out.push(b);
                }
                b'\\' => {
                    let e = self
                        .peek()
                        .ok_or_else(|| malformed("unterminated string"))?;
                    self.pos += 1;
                    match e {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(0x08),
                        b'f' => out.push(0x0c),
                        b'\r' => {
                            if self.peek() == Some(b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'\n' => {}
                        b'0'..=b'7' => {
                            let mut v = u32::from(e - b'0');
                            for _ in 0..2 {
                                match self.peek() {
                                    Some(d @ b'0'..=b'7') => {
                                        v = v * 8 + u32::from(d - b'0');
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push(v as u8);
                        }
                        other => out.push(other),
                    }
                }
                _ => out.push(b),
            }
        }
    }

    fn hex_string(&mut self) -> Result<Vec<u8>, IngestError> {
        // opening angle already consumed
        let mut digits = Vec::new();
        loop {
            let b = self
                .peek()
                .ok_or_else(|| malformed("unterminated hex string"))?;
            self.pos += 1;
            match b {
                b'>' => break,
                b if is_white(b) => {}
                b if b.is_ascii_hexdigit() => digits.push(b),
                other => return Err(malformed(format!("bad hex digit {:?}", other as char))),
            }
        }
        if digits.len() % 2 == 1 {
            digits.push(b'0');
        }
        Ok(digits
            .chunks(2)
            .map(|p| {
                let s = std::str::from_utf8(p).expect("hex digits are ASCII");
                u8::from_str_radix(s, 16).expect("validated hex")
            })
            .collect())
    }

    fn name(&mut self) -> String {
        // slash already consumed
        let raw = self.regular_run();
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        while i < raw.len() {
            if raw[i] == b'#' && i + 2 < raw.len() {
                if let Ok(v) = u8::from_str_radix(&String::from_utf8_lossy(&raw[i + 1..i + 3]), 16)
                {
                    out.push(v);
                    i += 3;
                    continue;
                }
            }
            out.push(raw[i]);
            i += 1;
        }
        String::from_utf8_lossy(&out).into_owned()
    }

    fn next_token(&mut self) -> Result<Option<Token>, IngestError> {
        self.skip_space();
        let Some(b) = self.peek() else {
            return Ok(None);
        };
        self.pos += 1;
        let tok = match b {
            b'[' => Token::ArrayOpen,
            b']' => Token::ArrayClose,
            b'<' if self.peek() == Some(b'<') => {
                self.pos += 1;
                Token::DictOpen
            }
            b'>' if self.peek() == Some(b'>') => {
                self.pos += 1;
                Token::DictClose
            }
            b'<' => Token::Obj(Obj::Str(self.hex_string()?)),
            b'(' => Token::Obj(Obj::Str(self.literal_string()?)),
            b'/' => Token::Obj(Obj::Name(self.name())),
            b'{' | b'}' => Token::Keyword((b as char).to_string()),
            b')' | b'>' => return Err(malformed(format!("unexpected {:?}", b as char))),
            _ => {
                self.pos -= 1;
                let run = self.regular_run();
                let s = String::from_utf8_lossy(run).into_owned();
                if let Ok(i) = s.parse::<i64>() {
                    Token::Obj(Obj::Int(i))
                } else if looks_real(&s) {
                    Token::Obj(Obj::Real(s.parse().unwrap_or(0.0)))
                } else {
                    match s.as_str() {
                        "true" => Token::Obj(Obj::Bool(true)),
                        "false" => Token::Obj(Obj::Bool(false)),
                        "null" => Token::Obj(Obj::Null),
                        _ => Token::Keyword(s),
                    }
                }
            }
        };
        Ok(Some(tok))
    }

    /// Reads one value. Integer pairs followed by `R` become references.
    fn value(&mut self, first: Token) -> Result<Obj, IngestError> {
        match first {
            Token::Obj(Obj::Int(n)) => {
                let save = self.pos;
                if let (Ok(Some(Token::Obj(Obj::Int(_)))), Ok(Some(Token::Keyword(k)))) =
                    (self.next_token(), self.next_token())
                {
                    if k == "R" {
                        return Ok(Obj::Ref(n as u32));
                    }
                }
                self.pos = save;
                Ok(Obj::Int(n))
            }
            Token::Obj(o) => Ok(o),
            Token::ArrayOpen => {
                let mut items = Vec::new();
                loop {
                    match self.next_token()? {
                        Some(Token::ArrayClose) => return Ok(Obj::Array(items)),
                        Some(t) => items.push(self.value(t)?),
                        None => return Err(malformed("unterminated array")),
                    }
                }
            }
            Token::DictOpen => {
                let mut map = HashMap::new();
                loop {
                    match self.next_token()? {
                        Some(Token::DictClose) => return Ok(Obj::Dict(map)),
                        Some(Token::Obj(Obj::Name(k))) => {
                            let t = self
                                .next_token()?
                                .ok_or_else(|| malformed("unterminated dictionary"))?;
                            map.insert(k, self.value(t)?);
                        }
                        Some(other) => {
                            return Err(malformed(format!(
                                "dictionary key expected, got {other:?}"
                            )))
                        }
                        None => return Err(malformed("unterminated dictionary")),
                    }
                }
            }
            Token::Keyword(k) => Ok(Obj::Name(k)),
            Token::ArrayClose | Token::DictClose => Err(malformed("unbalanced delimiter")),
        }
    }
}

fn looks_real(s: &str) -> bool {
    let s = s.strip_prefix(['+', '-']).unwrap_or(s);
    !s.is_empty()
        && s.bytes().filter(|b| *b == b'.').count() == 1
        && s.bytes().all(|b| b.is_ascii_digit() || b == b'.')
        && s != "."
}

fn obj_header() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(\d+)\s+(\d+)\s+obj\b").expect("static regex"))
}

/// Parses the body of an object starting right after its `obj` keyword.
/// Returns the value and the position after `endobj` (or the value's end).
fn parse_object_body(data: &[u8], start: usize) -> Result<(Obj, usize), IngestError> {
    let mut lx = Lexer::new(data, start);
    let first = lx.next_token()?.ok_or_else(|| malformed("empty object"))?;
    let value = lx.value(first)?;
    let after_value = lx.pos;
    match lx.next_token()? {
        Some(Token::Keyword(k)) if k == "stream" => {
            let Obj::Dict(dict) = value else {
                return Err(malformed("stream without dictionary"));
            };
            let mut p = lx.pos;
            if data.get(p) == Some(&b'\r') {
                p += 1;
            }
            if data.get(p) == Some(&b'\n') {
                p += 1;
            }
            let declared = dict
                .get("Length")
                .and_then(|l| match l {
                    Obj::Int(n) if *n >= 0 => Some(*n as usize),
                    _ => None,
                })
                .filter(|n| {
                    let end = p + n;
                    end <= data.len() && {
                        let mut t = Lexer::new(data, end);
                        t.skip_space();
                        data[t.pos..].starts_with(b"endstream")
                    }
                });
            let len = match declared {
                Some(n) => n,
                None => find(&data[p..], b"endstream")
                    .ok_or_else(|| malformed("stream without endstream"))?,
            };
            let body = data[p..p + len].to_vec();
            let end = find(&data[p + len..], b"endobj").map_or(p + len, |i| p + len + i + 6);
            Ok((Obj::Stream(dict, body), end))
        }
        Some(Token::Keyword(k)) if k == "endobj" => Ok((value, lx.pos)),
        _ => Ok((value, after_value)),
    }
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn rfind(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).rposition(|w| w == needle)
}

/// A page dictionary with its inherited resources.
type PageEntry = (HashMap<String, Obj>, Option<Obj>);

struct Document {
    objects: HashMap<u32, Obj>,
    trailer: Option<HashMap<String, Obj>>,
}

impl Document {
    fn load(data: &[u8]) -> Result<Self, IngestError> {
        if !data.starts_with(b"%PDF-") {
            return Err(malformed("missing %PDF- header"));
        }
        let mut objects = HashMap::new();
        let mut pos = 0;
        while let Some(m) = obj_header().captures_at(data, pos) {
            let whole = m.get(0).expect("match");
            let num: u32 = std::str::from_utf8(&m[1])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| malformed("object number out of range"))?;
            match parse_object_body(data, whole.end()) {
                Ok((obj, end)) => {
                    // Later definitions win, as with incremental updates.
                    objects.insert(num, obj);
                    pos = end.max(whole.end());
                }
                Err(_) => pos = whole.end(),
            }
        }
        if objects.is_empty() {
            return Err(malformed("no objects found"));
        }
        let trailer = rfind(data, b"trailer").and_then(|i| {
            let mut lx = Lexer::new(data, i + 7);
            match lx.next_token() {
                Ok(Some(t @ Token::DictOpen)) => match lx.value(t) {
                    Ok(Obj::Dict(d)) => Some(d),
                    _ => None,
                },
                _ => None,
            }
        });
        Ok(Self { objects, trailer })
    }

    fn resolve<'a>(&'a self, obj: &'a Obj) -> &'a Obj {
        let mut cur = obj;
        for _ in 0..32 {
            match cur {
                Obj::Ref(n) => cur = self.objects.get(n).unwrap_or(&Obj::Null),
                _ => return cur,
            }
        }
        &Obj::Null
    }

    fn get<'a>(&'a self, dict: &'a HashMap<String, Obj>, key: &str) -> Option<&'a Obj> {
        dict.get(key)
            .map(|o| self.resolve(o))
            .filter(|o| **o != Obj::Null)
    }

    fn catalog(&self) -> Result<&HashMap<String, Obj>, IngestError> {
        if let Some(root) = self.trailer.as_ref().and_then(|t| self.get(t, "Root")) {
            if let Some(d) = root.dict() {
                return Ok(d);
            }
        }
        let mut nums: Vec<&u32> = self.objects.keys().collect();
        nums.sort();
        nums.into_iter()
            .filter_map(|n| self.objects[n].dict())
            .find(|d| d.get("Type").and_then(Obj::as_name) == Some("Catalog"))
            .ok_or_else(|| malformed("no document catalog"))
    }

    /// Leaf page dictionaries in document order, each with inherited
    /// resources attached.
    fn pages(&self) -> Result<Vec<PageEntry>, IngestError> {
        let catalog = self.catalog()?;
        let root = self
            .get(catalog, "Pages")
            .and_then(Obj::dict)
            .ok_or_else(|| malformed("catalog has no page tree"))?;
        let mut out = Vec::new();
        self.walk_pages(root, None, &mut out, 0)?;
        Ok(out)
    }

    fn walk_pages(
        &self,
        node: &HashMap<String, Obj>,
        inherited: Option<&Obj>,
        out: &mut Vec<(HashMap<String, Obj>, Option<Obj>)>,
        depth: usize,
    ) -> Result<(), IngestError> {
        if depth > 64 {
            return Err(malformed("page tree too deep"));
        }
        let resources = self.get(node, "Resources").or(inherited);
        match self.get(node, "Kids") {
            Some(Obj::Array(kids)) => {
                for kid in kids {
                    if let Some(d) = self.resolve(kid).dict() {
                        self.walk_pages(d, resources, out, depth + 1)?;
                    }
                }
            }
            _ => out.push((node.clone(), resources.cloned())),
        }
        Ok(())
    }

    fn stream_data<'a>(&'a self, obj: &'a Obj) -> Result<&'a [u8], IngestError> {
        match self.resolve(obj) {
            Obj::Stream(dict, data) => {
                if let Some(filter) = dict.get("Filter") {
                    let name = match self.resolve(filter) {
                        Obj::Name(n) => n.clone(),
                        Obj::Array(a) => a
                            .iter()
                            .filter_map(|f| self.resolve(f).as_name())
                            .collect::<Vec<_>>()
                            .join(","),
                        other => format!("{other:?}"),
                    };
                    return Err(IngestError::UnsupportedPdfFeature(format!(
                        "compressed stream ({name})"
                    )));
                }
                Ok(data)
            }
            _ => Err(malformed("content is not a stream")),
        }
    }
}

#[derive(Debug, Clone)]
enum FontDecoder {
    /// One byte per character, ASCII / Latin-1.
    Simple,
    /// Two bytes per character, big-endian UCS-2 / UTF-16 code units.
    Ucs2,
}

impl FontDecoder {
    fn decode(&self, bytes: &[u8]) -> String {
        match self {
            FontDecoder::Simple => bytes.iter().map(|b| char::from(*b)).collect(),
            FontDecoder::Ucs2 => {
                let units: Vec<u16> = bytes
                    .chunks(2)
                    .map(|p| u16::from_be_bytes([p[0], *p.get(1).unwrap_or(&0)]))
                    .collect();
                char::decode_utf16(units)
                    .map(|r| r.unwrap_or(char::REPLACEMENT_CHARACTER))
                    .collect()
            }
        }
    }
}

fn font_decoder(doc: &Document, font: &HashMap<String, Obj>) -> Result<FontDecoder, IngestError> {
    if doc.get(font, "Subtype").and_then(Obj::as_name) != Some("Type0") {
        return Ok(FontDecoder::Simple);
    }
    let encoding = doc
        .get(font, "Encoding")
        .and_then(Obj::as_name)
        .unwrap_or("");
    if encoding.contains("UCS2") || encoding.contains("UTF16") {
        Ok(FontDecoder::Ucs2)
    } else {
        Err(IngestError::UnsupportedPdfFeature(format!(
            "composite font encoding {encoding:?}"
        )))
    }
}

/// Affine matrix `[a b c d e f]`.
type Matrix = [f64; 6];

const IDENTITY: Matrix = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0];

/// `m1 × m2` in PDF row-vector convention.
fn mul(m1: &Matrix, m2: &Matrix) -> Matrix {
    [
        m1[0] * m2[0] + m1[1] * m2[2],
        m1[0] * m2[1] + m1[1] * m2[3],
        m1[2] * m2[0] + m1[3] * m2[2],
        m1[2] * m2[1] + m1[3] * m2[3],
        m1[4] * m2[0] + m1[5] * m2[2] + m2[4],
        m1[4] * m2[1] + m1[5] * m2[3] + m2[5],
    ]
}

fn translate(tx: f64, ty: f64) -> Matrix {
    [1.0, 0.0, 0.0, 1.0, tx, ty]
}

struct TextState<'d> {
    doc: &'d Document,
    fonts: HashMap<String, FontDecoder>,
    font: FontDecoder,
    size: f64,
    leading: f64,
    tm: Matrix,
    tlm: Matrix,
    ctm: Matrix,
    stack: Vec<Matrix>,
    page_offset: f64,
    runs: Vec<TextRun>,
}

impl TextState<'_> {
    fn next_line(&mut self, tx: f64, ty: f64) {
        self.tlm = mul(&translate(tx, ty), &self.tlm);
        self.tm = self.tlm;
    }

    fn show(&mut self, bytes: &[u8]) {
        let text = self.font.decode(bytes);
        let trm = mul(&self.tm, &self.ctm);
        let scale = (trm[2] * trm[2] + trm[3] * trm[3]).sqrt();
        let size = (self.size * scale).abs().max(0.1);
        let advance = text_width(&text, self.size);
        self.runs.push(TextRun {
            x: trm[4],
            y: self.page_offset - trm[5],
            size,
            width: text_width(&text, size),
            text,
        });
        self.tm = mul(&translate(advance, 0.0), &self.tm);
    }

    fn nums(operands: &[Obj], n: usize) -> Option<Vec<f64>> {
        if operands.len() < n {
            return None;
        }
        operands[operands.len() - n..]
            .iter()
            .map(Obj::as_f64)
            .collect()
    }

    fn operator(&mut self, op: &str, operands: &[Obj]) -> Result<(), IngestError> {
        match op {
            "BT" => {
                self.tm = IDENTITY;
                self.tlm = IDENTITY;
            }
            "q" => self.stack.push(self.ctm),
            "Q" => self.ctm = self.stack.pop().unwrap_or(IDENTITY),
            "cm" => {
                if let Some(v) = Self::nums(operands, 6) {
                    self.ctm = mul(&[v[0], v[1], v[2], v[3], v[4], v[5]], &self.ctm);
                }
            }
            "Tf" => {
                if operands.len() >= 2 {
                    let name = operands[operands.len() - 2].as_name().unwrap_or("");
                    self.font = self
                        .fonts
                        .get(name)
                        .cloned()
                        .ok_or_else(|| malformed(format!("unknown font /{name}")))?;
                    self.size = operands[operands.len() - 1].as_f64().unwrap_or(self.size);
                }
            }
            "TL" => {
                if let Some(v) = Self::nums(operands, 1) {
                    self.leading = v[0];
                }
            }
            "Td" => {
                if let Some(v) = Self::nums(operands, 2) {
                    self.next_line(v[0], v[1]);
                }
            }
            "TD" => {
                if let Some(v) = Self::nums(operands, 2) {
                    self.leading = -v[1];
                    self.next_line(v[0], v[1]);
                }
            }
            "Tm" => {
                if let Some(v) = Self::nums(operands, 6) {
                    self.tlm = [v[0], v[1], v[2], v[3], v[4], v[5]];
                    self.tm = self.tlm;
                }
            }
            "T*" => self.next_line(0.0, -self.leading),
            "Tj" | "'" | "\"" => {
                if op != "Tj" {
                    self.next_line(0.0, -self.leading);
                }
                if let Some(Obj::Str(s)) = operands.last() {
                    self.show(s);
                }
            }
            "TJ" => {
                if let Some(Obj::Array(items)) = operands.last() {
                    for item in items {
                        match item {
                            Obj::Str(s) => self.show(s),
                            other => {
                                if let Some(adj) = other.as_f64() {
                                    let dx = -adj / 1000.0 * self.size;
                                    self.tm = mul(&translate(dx, 0.0), &self.tm);
                                }
                            }
                        }
                    }
                }
            }
            "BI" | "ID" => {
                return Err(IngestError::UnsupportedPdfFeature("inline image".into()));
            }
            _ => {}
        }
        Ok(())
    }

    fn run_stream(&mut self, data: &[u8]) -> Result<(), IngestError> {
        let mut lx = Lexer::new(data, 0);
        let mut operands: Vec<Obj> = Vec::new();
        while let Some(tok) = lx.next_token()? {
            match tok {
                Token::Keyword(op) => {
                    self.operator(&op, &operands)?;
                    operands.clear();
                }
                other => {
                    // Content streams have no indirect references, so plain
                    // integers must not be merged into `N G R` triples.
                    let v = match other {
                        Token::Obj(o) => o,
                        t => lx.value(t)?,
                    };
                    operands.push(v);
                }
            }
        }
        Ok(())
    }
}

/// Vertical distance between stacked pages in the run coordinate space.
const PAGE_STRIDE: f64 = 100_000.0;

pub fn parse_pdf(bytes: &[u8]) -> Result<StructuredText, IngestError> {
    let started = Instant::now();
    let doc = Document::load(bytes)?;
    let pages = doc.pages()?;
    if pages.is_empty() {
        return Err(malformed("document has no pages"));
    }
    let mut runs = Vec::new();
    for (index, (page, resources)) in pages.iter().enumerate() {
        let mut fonts = HashMap::new();
        if let Some(font_dict) = resources
            .as_ref()
            .and_then(|r| doc.resolve(r).dict())
            .and_then(|r| doc.get(r, "Font"))
            .and_then(Obj::dict)
        {
            for (name, f) in font_dict {
                if let Some(d) = doc.resolve(f).dict() {
                    fonts.insert(name.clone(), font_decoder(&doc, d)?);
                }
            }
        }
        let mut state = TextState {
            doc: &doc,
            fonts,
            font: FontDecoder::Simple,
            size: 12.0,
            leading: 0.0,
            tm: IDENTITY,
            tlm: IDENTITY,
            ctm: IDENTITY,
            stack: Vec::new(),
            page_offset: PAGE_STRIDE * (index as f64 + 1.0),
            runs: Vec::new(),
        };
        let contents: Vec<&Obj> = match page.get("Contents").map(|c| doc.resolve(c)) {
            Some(Obj::Array(parts)) => parts.iter().collect(),
            Some(Obj::Null) | None => Vec::new(),
            Some(_) => vec![page.get("Contents").expect("checked above")],
        };
        for c in contents {
            let data = state.doc.stream_data(c)?;
            state.run_stream(data)?;
        }
        runs.extend(state.runs);
    }
    let grid = grid_from_runs(runs);
    StructuredText::assemble(
        grid.lines.join("\n"),
        grid.table,
        Fidelity::SymbolicOnly,
        DocFormat::Pdf,
        started,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex_all(s: &str) -> Vec<Obj> {
        let mut lx = Lexer::new(s.as_bytes(), 0);
        let mut out = Vec::new();
        while let Some(t) = lx.next_token().unwrap() {
            out.push(lx.value(t).unwrap());
        }
        out
    }

    #[test]
    fn lexes_values() {
        let v = lex_all(r"<< /A 1 0 R /B [1 2.5 (x\(y\)) <4E2D>] /C#20D true >>");
        let Obj::Dict(d) = &v[0] else { panic!() };
        assert_eq!(d["A"], Obj::Ref(1));
        assert_eq!(
            d["B"],
            Obj::Array(vec![
                Obj::Int(1),
                Obj::Real(2.5),
                Obj::Str(b"x(y)".to_vec()),
                Obj::Str(vec![0x4e, 0x2d])
            ])
        );
        assert_eq!(d["C D"], Obj::Bool(true));
    }

    #[test]
    fn octal_escapes() {
        assert_eq!(lex_all(r"(\101\12)"), vec![Obj::Str(vec![b'A', b'\n'])]);
    }

    #[test]
    fn matrix_product() {
        let m = mul(&translate(2.0, 3.0), &[2.0, 0.0, 0.0, 2.0, 10.0, 10.0]);
        assert_eq!(m, [2.0, 0.0, 0.0, 2.0, 14.0, 16.0]);
    }

    #[test]
    fn ucs2_decoding() {
        assert_eq!(FontDecoder::Ucs2.decode(&[0x5f, 0x20, 0x00, 0x41]), "张A");
    }
}
