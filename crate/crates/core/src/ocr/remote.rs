//! Client for an external OCR service.
//!
//! Wire format: the raw image bytes are POSTed as the request body; the reply
//! is `{"lines": [{"text": "...", "bbox": [x0, y0, x1, y1]}]}` with `bbox`
//! optional. Boxes are in image coordinates with y growing downward.

use std::time::{Duration, Instant};

use serde::Deserialize;

use super::OcrError;
use crate::format::DocFormat;
use crate::http::{self, HttpError};
use crate::ingest::layout::{grid_from_runs, TextRun};
use crate::ingest::{Fidelity, StructuredText};

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteOcrConfig {
    pub endpoint: String,
    pub timeout: Duration,
}

#[derive(Debug, Deserialize)]
struct Reply {
    lines: Vec<ReplyLine>,
}

#[derive(Debug, Deserialize)]
struct ReplyLine {
    text: String,
    #[serde(default)]
    bbox: Option<[f64; 4]>,
}

fn structure_reply(
    reply: Reply,
) -> Result<(String, Option<crate::ingest::TableModel>, Fidelity), OcrError> {
    if reply.lines.iter().all(|l| l.text.trim().is_empty()) {
        return Err(OcrError::MalformedResponse("no text lines".into()));
    }
    if reply.lines.iter().all(|l| l.bbox.is_some()) {
        let runs = reply
            .lines
            .into_iter()
            .map(|l| {
                let [x0, y0, x1, y1] = l.bbox.expect("checked above");
                TextRun {
                    x: x0,
                    y: (y0 + y1) / 2.0,
                    size: (y1 - y0).abs().max(1.0),
                    width: (x1 - x0).abs(),
                    text: l.text,
                }
            })
            .collect();
        let grid = grid_from_runs(runs);
        let fidelity = if grid.table.is_some() {
            Fidelity::Preserved
        } else {
            Fidelity::SymbolicOnly
        };
        Ok((grid.lines.join("\n"), grid.table, fidelity))
    } else {
        let text = reply
            .lines
            .into_iter()
            .map(|l| l.text)
            .collect::<Vec<_>>()
            .join("\n");
        Ok((text, None, Fidelity::Lost))
    }
}

/// Sends `image` to the OCR service. `extract_time` is the measured round
/// trip.
pub fn remote_ocr(image: &[u8], config: &RemoteOcrConfig) -> Result<StructuredText, OcrError> {
    let started = Instant::now();
    let reply = http::post(
        &config.endpoint,
        "application/octet-stream",
        image,
        config.timeout,
    )
    .map_err(|e| match e {
        HttpError::Unreachable(m) => OcrError::Timeout(m),
        HttpError::Failure(m) => OcrError::RemoteFailure(m),
    })?;
    if !(200..300).contains(&reply.status) {
        return Err(OcrError::RemoteFailure(format!(
            "HTTP status {}",
            reply.status
        )));
    }
    let parsed: Reply = serde_json::from_str(&reply.body)
        .map_err(|e| OcrError::MalformedResponse(e.to_string()))?;
    let (plain_text, table, fidelity) = structure_reply(parsed)?;
    Ok(StructuredText {
        plain_text,
        table,
        fidelity,
        source_format: DocFormat::Transcript,
        extract_time: started.elapsed().as_secs_f64(),
    })
}
