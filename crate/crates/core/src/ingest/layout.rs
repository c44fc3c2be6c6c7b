//! Reconstructs lines and a table grid from positioned text runs. Shared by
//! the PDF reader and the remote OCR client (bounding boxes).

use super::TableModel;
use crate::lexicon::is_cjk;

/// Advance width estimate: one em for CJK glyphs, 0.6 em otherwise.
pub fn text_width(text: &str, size: f64) -> f64 {
    text.chars()
        .map(|c| if is_cjk(c) { 1.0 } else { 0.6 })
        .sum::<f64>()
        * size
}

/// A positioned piece of text. `y` grows downward (reading order) and `size`
/// approximates the line height.
#[derive(Debug, Clone, PartialEq)]
pub struct TextRun {
    pub x: f64,
    pub y: f64,
    pub size: f64,
    pub width: f64,
    pub text: String,
}

#[derive(Debug, Clone)]
struct Cell {
    x: f64,
    end: f64,
    size: f64,
    text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Grid {
    /// Tab-joined cells per visual line, top to bottom.
    pub lines: Vec<String>,
    pub table: Option<TableModel>,
}

fn group_lines(mut runs: Vec<TextRun>) -> Vec<Vec<Cell>> {
    runs.retain(|r| !r.text.trim().is_empty());
    runs.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)));
    let mut lines: Vec<(f64, Vec<TextRun>)> = Vec::new();
    for run in runs {
        match lines.last_mut() {
            Some((y, line)) if (run.y - *y).abs() <= 0.5 * run.size.max(1.0) => line.push(run),
            _ => lines.push((run.y, vec![run])),
        }
    }
    lines
        .into_iter()
        .map(|(_, mut line)| {
            line.sort_by(|a, b| a.x.total_cmp(&b.x));
            let mut cells: Vec<Cell> = Vec::new();
            for run in line {
                match cells.last_mut() {
                    Some(c) if run.x - c.end < 0.8 * c.size => {
                        c.text.push_str(&run.text);
                        c.end = c.end.max(run.x + run.width);
                    }
                    _ => cells.push(Cell {
                        x: run.x,
                        end: run.x + run.width,
                        size: run.size,
                        text: run.text,
                    }),
                }
            }
            for c in &mut cells {
                c.text = c.text.trim().to_owned();
            }
            cells
        })
        .collect()
}

/// Buckets runs into lines by y (tolerance: half the line height) and into
/// columns by the x breakpoints of the first multi-cell line (the header).
/// The table continues while lines keep at least two cells.
pub fn grid_from_runs(runs: Vec<TextRun>) -> Grid {
    let lines = group_lines(runs);
    let text_lines = lines
        .iter()
        .map(|cells| {
            cells
                .iter()
                .map(|c| c.text.as_str())
                .collect::<Vec<_>>()
                .join("\t")
        })
        .collect();

    let table = lines.iter().position(|l| l.len() >= 2).and_then(|h| {
        let header = &lines[h];
        let breaks: Vec<f64> = header.iter().map(|c| c.x).collect();
        let mut rows = Vec::new();
        for line in &lines[h + 1..] {
            if line.len() < 2 {
                break;
            }
            let mut row = vec![String::new(); breaks.len()];
            for cell in line {
                let tol = cell.size;
                let col = breaks.iter().rposition(|b| *b <= cell.x + tol).unwrap_or(0);
                if !row[col].is_empty() {
                    row[col].push(' ');
                }
                row[col].push_str(&cell.text);
            }
            rows.push(row);
        }
        let table = TableModel::new(header.iter().map(|c| c.text.clone()).collect(), rows);
        (!table.is_degenerate()).then_some(table)
    });

    Grid {
        lines: text_lines,
        table,
    }
}
