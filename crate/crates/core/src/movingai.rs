//! MovingAI `.map` and `.scen` text formats.
//!
//! Maps are read 4-connected regardless of the `type octile` header.

use thiserror::Error;

use crate::grid::{GridError, GridMap, Position};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: expected `{expected}`, found {found:?}")]
    Header {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: invalid number {value:?}")]
    Number { line: usize, value: String },
    #[error("row count mismatch: header declares {declared} rows, body has {found}")]
    RowCount { declared: usize, found: usize },
    #[error(
        "line {line}: row width mismatch: header declares {declared} columns, row has {found}"
    )]
    RowWidth {
        line: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: unknown cell character {ch:?}")]
    UnknownCell {
        line: usize,
        column: usize,
        ch: char,
    },
    #[error("missing `version` line")]
    MissingVersion,
    #[error("line {line}: expected 9 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: coordinate ({col}, {row}) outside {width}x{height} map")]
    OutOfRange {
        line: usize,
        col: usize,
        row: usize,
        width: usize,
        height: usize,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn header_value(
    line_no: usize,
    line: Option<&str>,
    key: &'static str,
) -> Result<usize, ParseError> {
    let line = line.unwrap_or("");
    let value = line
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| ParseError::Header {
            line: line_no,
            expected: key,
            found: line.to_string(),
        })?
        .trim();
    value.parse().map_err(|_| ParseError::Number {
        line: line_no,
        value: value.to_string(),
    })
}

/// Parses a MovingAI `.map` file. `.` and `G` are free; `@`, `O`, `T` and
/// `W` are blocked.
pub fn parse_map(text: &str) -> Result<GridMap, ParseError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));

    let first = lines.next().unwrap_or("");
    if first.trim() != "type octile" {
        return Err(ParseError::Header {
            line: 1,
            expected: "type octile",
            found: first.to_string(),
        });
    }
    let height = header_value(2, lines.next(), "height")?;
    let width = header_value(3, lines.next(), "width")?;
    let map_line = lines.next().unwrap_or("");
    if map_line.trim() != "map" {
        return Err(ParseError::Header {
            line: 4,
            expected: "map",
            found: map_line.to_string(),
        });
    }

    let rows: Vec<&str> = lines.collect();
    // Tolerate trailing blank lines only.
    let body_len = rows
        .iter()
        .rposition(|r| !r.is_empty())
        .map_or(0, |i| i + 1);
    if body_len != height {
        return Err(ParseError::RowCount {
            declared: height,
            found: body_len,
        });
    }

    let mut blocked = Vec::with_capacity(width * height);
    for (r, row) in rows[..body_len].iter().enumerate() {
        let line = r + 5;
        let count = row.chars().count();
        if count != width {
            return Err(ParseError::RowWidth {
                line,
                declared: width,
                found: count,
            });
        }
        for (c, ch) in row.chars().enumerate() {
            blocked.push(match ch {
                '.' | 'G' => false,
                '@' | 'O' | 'T' | 'W' => true,
                other => {
                    return Err(ParseError::UnknownCell {
                        line,
                        column: c + 1,
                        ch: other,
                    })
                }
            });
        }
    }
    Ok(GridMap::new(width, height, blocked)?)
}

/// Renders a grid in MovingAI format using `.` and `@`.
pub fn write_map(map: &GridMap) -> String {
    let mut out = format!(
        "type octile\nheight {}\nwidth {}\nmap\n",
        map.height(),
        map.width()
    );
    for row in map.blocked_cells().chunks(map.width()) {
        out.extend(row.iter().map(|&b| if b { '@' } else { '.' }));
        out.push('\n');
    }
    out
}

/// One agent task from a `.scen` file, converted to `(row, col)` positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub bucket: u32,
    pub map_name: String,
    pub map_width: usize,
    pub map_height: usize,
    pub start: Position,
    pub goal: Position,
    pub optimal_length: f64,
}

/// Parses a MovingAI `.scen` file. Entries are returned in file order.
pub fn parse_scen(text: &str) -> Result<Vec<ScenarioEntry>, ParseError> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    match lines.next() {
        Some((_, l))
            if l.trim()
                .strip_prefix("version")
                .is_some_and(|v| !v.trim().is_empty()) => {}
        _ => return Err(ParseError::MissingVersion),
    }

    let mut entries = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(ParseError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let num = |s: &str| -> Result<usize, ParseError> {
            s.trim().parse().map_err(|_| ParseError::Number {
                line: line_no,
                value: s.to_string(),
            })
        };
        let bucket = num(fields[0])? as u32;
        let width = num(fields[2])?;
        let height = num(fields[3])?;
        let (sc, sr, gc, gr) = (
            num(fields[4])?,
            num(fields[5])?,
            num(fields[6])?,
            num(fields[7])?,
        );
        for (col, row) in [(sc, sr), (gc, gr)] {
            if col >= width || row >= height {
                return Err(ParseError::OutOfRange {
                    line: line_no,
                    col,
                    row,
                    width,
                    height,
                });
            }
        }
        let optimal_length = fields[8].trim().parse().map_err(|_| ParseError::Number {
            line: line_no,
            value: fields[8].to_string(),
        })?;
        entries.push(ScenarioEntry {
            bucket,
            map_name: fields[1].to_string(),
            map_width: width,
            map_height: height,
            start: Position::new(sr, sc),
            goal: Position::new(gr, gc),
            optimal_length,
        });
    }
    Ok(entries)
}
