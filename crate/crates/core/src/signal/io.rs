//! Plain-text matrix files.
//!
//! ```text
//! N L FRAME_MS            attention (tokens x frames)
//! N L frame_times         ... followed by one line of L frame end times
//! L V BLANK FRAME_MS      CTC posterior (frames x vocabulary, log-probs)
//! L V BLANK frame_times
//! ```
//!
//! Data rows follow the header, values separated by tabs.

use std::fmt::Write as _;
use std::path::Path;

use super::{AttentionMatrix, CtcPosterior, FrameTimeMap, Matrix};
use crate::error::{Error, Result};

const FRAME_TIMES: &str = "frame_times";

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Attention(AttentionMatrix),
    Posterior(CtcPosterior),
}

impl MatrixFile {
    pub fn into_attention(self) -> Result<AttentionMatrix> {
        match self {
            MatrixFile::Attention(a) => Ok(a),
            MatrixFile::Posterior(_) => Err(Error::InvalidMatrix(
                "expected an attention matrix, found a CTC posterior".into(),
            )),
        }
    }

    pub fn into_posterior(self) -> Result<CtcPosterior> {
        match self {
            MatrixFile::Posterior(p) => Ok(p),
            MatrixFile::Attention(_) => Err(Error::InvalidMatrix(
                "expected a CTC posterior, found an attention matrix".into(),
            )),
        }
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<MatrixFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, message: String| Error::Matrix { line, message };

    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let count = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| err(1, format!("{what} must be a positive integer, got {s:?}")))
    };

    let (rows, cols, blank, time_field) = match fields.as_slice() {
        [r, c, t] => (count(r, "row count")?, count(c, "column count")?, None, *t),
        [r, c, b, t] => {
            let blank = b
                .parse::<usize>()
                .map_err(|_| err(1, format!("blank index must be an integer, got {b:?}")))?;
            (count(r, "frame count")?, count(c, "vocabulary size")?, Some(blank), *t)
        }
        _ => {
            return Err(err(
                1,
                format!("malformed header {header:?}, expected `N L FRAME_MS` or `L V BLANK FRAME_MS`"),
            ))
        }
    };
    // attention frames are columns, posterior frames are rows
    let frames = if blank.is_some() { rows } else { cols };

    let frame_map = if time_field == FRAME_TIMES {
        let (n, line) = lines
            .next()
            .ok_or_else(|| err(2, "missing frame_times line".into()))?;
        let times = parse_values(line).map_err(|m| err(n, m))?;
        if times.len() != frames {
            return Err(err(
                n,
                format!("{} frame end times for {frames} frames", times.len()),
            ));
        }
        FrameTimeMap::explicit(times).map_err(|e| err(n, e.to_string()))?
    } else {
        let ms: f64 = time_field
            .parse()
            .map_err(|_| err(1, format!("frame duration {time_field:?} is not a number")))?;
        FrameTimeMap::uniform(ms).map_err(|e| err(1, e.to_string()))?
    };

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        seen += 1;
        if seen > rows {
            return Err(err(n, format!("more than the {rows} declared rows")));
        }
        let values = parse_values(line).map_err(|m| err(n, m))?;
        if values.len() != cols {
            return Err(err(n, format!("{} values, expected {cols}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err(n, "non-finite value".into()));
        }
        data.extend(values);
    }
    if seen != rows {
        return Err(err(
            text.lines().count(),
            format!("{seen} rows, expected {rows}"),
        ));
    }

    let values = Matrix::new(rows, cols, data)?;
    Ok(match blank {
        None => MatrixFile::Attention(AttentionMatrix::new(values, frame_map)?),
        Some(b) => MatrixFile::Posterior(CtcPosterior::new(values, b, frame_map)?),
    })
}

fn parse_values(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|v| v.parse::<f64>().map_err(|_| format!("{v:?} is not a number")))
        .collect()
}

fn write_frame_map(out: &mut String, map: &FrameTimeMap) {
    match map {
        FrameTimeMap::Uniform { frame_ms } => writeln!(out, " {frame_ms}").unwrap(),
        FrameTimeMap::Explicit { end_ms } => {
            writeln!(out, " {FRAME_TIMES}").unwrap();
            write_row(out, end_ms);
        }
    }
}

fn write_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push('\t');
        }
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

/// Serializes an attention matrix; values use the shortest round-trip form.
pub fn format_attention(a: &AttentionMatrix) -> String {
    let mut out = format!("{} {}", a.tokens(), a.frames());
    write_frame_map(&mut out, a.frame_map());
    for r in 0..a.tokens() {
        write_row(&mut out, a.values().row(r));
    }
    out
}

pub fn format_posterior(p: &CtcPosterior) -> String {
    let mut out = format!("{} {} {}", p.frames(), p.vocab_size(), p.blank());
    write_frame_map(&mut out, p.frame_map());
    for t in 0..p.frames() {
        write_row(&mut out, p.logprobs().row(t));
    }
    out
}
