//! Subtitle data model: timestamps, timed blocks and documents.
//!
//! A [`SubtitleDocument`] is always valid once constructed: blocks are time
//! ordered, non-overlapping and carry non-empty text.

mod srt;
mod tagged;

use std::fmt;

pub use srt::{parse_srt, write_srt};
pub use tagged::{assemble_document, tokens_from_tagged_text, TaggedTokens, Token, EOB, EOL};

use crate::error::{Error, Result};

/// Millisecond timestamp within the SRT range `00:00:00,000..=99:59:59,999`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(u64);

impl Timestamp {
    pub const MAX_MS: u64 = 99 * 3_600_000 + 59 * 60_000 + 59 * 1000 + 999;

    pub fn from_ms(ms: u64) -> Result<Self> {
        if ms > Self::MAX_MS {
            return Err(Error::Document(format!(
                "timestamp {ms} ms exceeds the SRT range"
            )));
        }
        Ok(Timestamp(ms))
    }

    pub fn ms(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = self.0 % 1000;
        let secs = self.0 / 1000;
        write!(
            f,
            "{:02}:{:02}:{:02},{:03}",
            secs / 3600,
            (secs / 60) % 60,
            secs % 60,
            ms
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedBlock {
    index: usize,
    start: Timestamp,
    end: Timestamp,
    lines: Vec<String>,
}

impl TimedBlock {
    pub fn new(index: usize, start: Timestamp, end: Timestamp, lines: Vec<String>) -> Result<Self> {
        if index == 0 {
            return Err(Error::Document("block indices are 1-based".into()));
        }
        if start >= end {
            return Err(Error::Document(format!(
                "block {index}: start {start} is not before end {end}"
            )));
        }
        if lines.is_empty() {
            return Err(Error::Document(format!("block {index} has no text")));
        }
        for line in &lines {
            check_line(line).map_err(|m| Error::Document(format!("block {index}: {m}")))?;
        }
        Ok(TimedBlock {
            index,
            start,
            end,
            lines,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    /// Duration in milliseconds, always positive.
    pub fn duration_ms(&self) -> u64 {
        self.end.0 - self.start.0
    }

    /// Block text with its lines joined by a single space.
    pub fn text(&self) -> String {
        self.lines.join(" ")
    }
}

pub(crate) fn check_line(line: &str) -> std::result::Result<(), String> {
    if line.trim().is_empty() {
        return Err("empty text line".into());
    }
    if line.contains('\n') || line.contains('\r') {
        return Err("text line contains a line break".into());
    }
    if line.contains(EOL) || line.contains(EOB) {
        return Err(format!("text line contains a {EOL} or {EOB} marker"));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubtitleDocument {
    blocks: Vec<TimedBlock>,
}

impl SubtitleDocument {
    pub fn new(blocks: Vec<TimedBlock>) -> Result<Self> {
        for pair in blocks.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.index >= b.index {
                return Err(Error::Document(format!(
                    "block index {} does not increase after {}",
                    b.index, a.index
                )));
            }
            if a.end > b.start {
                return Err(Error::Document(format!(
                    "block {} overlaps block {}",
                    a.index, b.index
                )));
            }
        }
        Ok(SubtitleDocument { blocks })
    }

    pub fn blocks(&self) -> &[TimedBlock] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Same text with every timestamp moved by `offset_ms`, clamped at zero.
    ///
    /// Blocks that collapse to zero duration at the origin are dropped.
    pub fn shifted(&self, offset_ms: i64) -> Result<Self> {
        let shift = |t: Timestamp| -> Result<Timestamp> {
            Timestamp::from_ms((t.0 as i64 + offset_ms).max(0) as u64)
        };
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let (start, end) = (shift(b.start)?, shift(b.end)?);
            if start < end {
                blocks.push(TimedBlock {
                    start,
                    end,
                    ..b.clone()
                });
            }
        }
        SubtitleDocument::new(blocks)
    }
}
