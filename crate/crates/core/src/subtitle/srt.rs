use super::{check_line, SubtitleDocument, TimedBlock, Timestamp};
use crate::error::{Error, Result};

/// Parses SRT text. Blocks are separated by blank lines; `\r\n` endings and a
/// leading byte-order mark are accepted.
pub fn parse_srt(text: &str) -> Result<SubtitleDocument> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut blocks: Vec<TimedBlock> = Vec::new();
    let mut chunk: Vec<(usize, &str)> = Vec::new();

    let lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            if !chunk.is_empty() {
                let block = parse_block(blocks.len() + 1, &chunk, blocks.last())?;
                blocks.push(block);
                chunk.clear();
            }
        } else {
            chunk.push((i + 1, line));
        }
    }
    if !chunk.is_empty() {
        let block = parse_block(blocks.len() + 1, &chunk, blocks.last())?;
        blocks.push(block);
    }
    SubtitleDocument::new(blocks)
}

fn parse_block(
    ordinal: usize,
    chunk: &[(usize, &str)],
    previous: Option<&TimedBlock>,
) -> Result<TimedBlock> {
    let err = |line: usize, message: String| Error::Srt {
        block: ordinal,
        line,
        message,
    };

    let (index_line, index_text) = chunk[0];
    let index: usize = index_text
        .trim()
        .parse()
        .map_err(|_| err(index_line, format!("expected a block index, found {index_text:?}")))?;
    if index == 0 {
        return Err(err(index_line, "block index must be at least 1".into()));
    }
    if let Some(prev) = previous {
        if index <= prev.index() {
            return Err(err(
                index_line,
                format!("index {index} does not increase after {}", prev.index()),
            ));
        }
    }

    let Some(&(timing_line, timing_text)) = chunk.get(1) else {
        return Err(err(index_line, "missing timing line".into()));
    };
    let (start, end) = parse_timing(timing_text).map_err(|m| err(timing_line, m))?;
    if start >= end {
        return Err(err(
            timing_line,
            format!("start {start} is not before end {end}"),
        ));
    }
    if let Some(prev) = previous {
        if start < prev.end() {
            return Err(err(
                timing_line,
                format!("block overlaps the previous block ending at {}", prev.end()),
            ));
        }
    }

    if chunk.len() < 3 {
        return Err(err(timing_line, "empty block text".into()));
    }
    let mut lines = Vec::with_capacity(chunk.len() - 2);
    for &(n, line) in &chunk[2..] {
        check_line(line).map_err(|m| err(n, m))?;
        lines.push(line.to_string());
    }

    TimedBlock::new(index, start, end, lines).map_err(|e| err(index_line, e.to_string()))
}

fn parse_timing(line: &str) -> std::result::Result<(Timestamp, Timestamp), String> {
    let (a, b) = line
        .trim()
        .split_once(" --> ")
        .ok_or_else(|| format!("malformed timing line {line:?}"))?;
    Ok((parse_timestamp(a.trim())?, parse_timestamp(b.trim())?))
}

fn parse_timestamp(s: &str) -> std::result::Result<Timestamp, String> {
    let bad = || format!("malformed timestamp {s:?}, expected HH:MM:SS,mmm");
    let b = s.as_bytes();
    if b.len() != 12 || b[2] != b':' || b[5] != b':' || b[8] != b',' {
        return Err(bad());
    }
    let field = |r: std::ops::Range<usize>| -> std::result::Result<u64, String> {
        let part = &s[r];
        if !part.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        part.parse().map_err(|_| bad())
    };
    let (h, m, sec, ms) = (field(0..2)?, field(3..5)?, field(6..8)?, field(9..12)?);
    if m >= 60 || sec >= 60 {
        return Err(bad());
    }
    Timestamp::from_ms(((h * 60 + m) * 60 + sec) * 1000 + ms).map_err(|e| e.to_string())
}

/// Canonical SRT: sequential 1-based indices, `\n` endings, one blank line
/// between blocks and a trailing newline.
pub fn write_srt(doc: &SubtitleDocument) -> String {
    let mut out = String::new();
    for (i, block) in doc.blocks().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{}\n{} --> {}\n", i + 1, block.start(), block.end()));
        for line in block.lines() {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}
