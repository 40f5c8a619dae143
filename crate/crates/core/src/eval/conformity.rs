use serde::Serialize;

use crate::error::{Error, Result};
use crate::subtitle::{SubtitleDocument, TimedBlock};

/// Maximum characters per line (TED guidelines).
pub const DEFAULT_CPL: usize = 42;
/// Maximum characters per second (TED guidelines).
pub const DEFAULT_CPS: f64 = 21.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockConformity {
    pub index: usize,
    pub max_line_chars: usize,
    pub cps: f64,
    pub cpl_ok: bool,
    pub cps_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformityReport {
    pub cpl_conform_pct: f64,
    pub cps_conform_pct: f64,
    pub cpl_limit: usize,
    pub cps_limit: f64,
    pub blocks: Vec<BlockConformity>,
}

/// Characters as Unicode scalar values, spaces and punctuation included.
pub fn char_count(s: &str) -> usize {
    s.chars().count()
}

pub fn block_conformity(block: &TimedBlock, cpl_limit: usize, cps_limit: f64) -> BlockConformity {
    let max_line_chars = block.lines().iter().map(|l| char_count(l)).max().unwrap_or(0);
    let cps = char_count(&block.text()) as f64 / (block.duration_ms() as f64 / 1000.0);
    BlockConformity {
        index: block.index(),
        max_line_chars,
        cps,
        cpl_ok: max_line_chars <= cpl_limit,
        cps_ok: cps <= cps_limit,
    }
}

/// Share of blocks within the characters-per-line and characters-per-second
/// limits; both limits are inclusive.
pub fn conformity(doc: &SubtitleDocument, cpl_limit: usize, cps_limit: f64) -> Result<ConformityReport> {
    if doc.is_empty() {
        return Err(Error::Eval("cannot assess an empty document".into()));
    }
    if !(cps_limit.is_finite() && cps_limit > 0.0) {
        return Err(Error::Eval(format!("CPS limit must be positive, got {cps_limit}")));
    }
    let blocks: Vec<_> = doc
        .blocks()
        .iter()
        .map(|b| block_conformity(b, cpl_limit, cps_limit))
        .collect();
    let pct = |n: usize| 100.0 * n as f64 / blocks.len() as f64;
    Ok(ConformityReport {
        cpl_conform_pct: pct(blocks.iter().filter(|b| b.cpl_ok).count()),
        cps_conform_pct: pct(blocks.iter().filter(|b| b.cps_ok).count()),
        cpl_limit,
        cps_limit,
        blocks,
    })
}
