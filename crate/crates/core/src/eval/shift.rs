use serde::Serialize;

use crate::error::{Error, Result};
use crate::subtitle::SubtitleDocument;

/// Shifts below this are perceived as instantaneous; offered as an optional
/// filter for edited-timestamp statistics.
pub const PERCEPTION_THRESHOLD_MS: u64 = 120;
pub const DEFAULT_SHIFT_THRESHOLD_MS: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftReport {
    /// `ref.start - hyp.start` per block.
    pub start_shifts_ms: Vec<i64>,
    /// `ref.end - hyp.end` per block.
    pub end_shifts_ms: Vec<i64>,
    pub edited_start_pct: f64,
    pub edited_end_pct: f64,
    pub edited_avg_pct: f64,
    /// Mean of |shift| over edited timestamps; absent when nothing was edited.
    pub mean_abs_shift_ms: Option<f64>,
    /// Population std of |shift| over edited timestamps.
    pub std_abs_shift_ms: Option<f64>,
    pub threshold_ms: u64,
}

/// Compares hypothesis timestamps with a post-edited reference of the same
/// blocks. A timestamp counts as edited when `|shift| > threshold_ms`.
pub fn shift_stats(hyp: &SubtitleDocument, reference: &SubtitleDocument, threshold_ms: u64) -> Result<ShiftReport> {
    if hyp.len() != reference.len() {
        return Err(Error::Eval(format!(
            "hypothesis has {} blocks, reference has {}",
            hyp.len(),
            reference.len()
        )));
    }
    if hyp.is_empty() {
        return Err(Error::Eval("no blocks to compare".into()));
    }
    let diff = |r: u64, h: u64| r as i64 - h as i64;
    let (start_shifts_ms, end_shifts_ms): (Vec<i64>, Vec<i64>) = hyp
        .blocks()
        .iter()
        .zip(reference.blocks())
        .map(|(h, r)| (diff(r.start().ms(), h.start().ms()), diff(r.end().ms(), h.end().ms())))
        .unzip();

    let edited = |s: &i64| s.unsigned_abs() > threshold_ms;
    let n = hyp.len() as f64;
    let edited_start = start_shifts_ms.iter().filter(|s| edited(s)).count();
    let edited_end = end_shifts_ms.iter().filter(|s| edited(s)).count();
    let magnitudes: Vec<f64> = start_shifts_ms
        .iter()
        .chain(&end_shifts_ms)
        .filter(|s| edited(s))
        .map(|s| s.unsigned_abs() as f64)
        .collect();
    let (mean, std) = if magnitudes.is_empty() {
        (None, None)
    } else {
        let m = magnitudes.iter().sum::<f64>() / magnitudes.len() as f64;
        let var = magnitudes.iter().map(|x| (x - m).powi(2)).sum::<f64>() / magnitudes.len() as f64;
        (Some(m), Some(var.sqrt()))
    };

    let edited_start_pct = 100.0 * edited_start as f64 / n;
    let edited_end_pct = 100.0 * edited_end as f64 / n;
    Ok(ShiftReport {
        start_shifts_ms,
        end_shifts_ms,
        edited_start_pct,
        edited_end_pct,
        edited_avg_pct: (edited_start_pct + edited_end_pct) / 2.0,
        mean_abs_shift_ms: mean,
        std_abs_shift_ms: std,
        threshold_ms,
    })
}
