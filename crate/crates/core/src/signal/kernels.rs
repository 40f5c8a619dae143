//! Preprocessing applied to attention matrices before alignment.

use super::AttentionMatrix;
use crate::error::{Error, Result};

/// Median filter width used by the attention DTW aligner.
pub const DEFAULT_MEDIAN_WIDTH: usize = 7;
/// Magnitude that negative attention is clipped to before area maximization.
pub const DEFAULT_CLIP_EPS: f64 = 0.01;
/// Columns with a smaller population std are zeroed.
pub const STD_FLOOR: f64 = 1e-9;

/// Standardizes every frame column over the token axis (population std).
pub fn normalize_over_tokens(a: &AttentionMatrix) -> AttentionMatrix {
    let m = a.values();
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = m.clone();
    for c in 0..cols {
        let mean = (0..rows).map(|r| m.get(r, c)).sum::<f64>() / rows as f64;
        let var = (0..rows).map(|r| (m.get(r, c) - mean).powi(2)).sum::<f64>() / rows as f64;
        let std = var.sqrt();
        for r in 0..rows {
            let v = if std < STD_FLOOR {
                0.0
            } else {
                (m.get(r, c) - mean) / std
            };
            out.set(r, c, v);
        }
    }
    a.with_values(out)
}

/// Index into `0..len` under mirror reflection that does not repeat the
/// edge element (`[a b c] -> c b | a b c | b a`).
pub(crate) fn reflect_index(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let k = i.rem_euclid(period);
    if k < len as isize {
        k as usize
    } else {
        (period - k) as usize
    }
}

/// Sliding median along the frame axis of every token row.
pub fn median_filter_rows(a: &AttentionMatrix, width: usize) -> Result<AttentionMatrix> {
    if width == 0 || width.is_multiple_of(2) {
        return Err(Error::InvalidMatrix(format!(
            "median filter width must be odd and positive, got {width}"
        )));
    }
    let m = a.values();
    let len = m.cols();
    let half = (width / 2) as isize;
    let mut out = m.clone();
    let mut window = vec![0.0; width];
    for r in 0..m.rows() {
        let row = m.row(r);
        let dst = out.row_mut(r);
        for (c, slot) in dst.iter_mut().enumerate() {
            for (k, w) in window.iter_mut().enumerate() {
                *w = row[reflect_index(c as isize - half + k as isize, len)];
            }
            let (_, mid, _) = window.select_nth_unstable_by(width / 2, f64::total_cmp);
            *slot = *mid;
        }
    }
    Ok(a.with_values(out))
}

/// Replaces every strictly negative value by `-eps`.
pub fn clip_negatives(a: &AttentionMatrix, eps: f64) -> Result<AttentionMatrix> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidMatrix(format!(
            "clip epsilon must be positive, got {eps}"
        )));
    }
    Ok(a.with_values(a.values().map(|v| if v < 0.0 { -eps } else { v })))
}
