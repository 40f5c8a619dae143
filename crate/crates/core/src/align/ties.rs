//! Deterministic arg-min / arg-max with a relative tie tolerance.
//!
//! Scores that differ only by accumulated rounding count as ties and resolve
//! to the earliest candidate, so results do not depend on summation order.

pub const TIE_TOLERANCE: f64 = 1e-9;

#[inline]
pub fn slack(best: f64) -> f64 {
    TIE_TOLERANCE * best.abs().max(1.0)
}

/// First index whose score is within tolerance of the minimum.
/// Non-finite scores are never selected unless all are.
pub fn first_min(scores: &[f64]) -> usize {
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return 0;
    }
    scores
        .iter()
        .position(|&s| s <= best + slack(best))
        .unwrap_or(0)
}

/// First index whose score is within tolerance of the maximum.
pub fn first_max(scores: &[f64]) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return 0;
    }
    scores
        .iter()
        .position(|&s| s >= best - slack(best))
        .unwrap_or(0)
}
