//! Attention-based DTW with forced diagonal moves on `<eob>` rows.

use super::{check_attention_shape, ties, AlignOptions};
use crate::error::{Error, Result};
use crate::signal::{
    median_filter_rows, normalize_over_tokens, AttentionMatrix, BlockTimings, Matrix,
};
use crate::subtitle::TaggedTokens;

/// Accumulated-cost matrix over token rows and frame columns.
///
/// Costs are the negated attention. A cell on an `<eob>` row can only be
/// reached diagonally, so every block boundary consumes a frame; the first
/// `<eob>` row may sit in column 0, where its predecessor is the cell above.
#[derive(Debug, Clone)]
pub struct DtwTrellis {
    rows: usize,
    cols: usize,
    cost: Vec<f64>,
    eob_row: Vec<bool>,
}

impl DtwTrellis {
    pub fn new(attention: &Matrix, boundaries: &[usize]) -> Self {
        let (rows, cols) = (attention.rows(), attention.cols());
        let mut eob_row = vec![false; rows];
        for &b in boundaries {
            eob_row[b] = true;
        }
        let first_eob = boundaries.first().copied();
        let mut cost = vec![f64::INFINITY; rows * cols];
        let at = |n: usize, l: usize| n * cols + l;

        for n in 0..rows {
            for l in 0..cols {
                let local = -attention.get(n, l);
                let best_prev = if n == 0 && l == 0 {
                    0.0
                } else if eob_row[n] {
                    if l >= 1 {
                        cost[at(n - 1, l - 1)]
                    } else if Some(n) == first_eob {
                        cost[at(n - 1, 0)]
                    } else {
                        f64::INFINITY
                    }
                } else {
                    let mut m = f64::INFINITY;
                    if n >= 1 && l >= 1 {
                        m = m.min(cost[at(n - 1, l - 1)]);
                    }
                    if n >= 1 {
                        m = m.min(cost[at(n - 1, l)]);
                    }
                    if l >= 1 {
                        m = m.min(cost[at(n, l - 1)]);
                    }
                    m
                };
                cost[at(n, l)] = local + best_prev;
            }
        }
        DtwTrellis {
            rows,
            cols,
            cost,
            eob_row,
        }
    }

    pub fn cost(&self, n: usize, l: usize) -> f64 {
        self.cost[n * self.cols + l]
    }

    /// Accumulated cost of the best constrained path ending at the last cell.
    pub fn total_cost(&self) -> f64 {
        self.cost(self.rows - 1, self.cols - 1)
    }

    /// Walks back from the last cell and returns the path, last cell first.
    pub fn backtrack(&self) -> Result<Vec<(usize, usize)>> {
        if !self.total_cost().is_finite() {
            return Err(Error::Align("no admissible DTW path".into()));
        }
        let (mut n, mut l) = (self.rows - 1, self.cols - 1);
        let mut path = vec![(n, l)];
        while (n, l) != (0, 0) {
            (n, l) = if self.eob_row[n] {
                (n - 1, l.saturating_sub(1))
            } else {
                // preference order: diagonal, previous token, previous frame
                let mut moves = Vec::with_capacity(3);
                if n >= 1 && l >= 1 {
                    moves.push((n - 1, l - 1));
                }
                if n >= 1 {
                    moves.push((n - 1, l));
                }
                if l >= 1 {
                    moves.push((n, l - 1));
                }
                let scores: Vec<f64> = moves.iter().map(|&(i, j)| self.cost(i, j)).collect();
                moves[ties::first_min(&scores)]
            };
            path.push((n, l));
        }
        Ok(path)
    }
}

/// Block timings from a backtracked path: the frame each `<eob>` row occupies
/// is the last frame of its block.
pub(crate) fn timings_from_path(
    path: &[(usize, usize)],
    boundaries: &[usize],
    frames: usize,
) -> Vec<usize> {
    let mut ends: Vec<usize> = path
        .iter()
        .rev()
        .filter(|(n, _)| boundaries.binary_search(n).is_ok())
        .map(|&(_, l)| l + 1)
        .collect();
    if let Some(last) = ends.last_mut() {
        *last = (*last).min(frames);
    }
    ends
}

/// Preprocessing used before DTW: token-axis standardization then a row
/// median filter.
pub fn dtw_preprocess(a: &AttentionMatrix, median_width: usize) -> Result<AttentionMatrix> {
    median_filter_rows(&normalize_over_tokens(a), median_width)
}

pub fn dtw_align(
    a: &AttentionMatrix,
    tokens: &TaggedTokens,
    opts: &AlignOptions,
) -> Result<BlockTimings> {
    check_attention_shape(a, tokens)?;
    let prepared = if opts.preprocess {
        dtw_preprocess(a, opts.median_width)?
    } else {
        a.clone()
    };
    let trellis = DtwTrellis::new(prepared.values(), tokens.boundaries());
    let path = trellis.backtrack()?;
    let ends = timings_from_path(&path, tokens.boundaries(), a.frames());
    BlockTimings::from_ends(&ends, a.frames(), a.frame_map().clone())
}
