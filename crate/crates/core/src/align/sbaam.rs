//! Block-wise attention area maximization.
//!
//! For each block in turn, choose the split frame `j` maximizing the
//! attention mass of the block's tokens over frames `[l, j)` plus the mass of
//! all later tokens over frames `[j + 1, L)`.

use super::{check_attention_shape, ties, AlignOptions};
use crate::error::Result;
use crate::signal::{
    clip_negatives, normalize_over_tokens, prefix_sums, AttentionMatrix, BlockTimings,
};
use crate::subtitle::TaggedTokens;

/// Token-axis standardization followed by clipping negatives to `-eps`.
pub fn sbaam_preprocess(a: &AttentionMatrix, eps: f64) -> Result<AttentionMatrix> {
    clip_negatives(&normalize_over_tokens(a), eps)
}

pub fn sbaam_align(
    a: &AttentionMatrix,
    tokens: &TaggedTokens,
    opts: &AlignOptions,
) -> Result<BlockTimings> {
    check_attention_shape(a, tokens)?;
    let prepared = if opts.preprocess {
        sbaam_preprocess(a, opts.eps)?
    } else {
        a.clone()
    };
    let table = prefix_sums(prepared.values());
    let (rows, frames) = (a.tokens(), a.frames());
    let boundaries = tokens.boundaries();
    let blocks = boundaries.len();

    let (mut n, mut l) = (0usize, 0usize);
    let mut ends = Vec::with_capacity(blocks);
    for (ib, &eob) in boundaries.iter().enumerate() {
        // leave one frame for every later block
        let hi = frames - (blocks - 1 - ib);
        let scores: Vec<f64> = (l + 1..=hi)
            .map(|j| table.sum(n, eob, l, j) + table.sum(eob + 1, rows, j + 1, frames))
            .collect();
        let j = l + 1 + ties::first_max(&scores);
        ends.push(j);
        l = j;
        n = if opts.skip_eob_row { eob + 1 } else { eob };
    }
    BlockTimings::from_ends(&ends, frames, a.frame_map().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtitle::tokens_from_tagged_text;

    fn raw() -> AlignOptions {
        AlignOptions {
            preprocess: false,
            ..AlignOptions::default()
        }
    }

    #[test]
    fn two_token_candidates() {
        // j=1 scores 1 + 0, j=2 scores 1 - 0.01
        let a = AttentionMatrix::from_rows(&[vec![1.0, -0.01], vec![-0.01, 1.0]]).unwrap();
        let tokens = tokens_from_tagged_text("x <eob>").unwrap();
        let t = sbaam_align(&a, &tokens, &raw()).unwrap();
        assert_eq!(t.intervals(), [(0, 1)]);
        // normalizing and clipping reproduces the same matrix
        assert_eq!(sbaam_align(&a, &tokens, &AlignOptions::default()).unwrap(), t);
    }

    #[test]
    fn identity_diagonal_raw() {
        // block 0: j=1 -> 1+2, j=2 -> 1+1, j=3 -> 1+0
        // block 1 (rows 1..3 from frame 1): j=2 -> 1, j=3 -> 2, j=4 -> 2, tie keeps 3
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let a = AttentionMatrix::from_rows(&rows).unwrap();
        let tokens = tokens_from_tagged_text("a <eob> b <eob>").unwrap();
        assert_eq!(sbaam_align(&a, &tokens, &raw()).unwrap().ends(), [1, 3]);
    }

    #[test]
    fn block_diagonal_split_frame_is_excluded() {
        // block 0: j=1 -> 1 + 5.98, j=2 -> 2 + 6, j=3 -> 3 + 4, j=4 -> 2.99 + 2, j=5 -> 2.98 + 0
        // the split frame belongs to neither block, so the true end 3 is reported as 2
        let mut rows = vec![vec![-0.01; 6]; 4];
        for r in 0..2 {
            for c in 0..3 {
                rows[r][c] = 1.0;
                rows[r + 2][c + 3] = 1.0;
            }
        }
        let a = AttentionMatrix::from_rows(&rows).unwrap();
        let tokens = tokens_from_tagged_text("a <eob> b <eob>").unwrap();
        let ends = sbaam_align(&a, &tokens, &raw()).unwrap().ends();
        assert_eq!(ends, [2, 6]);
    }

    #[test]
    fn skip_eob_row_changes_token_span() {
        // block 1 adding frame 4 gains 0.005 from row 2 but loses 0.01 on row 1,
        // which only counts when the previous <eob> row stays in the span
        let rows = vec![
            vec![1.0, 1.0, -0.01, -0.01, -0.01],
            vec![-0.01, -0.01, 5.0, 5.0, -0.01],
            vec![-0.01, -0.01, -0.01, 1.0, 0.005],
            vec![-0.01, -0.01, -0.01, -0.01, -0.01],
        ];
        let a = AttentionMatrix::from_rows(&rows).unwrap();
        let tokens = tokens_from_tagged_text("a <eob> b <eob>").unwrap();
        let plain = sbaam_align(&a, &tokens, &raw()).unwrap().ends();
        let skip = AlignOptions {
            skip_eob_row: true,
            ..raw()
        };
        let skipped = sbaam_align(&a, &tokens, &skip).unwrap().ends();
        assert_eq!(plain, [2, 4]);
        assert_eq!(skipped, [2, 5]);
    }
}
