use crate::align::ties::TIE_TOLERANCE;
use crate::error::{Error, Result};
use crate::signal::{AttentionMatrix, BlockTimings};
use crate::subtitle::TaggedTokens;

pub const ORACLE_MAX_TOKENS: usize = 6;
pub const ORACLE_MAX_FRAMES: usize = 8;

fn within(score: f64, best: f64) -> bool {
    (score - best).abs() <= TIE_TOLERANCE * best.abs().max(1.0)
}

struct Path {
    cells: Vec<(usize, usize)>,
    cost: f64,
}

/// All monotone paths from (0,0) to the last cell where `<eob>` rows are
/// entered diagonally and never extended (the first may sit in column 0).
fn enumerate(a: &AttentionMatrix, eob: &[bool], first_eob: usize) -> Vec<Path> {
    let (rows, cols) = (a.tokens(), a.frames());
    let mut out = Vec::new();
    let mut stack = vec![Path {
        cells: vec![(0, 0)],
        cost: -a.values().get(0, 0),
    }];
    while let Some(p) = stack.pop() {
        let (n, l) = *p.cells.last().unwrap();
        if (n, l) == (rows - 1, cols - 1) {
            out.push(p);
            continue;
        }
        let mut next = Vec::new();
        if n + 1 < rows && l + 1 < cols {
            next.push((n + 1, l + 1));
        }
        if n + 1 < rows && (!eob[n + 1] || (n + 1 == first_eob && l == 0)) {
            next.push((n + 1, l));
        }
        if l + 1 < cols && !eob[n] {
            next.push((n, l + 1));
        }
        for cell in next {
            let mut cells = p.cells.clone();
            cells.push(cell);
            stack.push(Path {
                cost: p.cost - a.values().get(cell.0, cell.1),
                cells,
            });
        }
    }
    out
}

/// Exhaustive constrained DTW. Among minimum-cost paths, ties are settled
/// walking back from the last cell, preferring a diagonal predecessor, then
/// the previous token, then the previous frame.
pub fn oracle_dtw(a: &AttentionMatrix, tokens: &TaggedTokens) -> Result<BlockTimings> {
    let (rows, cols) = (a.tokens(), a.frames());
    if rows > ORACLE_MAX_TOKENS || cols > ORACLE_MAX_FRAMES {
        return Err(Error::Synth(format!(
            "oracle is limited to {ORACLE_MAX_TOKENS}x{ORACLE_MAX_FRAMES}, got {rows}x{cols}"
        )));
    }
    if rows != tokens.len() {
        return Err(Error::Synth(format!("{rows} rows for {} tokens", tokens.len())));
    }
    let boundaries = tokens.boundaries();
    let mut eob = vec![false; rows];
    for &b in boundaries {
        eob[b] = true;
    }
    let mut candidates = enumerate(a, &eob, boundaries[0]);
    if candidates.is_empty() {
        return Err(Error::Synth("no admissible path".into()));
    }

    // fix the path one step at a time from the end
    let mut back = 1;
    loop {
        if candidates.iter().all(|p| p.cells.len() <= back) {
            break;
        }
        let (n, l) = candidates[0].cells[candidates[0].cells.len() - back];
        let preds = [(n.wrapping_sub(1), l.wrapping_sub(1)), (n.wrapping_sub(1), l), (n, l.wrapping_sub(1))];
        let best = candidates.iter().map(|p| p.cost).fold(f64::INFINITY, f64::min);
        let pred_of = |p: &Path| {
            let k = p.cells.len();
            if k > back {
                Some(p.cells[k - back - 1])
            } else {
                None
            }
        };
        let chosen = preds
            .iter()
            .find(|&&pred| {
                candidates
                    .iter()
                    .any(|p| pred_of(p) == Some(pred) && within(p.cost, best))
            })
            .copied();
        match chosen {
            Some(pred) => candidates.retain(|p| pred_of(p) == Some(pred)),
            None => break,
        }
        back += 1;
    }
    let path = &candidates[0].cells;
    let ends: Vec<usize> = boundaries
        .iter()
        .map(|&b| path.iter().find(|(n, _)| *n == b).map(|&(_, l)| l + 1).unwrap())
        .collect();
    BlockTimings::from_ends(&ends, cols, a.frame_map().clone())
}

fn area(a: &AttentionMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> f64 {
    let mut s = 0.0;
    for r in rows {
        for c in cols.clone() {
            s += a.values().get(r, c);
        }
    }
    s
}

/// Greedy area maximization with every area summed cell by cell.
pub fn oracle_sbaam(a: &AttentionMatrix, tokens: &TaggedTokens) -> Result<BlockTimings> {
    oracle_sbaam_with(a, tokens, false)
}

pub fn oracle_sbaam_with(
    a: &AttentionMatrix,
    tokens: &TaggedTokens,
    skip_eob_row: bool,
) -> Result<BlockTimings> {
    let (rows, cols) = (a.tokens(), a.frames());
    let boundaries = tokens.boundaries();
    if rows != tokens.len() || cols < boundaries.len() {
        return Err(Error::Synth(format!(
            "{rows}x{cols} matrix cannot align {} tokens in {} blocks",
            tokens.len(),
            boundaries.len()
        )));
    }
    let mut ends = Vec::new();
    let (mut n, mut l) = (0, 0);
    for (ib, &b) in boundaries.iter().enumerate() {
        let last = cols - (boundaries.len() - 1 - ib);
        let mut scored = Vec::new();
        for j in l + 1..=last {
            let s = area(a, n..b, l..j) + area(a, b + 1..rows, (j + 1).min(cols)..cols);
            scored.push((j, s));
        }
        let best = scored.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
        let (j, _) = *scored.iter().find(|&&(_, s)| within(s, best)).unwrap();
        ends.push(j);
        l = j;
        n = if skip_eob_row { b + 1 } else { b };
    }
    BlockTimings::from_ends(&ends, cols, a.frame_map().clone())
}
