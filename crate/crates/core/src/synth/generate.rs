use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::align::Vocab;
use crate::error::{Error, Result};
use crate::signal::{AttentionMatrix, BlockTimings, CtcPosterior, FrameTimeMap, Matrix};
use crate::subtitle::{TaggedTokens, Token};

/// Peak probability of generated posteriors.
const PEAK: f64 = 0.9;

/// Ground truth of a synthetic block-diagonal alignment; serialized as
/// `spec.json` next to generated fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticAlignment {
    pub tokens: usize,
    pub frames: usize,
    pub boundaries: Vec<usize>,
    /// Exclusive end frame of every block.
    pub ends: Vec<usize>,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticAlignment {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Synth(m));
        if self.boundaries.is_empty() {
            return fail("at least one block is required".into());
        }
        if self.boundaries.len() != self.ends.len() {
            return fail(format!(
                "{} boundaries but {} block ends",
                self.boundaries.len(),
                self.ends.len()
            ));
        }
        if self.tokens == 0 || self.boundaries.last() != Some(&(self.tokens - 1)) {
            return fail("the last token must close the last block".into());
        }
        let mut prev = None;
        for &b in &self.boundaries {
            // every block needs a word before its <eob>
            if b == prev.map_or(0, |p| p + 1) {
                return fail(format!("block ending at token {b} has no words"));
            }
            prev = Some(b);
        }
        let mut start = 0;
        for &e in &self.ends {
            if e <= start {
                return fail(format!("block ends {:?} are not strictly increasing from 1", self.ends));
            }
            start = e;
        }
        if start > self.frames {
            return fail(format!("last block ends at {start}, beyond {} frames", self.frames));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return fail(format!("noise std must be non-negative, got {}", self.noise));
        }
        Ok(())
    }

    /// Random layout of `blocks` blocks with 1-3 words each over `frames`
    /// frames. Blocks get at least `max(1, min(frames / (2 * blocks), 8))`
    /// frames so the median filter does not erase them.
    pub fn random(blocks: usize, frames: usize, noise: f64, seed: u64) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::Synth("at least one block is required".into()));
        }
        if frames < blocks {
            return Err(Error::Synth(format!(
                "{frames} frames cannot hold {blocks} blocks"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut boundaries = Vec::with_capacity(blocks);
        let mut n = 0;
        for _ in 0..blocks {
            n += rng.gen_range(1..=3);
            boundaries.push(n);
            n += 1;
        }

        let min_span = (frames / (2 * blocks)).clamp(1, 8);
        let slack = frames - min_span * blocks;
        let mut cuts: Vec<usize> = (0..blocks - 1).map(|_| rng.gen_range(0..=slack)).collect();
        cuts.sort_unstable();
        let ends = cuts
            .iter()
            .enumerate()
            .map(|(i, c)| c + min_span * (i + 1))
            .chain(std::iter::once(frames))
            .collect();

        let spec = SyntheticAlignment {
            tokens: n,
            frames,
            boundaries,
            ends,
            noise,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Tokens `w0 w1 <eob> w3 ...`, words named after their position.
    pub fn tagged_tokens(&self) -> Result<TaggedTokens> {
        let tokens = (0..self.tokens)
            .map(|i| {
                if self.boundaries.binary_search(&i).is_ok() {
                    Token::Eob
                } else {
                    Token::Word(format!("w{i}"))
                }
            })
            .collect();
        TaggedTokens::new(tokens)
    }

    pub fn true_timings(&self, frame_map: FrameTimeMap) -> Result<BlockTimings> {
        BlockTimings::from_ends(&self.ends, self.frames, frame_map)
    }

    /// Token rows `[first, last]` of block `i`, its `<eob>` row included.
    pub fn block_rows(&self, i: usize) -> (usize, usize) {
        let first = if i == 0 { 0 } else { self.boundaries[i - 1] + 1 };
        (first, self.boundaries[i])
    }
}

/// Block-diagonal attention: 1.0 on each block's rows over its true frame
/// span, 0 elsewhere, plus seeded Gaussian noise.
pub fn gen_block_diag(spec: &SyntheticAlignment) -> Result<(AttentionMatrix, TaggedTokens)> {
    spec.validate()?;
    let tokens = spec.tagged_tokens()?;
    let mut values = vec![0.0; spec.tokens * spec.frames];
    let mut start = 0;
    for (i, &end) in spec.ends.iter().enumerate() {
        let (r0, r1) = spec.block_rows(i);
        for r in r0..=r1 {
            for c in start..end {
                values[r * spec.frames + c] = 1.0;
            }
        }
        start = end;
    }
    if spec.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        // separate stream from the layout draws in `random`
        rng.set_stream(1);
        let normal = Normal::new(0.0, spec.noise).map_err(|e| Error::Synth(e.to_string()))?;
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    let matrix = Matrix::new(spec.tokens, spec.frames, values)?;
    Ok((AttentionMatrix::new(matrix, FrameTimeMap::default())?, tokens))
}

fn label_ids(tokens: &TaggedTokens, vocab: &Vocab) -> Result<Vec<usize>> {
    tokens
        .tokens()
        .iter()
        .map(|t| {
            vocab
                .get(t.as_str())
                .ok_or_else(|| Error::Synth(format!("token {:?} is not in the vocabulary", t.as_str())))
        })
        .collect()
}

/// Posterior putting 0.9 on each token's label at its emission frame and 0.9
/// on blank everywhere else; the remaining mass is spread evenly.
pub fn gen_peaky_posterior(
    tokens: &TaggedTokens,
    emission_frames: &[usize],
    vocab: &Vocab,
    blank: usize,
    frames: usize,
) -> Result<CtcPosterior> {
    let labels = label_ids(tokens, vocab)?;
    if emission_frames.len() != labels.len() {
        return Err(Error::Synth(format!(
            "{} emission frames for {} tokens",
            emission_frames.len(),
            labels.len()
        )));
    }
    for (i, w) in emission_frames.windows(2).enumerate() {
        // a repeated label needs a blank frame in between to be emitted twice
        let gap = if labels[i] == labels[i + 1] { 2 } else { 1 };
        if w[1] < w[0] + gap {
            return Err(Error::Synth(format!(
                "emission frames {} and {} collide",
                w[0], w[1]
            )));
        }
    }
    if emission_frames.last().is_some_and(|&f| f >= frames) {
        return Err(Error::Synth(format!("emission frames exceed {frames} frames")));
    }
    if labels.contains(&blank) {
        return Err(Error::Synth(format!("a token maps to the blank label {blank}")));
    }
    let vocab_size = labels.iter().copied().max().unwrap_or(0).max(blank) + 1;
    let rest = (1.0 - PEAK) / (vocab_size - 1) as f64;
    let mut values = vec![rest.ln(); frames * vocab_size];
    let mut next = emission_frames.iter().zip(&labels).peekable();
    for f in 0..frames {
        let label = match next.peek() {
            Some(&(&e, &label)) if e == f => {
                next.next();
                label
            }
            _ => blank,
        };
        values[f * vocab_size + label] = PEAK.ln();
    }
    CtcPosterior::new(Matrix::new(frames, vocab_size, values)?, blank, FrameTimeMap::default())
}

/// Random emission frames for a label sequence, feasible for
/// [`gen_peaky_posterior`].
pub fn random_emissions(labels: &[usize], frames: usize, seed: u64) -> Result<Vec<usize>> {
    let gaps: Vec<usize> = labels
        .windows(2)
        .map(|w| if w[0] == w[1] { 2 } else { 1 })
        .collect();
    let required = 1 + gaps.iter().sum::<usize>();
    if labels.is_empty() || required > frames {
        return Err(Error::Synth(format!(
            "{} labels need {required} frames, only {frames} available",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slack = frames - required;
    let mut extra: Vec<usize> = (0..labels.len()).map(|_| rng.gen_range(0..=slack)).collect();
    extra.sort_unstable();
    let mut base = 0;
    Ok(extra
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if i > 0 {
                base += gaps[i - 1];
            }
            base + x
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{sbaam_align, AlignOptions};
    use crate::subtitle::tokens_from_tagged_text;

    fn two_blocks() -> SyntheticAlignment {
        SyntheticAlignment {
            tokens: 4,
            frames: 6,
            boundaries: vec![1, 3],
            ends: vec![3, 6],
            noise: 0.0,
            seed: 7,
        }
    }

    #[test]
    fn exact_block_diagonal() {
        let (a, tokens) = gen_block_diag(&two_blocks()).unwrap();
        assert_eq!(tokens.to_tagged_text(), "w0 <eob> w2 <eob>");
        let expected = [
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
            [0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        ];
        assert_eq!(a.values().to_rows(), expected.map(|r| r.to_vec()));
    }

    #[test]
    fn sbaam_on_noiseless_fixture() {
        // the split frame belongs to neither block, so block 0 reports end 2
        let (a, tokens) = gen_block_diag(&two_blocks()).unwrap();
        let t = sbaam_align(&a, &tokens, &AlignOptions::default()).unwrap();
        assert_eq!(t.ends(), [2, 6]);
    }

    #[test]
    fn deterministic_for_seed() {
        let spec = SyntheticAlignment::random(5, 100, 0.05, 11).unwrap();
        assert_eq!(spec, SyntheticAlignment::random(5, 100, 0.05, 11).unwrap());
        assert_eq!(gen_block_diag(&spec).unwrap().0, gen_block_diag(&spec).unwrap().0);
        let other = SyntheticAlignment { seed: 12, ..spec.clone() };
        assert_ne!(gen_block_diag(&spec).unwrap().0, gen_block_diag(&other).unwrap().0);
    }

    #[test]
    fn random_layouts_are_valid() {
        for seed in 0..300 {
            let blocks = 1 + seed as usize % 6;
            let frames = blocks + seed as usize % 50;
            let spec = SyntheticAlignment::random(blocks, frames, 0.0, seed).unwrap();
            assert_eq!(spec.ends.len(), blocks);
            assert_eq!(*spec.ends.last().unwrap(), frames);
            assert!(spec.tagged_tokens().is_ok());
        }
        assert!(SyntheticAlignment::random(3, 2, 0.0, 0).is_err());
        assert!(SyntheticAlignment::random(0, 2, 0.0, 0).is_err());
    }

    #[test]
    fn invalid_specs() {
        let bad_ends = SyntheticAlignment { ends: vec![3, 3], ..two_blocks() };
        assert!(gen_block_diag(&bad_ends).is_err());
        let too_long = SyntheticAlignment { ends: vec![3, 7], ..two_blocks() };
        assert!(gen_block_diag(&too_long).is_err());
        let empty_block = SyntheticAlignment { boundaries: vec![1, 2], tokens: 3, ..two_blocks() };
        assert!(gen_block_diag(&empty_block).is_err());
        let negative = SyntheticAlignment { noise: -1.0, ..two_blocks() };
        assert!(gen_block_diag(&negative).is_err());
    }

    fn vocab() -> Vocab {
        Vocab::parse("0\t<blank>\n1\ta\n2\t<eob>\n").unwrap()
    }

    #[test]
    fn peaky_posterior_construction() {
        let tokens = tokens_from_tagged_text("a <eob>").unwrap();
        let p = gen_peaky_posterior(&tokens, &[0, 1], &vocab(), 0, 3).unwrap();
        let rows = p.logprobs().to_rows();
        assert!((rows[0][1] - 0.9f64.ln()).abs() < 1e-12);
        assert!((rows[1][2] - 0.9f64.ln()).abs() < 1e-12);
        assert!((rows[2][0] - 0.9f64.ln()).abs() < 1e-12);
        for r in rows {
            let mass: f64 = r.iter().map(|v| v.exp()).sum();
            assert!((mass - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn peaky_posterior_errors() {
        let tokens = tokens_from_tagged_text("a <eob>").unwrap();
        assert!(gen_peaky_posterior(&tokens, &[1, 1], &vocab(), 0, 3).is_err());
        assert!(gen_peaky_posterior(&tokens, &[0, 3], &vocab(), 0, 3).is_err());
        assert!(gen_peaky_posterior(&tokens, &[0], &vocab(), 0, 3).is_err());
        let repeated = tokens_from_tagged_text("a a <eob>").unwrap();
        assert!(gen_peaky_posterior(&repeated, &[0, 1, 3], &vocab(), 0, 4).is_err());
        assert!(gen_peaky_posterior(&repeated, &[0, 2, 3], &vocab(), 0, 4).is_ok());
    }

    #[test]
    fn random_emissions_respect_gaps() {
        for seed in 0..100 {
            let labels = [1, 1, 2, 1, 2];
            let frames = random_emissions(&labels, 8, seed).unwrap();
            assert!(frames[1] >= frames[0] + 2);
            assert!(frames.windows(2).all(|w| w[0] < w[1]));
            assert!(*frames.last().unwrap() < 8);
        }
        assert!(random_emissions(&[1, 1], 2, 0).is_err());
    }
}
