//! Block timestamp estimation from attention matrices or target CTC
//! posteriors.

mod ctc;
mod dtw;
mod sbaam;
pub mod ties;

use std::fmt;
use std::str::FromStr;

pub use ctc::{ctc_forced_align, CtcTrellis, Vocab};
pub use dtw::{dtw_align, dtw_preprocess, DtwTrellis};
pub use sbaam::{sbaam_align, sbaam_preprocess};

use crate::error::{Error, Result};
use crate::signal::{
    AttentionMatrix, BlockTimings, CtcPosterior, DEFAULT_CLIP_EPS, DEFAULT_MEDIAN_WIDTH,
};
use crate::subtitle::{assemble_document, SubtitleDocument, TaggedTokens};

#[derive(Debug, Clone, PartialEq)]
pub struct AlignOptions {
    /// Median filter width for DTW (odd).
    pub median_width: usize,
    /// Clip magnitude for SBAAM.
    pub eps: f64,
    /// Apply the method's normalization/filtering; `false` aligns the matrix as given.
    pub preprocess: bool,
    /// Start each SBAAM block after the previous `<eob>` row instead of on it.
    pub skip_eob_row: bool,
    /// Stretch the final block to the last frame.
    pub extend_last: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            median_width: DEFAULT_MEDIAN_WIDTH,
            eps: DEFAULT_CLIP_EPS,
            preprocess: true,
            skip_eob_row: false,
            extend_last: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dtw,
    Sbaam,
    CtcSeg,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dtw => "dtw",
            Method::Sbaam => "sbaam",
            Method::CtcSeg => "ctcseg",
        }
    }

    pub fn uses_posterior(self) -> bool {
        self == Method::CtcSeg
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtw" => Ok(Method::Dtw),
            "sbaam" => Ok(Method::Sbaam),
            "ctcseg" => Ok(Method::CtcSeg),
            other => Err(Error::Align(format!(
                "unknown method {other:?}, expected dtw, sbaam or ctcseg"
            ))),
        }
    }
}

/// What an aligner consumes.
#[derive(Debug, Clone)]
pub enum AlignInput {
    Attention(AttentionMatrix),
    Posterior {
        posterior: CtcPosterior,
        vocab: Vocab,
    },
}

pub(crate) fn check_attention_shape(a: &AttentionMatrix, tokens: &TaggedTokens) -> Result<()> {
    if a.tokens() != tokens.len() {
        return Err(Error::Align(format!(
            "attention has {} rows but there are {} tokens",
            a.tokens(),
            tokens.len()
        )));
    }
    if a.frames() < tokens.block_count() {
        return Err(Error::Align(format!(
            "{} frames cannot hold {} blocks",
            a.frames(),
            tokens.block_count()
        )));
    }
    Ok(())
}

/// Runs the selected aligner and returns frame intervals.
pub fn align_timings(
    method: Method,
    input: &AlignInput,
    tokens: &TaggedTokens,
    opts: &AlignOptions,
) -> Result<BlockTimings> {
    let timings = match (method, input) {
        (Method::Dtw, AlignInput::Attention(a)) => dtw_align(a, tokens, opts)?,
        (Method::Sbaam, AlignInput::Attention(a)) => sbaam_align(a, tokens, opts)?,
        (Method::CtcSeg, AlignInput::Posterior { posterior, vocab }) => {
            ctc_forced_align(posterior, tokens, vocab)?
        }
        (m, _) => {
            let want = if m.uses_posterior() {
                "a CTC posterior and vocabulary"
            } else {
                "an attention matrix"
            };
            return Err(Error::Align(format!("method {m} needs {want}")));
        }
    };
    Ok(if opts.extend_last {
        timings.extend_last()
    } else {
        timings
    })
}

/// Aligns and assembles a subtitle document.
pub fn align(
    method: Method,
    input: &AlignInput,
    tokens: &TaggedTokens,
    opts: &AlignOptions,
) -> Result<SubtitleDocument> {
    let timings = align_timings(method, input, tokens, opts)?;
    assemble_document(tokens, &timings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtitle::{tokens_from_tagged_text, write_srt};

    #[test]
    fn sbaam_two_token_document() {
        let a = AttentionMatrix::from_rows(&[vec![1.0, -0.01], vec![-0.01, 1.0]]).unwrap();
        let tokens = tokens_from_tagged_text("x <eob>").unwrap();
        let doc = align(
            Method::Sbaam,
            &AlignInput::Attention(a),
            &tokens,
            &AlignOptions::default(),
        )
        .unwrap();
        assert_eq!(write_srt(&doc), "1\n00:00:00,000 --> 00:00:00,040\nx\n");
    }

    #[test]
    fn extend_last_reaches_final_frame() {
        let a = AttentionMatrix::from_rows(&[vec![1.0, -0.01], vec![-0.01, 1.0]]).unwrap();
        let tokens = tokens_from_tagged_text("x <eob>").unwrap();
        let opts = AlignOptions {
            extend_last: true,
            ..AlignOptions::default()
        };
        let t = align_timings(Method::Sbaam, &AlignInput::Attention(a), &tokens, &opts).unwrap();
        assert_eq!(t.intervals(), [(0, 2)]);
    }

    #[test]
    fn method_parsing_and_mismatch() {
        assert_eq!("dtw".parse::<Method>().unwrap(), Method::Dtw);
        assert_eq!("ctcseg".parse::<Method>().unwrap(), Method::CtcSeg);
        assert!("viterbi".parse::<Method>().is_err());
        let a = AttentionMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let tokens = tokens_from_tagged_text("x <eob>").unwrap();
        let r = align(
            Method::CtcSeg,
            &AlignInput::Attention(a),
            &tokens,
            &AlignOptions::default(),
        );
        assert!(r.is_err());
    }
}
