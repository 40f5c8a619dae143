use std::fmt;

use super::{SubtitleDocument, TimedBlock, Timestamp};
use crate::error::{Error, Result};
use crate::signal::BlockTimings;

/// End-of-line marker.
pub const EOL: &str = "<eol>";
/// End-of-block marker.
pub const EOB: &str = "<eob>";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Word(String),
    Eol,
    Eob,
}

impl Token {
    pub fn is_marker(&self) -> bool {
        !matches!(self, Token::Word(_))
    }

    pub fn as_str(&self) -> &str {
        match self {
            Token::Word(w) => w,
            Token::Eol => EOL,
            Token::Eob => EOB,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Target-side token sequence with line and block markers.
///
/// Every block is closed by an [`Token::Eob`] and contains at least one word;
/// `boundaries` holds the positions of the `<eob>` tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedTokens {
    tokens: Vec<Token>,
    boundaries: Vec<usize>,
}

impl TaggedTokens {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Tagged("empty token sequence".into()));
        }
        if tokens.last() != Some(&Token::Eob) {
            return Err(Error::Tagged(format!("sequence does not end with {EOB}")));
        }
        let mut boundaries = Vec::new();
        let mut block_words = 0usize;
        let mut prev_marker = true;
        for (i, tok) in tokens.iter().enumerate() {
            match tok {
                Token::Word(w) => {
                    if w.is_empty() || w.chars().any(char::is_whitespace) {
                        return Err(Error::Tagged(format!(
                            "token {i} is empty or contains whitespace"
                        )));
                    }
                    block_words += 1;
                    prev_marker = false;
                }
                marker => {
                    if block_words == 0 {
                        return Err(Error::Tagged(format!(
                            "block {} has no word before {marker} at position {i}",
                            boundaries.len() + 1
                        )));
                    }
                    if prev_marker {
                        return Err(Error::Tagged(format!(
                            "consecutive markers at position {i}"
                        )));
                    }
                    prev_marker = true;
                    if *marker == Token::Eob {
                        boundaries.push(i);
                        block_words = 0;
                    }
                }
            }
        }
        Ok(TaggedTokens { tokens, boundaries })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Positions of the `<eob>` tokens, strictly increasing.
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.boundaries.len()
    }

    /// Text lines of block `i`, words joined by single spaces.
    pub fn block_lines(&self, i: usize) -> Vec<String> {
        let start = if i == 0 { 0 } else { self.boundaries[i - 1] + 1 };
        let span = &self.tokens[start..self.boundaries[i]];
        span.split(|t| *t == Token::Eol)
            .map(|line| {
                line.iter()
                    .map(Token::as_str)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect()
    }

    /// Whitespace-joined token sequence with markers reinserted.
    pub fn to_tagged_text(&self) -> String {
        self.tokens
            .iter()
            .map(Token::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Tokenizes marker-tagged subtitle text on whitespace.
///
/// A missing final `<eob>` is appended with a warning.
pub fn tokens_from_tagged_text(text: &str) -> Result<TaggedTokens> {
    let mut tokens: Vec<Token> = text
        .split_whitespace()
        .map(|t| match t {
            EOL => Token::Eol,
            EOB => Token::Eob,
            w => Token::Word(w.to_string()),
        })
        .collect();
    if tokens.is_empty() {
        return Err(Error::Tagged("empty input".into()));
    }
    if tokens.last() != Some(&Token::Eob) {
        log::warn!("tagged text does not end with {EOB}; appending one");
        tokens.push(Token::Eob);
    }
    TaggedTokens::new(tokens)
}

/// Joins block texts with their timings into a subtitle document.
pub fn assemble_document(tokens: &TaggedTokens, timings: &BlockTimings) -> Result<SubtitleDocument> {
    if timings.len() != tokens.block_count() {
        return Err(Error::Align(format!(
            "{} timings for {} blocks",
            timings.len(),
            tokens.block_count()
        )));
    }
    let blocks = timings
        .ms_intervals()?
        .into_iter()
        .enumerate()
        .map(|(i, (start, end))| {
            TimedBlock::new(
                i + 1,
                Timestamp::from_ms(start)?,
                Timestamp::from_ms(end)?,
                tokens.block_lines(i),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    SubtitleDocument::new(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::FrameTimeMap;
    use crate::subtitle::{parse_srt, write_srt};
    use proptest::prelude::*;

    #[test]
    fn single_block() {
        let t = tokens_from_tagged_text("Hello world <eob>").unwrap();
        assert_eq!(
            t.tokens(),
            [Token::Word("Hello".into()), Token::Word("world".into()), Token::Eob]
        );
        assert_eq!(t.boundaries(), [2]);
    }

    #[test]
    fn boundary_positions() {
        let t = tokens_from_tagged_text("a <eol> b <eob> c <eob>").unwrap();
        assert_eq!(t.boundaries(), [3, 5]);
        assert_eq!(t.block_lines(0), ["a", "b"]);
        assert_eq!(t.block_lines(1), ["c"]);
    }

    #[test]
    fn malformed_sequences() {
        assert!(tokens_from_tagged_text("a <eob> <eob>").is_err());
        assert!(tokens_from_tagged_text("").is_err());
        assert!(tokens_from_tagged_text("  \n ").is_err());
        assert!(tokens_from_tagged_text("a <eol> <eob>").is_err());
        assert!(tokens_from_tagged_text("<eol> a <eob>").is_err());
        assert!(tokens_from_tagged_text("<eob>").is_err());
    }

    #[test]
    fn missing_final_marker_is_appended() {
        let t = tokens_from_tagged_text("a <eob> b c").unwrap();
        assert_eq!(t.boundaries(), [1, 4]);
        assert_eq!(t.to_tagged_text(), "a <eob> b c <eob>");
    }

    #[test]
    fn assemble_single_block() {
        let t = tokens_from_tagged_text("Hi <eob>").unwrap();
        let timings = BlockTimings::from_ends(&[25], 25, FrameTimeMap::default()).unwrap();
        let doc = assemble_document(&t, &timings).unwrap();
        assert_eq!(write_srt(&doc), "1\n00:00:00,000 --> 00:00:01,000\nHi\n");
    }

    #[test]
    fn assemble_contiguous_and_lines() {
        let t = tokens_from_tagged_text("a <eol> b <eob> c d <eob>").unwrap();
        let timings = BlockTimings::from_ends(&[1, 3], 3, FrameTimeMap::default()).unwrap();
        let doc = assemble_document(&t, &timings).unwrap();
        let b = doc.blocks();
        assert_eq!(b[0].lines(), ["a", "b"]);
        assert_eq!(b[1].lines(), ["c d"]);
        assert_eq!(b[0].end(), b[1].start());
    }

    #[test]
    fn assemble_length_mismatch() {
        let t = tokens_from_tagged_text("a <eob> b <eob>").unwrap();
        let timings = BlockTimings::from_ends(&[1], 3, FrameTimeMap::default()).unwrap();
        assert!(assemble_document(&t, &timings).is_err());
    }

    fn arb_tagged() -> impl Strategy<Value = String> {
        let line = prop::collection::vec("[a-zA-Z0-9äé,.!?'-]{1,8}", 1..4).prop_map(|w| w.join(" "));
        let block = prop::collection::vec(line, 1..3).prop_map(|l| l.join(" <eol> "));
        prop::collection::vec(block, 1..6).prop_map(|b| {
            b.into_iter().map(|x| format!("{x} <eob>")).collect::<Vec<_>>().join(" ")
        })
    }

    proptest! {
        #[test]
        fn tagged_text_reassembles(text in arb_tagged()) {
            let t = tokens_from_tagged_text(&text).unwrap();
            prop_assert_eq!(t.to_tagged_text(), text);
        }

        #[test]
        fn assembled_documents_are_valid(text in arb_tagged(), widths in prop::collection::vec(1usize..30, 6)) {
            let t = tokens_from_tagged_text(&text).unwrap();
            let mut end = 0;
            let ends: Vec<usize> = widths[..t.block_count()].iter().map(|w| { end += w; end }).collect();
            let timings = BlockTimings::from_ends(&ends, end, FrameTimeMap::default()).unwrap();
            let doc = assemble_document(&t, &timings).unwrap();
            prop_assert_eq!(doc.len(), t.block_count());
            let srt = write_srt(&doc);
            prop_assert_eq!(parse_srt(&srt).unwrap(), doc);
        }
    }
}
