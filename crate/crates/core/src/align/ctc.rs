//! Viterbi forced alignment of the subtitle tokens (markers included) against
//! target-side CTC posteriors.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{BlockTimings, CtcPosterior};
use crate::subtitle::TaggedTokens;

/// Token to label-id map of a CTC output layer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    ids: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, token: impl Into<String>, id: usize) -> Option<usize> {
        self.ids.insert(token.into(), id)
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Parses `label_id<TAB>token` lines. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vocab = Vocab::new();
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| Error::Vocab {
                line: i + 1,
                message,
            };
            if line.trim().is_empty() {
                continue;
            }
            let (id, token) = line
                .split_once('\t')
                .ok_or_else(|| err("expected `label_id<TAB>token`".into()))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| err(format!("label id {id:?} is not an integer")))?;
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(err(format!("invalid token {token:?}")));
            }
            if vocab.insert(token, id).is_some() {
                return Err(err(format!("token {token:?} listed twice")));
            }
        }
        Ok(vocab)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Expanded CTC topology for a label sequence: blank, l0, blank, l1, ..., blank.
#[derive(Debug, Clone)]
pub struct CtcTrellis {
    labels: Vec<usize>,
    blank: usize,
    frames: usize,
    score: Vec<f64>,
    // 0 = stay, 1 = from previous state, 2 = skip over a blank
    back: Vec<u8>,
}

impl CtcTrellis {
    fn states(&self) -> usize {
        2 * self.labels.len() + 1
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn blank(&self) -> usize {
        self.blank
    }

    /// Minimum number of frames any alignment of `labels` needs.
    pub fn required_frames(labels: &[usize]) -> usize {
        labels.len() + labels.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn new(posterior: &CtcPosterior, labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Align("empty label sequence".into()));
        }
        let frames = posterior.frames();
        let required = Self::required_frames(&labels);
        if required > frames {
            return Err(Error::Infeasible {
                labels: labels.len(),
                required,
                frames,
            });
        }
        let lp = posterior.logprobs();
        let blank = posterior.blank();
        let states = 2 * labels.len() + 1;
        let label_of = |s: usize| if s.is_multiple_of(2) { blank } else { labels[s / 2] };
        let mut score = vec![f64::NEG_INFINITY; frames * states];
        let mut back = vec![0u8; frames * states];

        score[0] = lp.get(0, blank);
        score[1] = lp.get(0, labels[0]);
        for f in 1..frames {
            let (prev, cur) = score.split_at_mut(f * states);
            let prev = &prev[(f - 1) * states..];
            for (s, slot) in cur[..states].iter_mut().enumerate() {
                // stay first, so equal scores keep the current state
                let mut best = prev[s];
                let mut step = 0u8;
                if s >= 1 && prev[s - 1] > best {
                    best = prev[s - 1];
                    step = 1;
                }
                let can_skip = s >= 2 && s % 2 == 1 && labels[s / 2] != labels[s / 2 - 1];
                if can_skip && prev[s - 2] > best {
                    best = prev[s - 2];
                    step = 2;
                }
                *slot = best + lp.get(f, label_of(s));
                back[f * states + s] = step;
            }
        }
        Ok(CtcTrellis {
            labels,
            blank,
            frames,
            score,
            back,
        })
    }

    /// Best path as one state per frame.
    pub fn best_path(&self) -> Result<Vec<usize>> {
        let states = self.states();
        let last = (self.frames - 1) * states;
        let (end_blank, end_label) = (self.score[last + states - 1], self.score[last + states - 2]);
        let mut s = if end_blank >= end_label {
            states - 1
        } else {
            states - 2
        };
        if !self.score[last + s].is_finite() {
            return Err(Error::Infeasible {
                labels: self.labels.len(),
                required: Self::required_frames(&self.labels),
                frames: self.frames,
            });
        }
        let mut path = vec![0; self.frames];
        for f in (0..self.frames).rev() {
            path[f] = s;
            s -= self.back[f * states + s] as usize;
        }
        Ok(path)
    }

    pub fn best_score(&self) -> f64 {
        let states = self.states();
        let last = (self.frames - 1) * states;
        self.score[last + states - 1].max(self.score[last + states - 2])
    }
}

/// First frame at which the path enters each label's state.
pub(crate) fn label_entry_frames(path: &[usize], labels: usize) -> Vec<usize> {
    let mut entries = vec![usize::MAX; labels];
    for (f, &s) in path.iter().enumerate() {
        if s % 2 == 1 && entries[s / 2] == usize::MAX {
            entries[s / 2] = f;
        }
    }
    entries
}

fn label_ids(posterior: &CtcPosterior, tokens: &TaggedTokens, vocab: &Vocab) -> Result<Vec<usize>> {
    tokens
        .tokens()
        .iter()
        .map(|tok| {
            let id = vocab
                .get(tok.as_str())
                .ok_or_else(|| Error::Align(format!("token {:?} is not in the vocabulary", tok.as_str())))?;
            if id == posterior.blank() {
                return Err(Error::Align(format!(
                    "token {:?} maps to the blank label {id}",
                    tok.as_str()
                )));
            }
            if id >= posterior.vocab_size() {
                return Err(Error::Align(format!(
                    "label {id} for {:?} outside vocabulary of {}",
                    tok.as_str(),
                    posterior.vocab_size()
                )));
            }
            Ok(id)
        })
        .collect()
}

pub fn ctc_forced_align(
    posterior: &CtcPosterior,
    tokens: &TaggedTokens,
    vocab: &Vocab,
) -> Result<BlockTimings> {
    let labels = label_ids(posterior, tokens, vocab)?;
    let n_labels = labels.len();
    let trellis = CtcTrellis::new(posterior, labels)?;
    let path = trellis.best_path()?;
    let entries = label_entry_frames(&path, n_labels);
    let frames = posterior.frames();
    let ends: Vec<usize> = tokens
        .boundaries()
        .iter()
        .map(|&b| (entries[b] + 1).min(frames))
        .collect();
    BlockTimings::from_ends(&ends, frames, posterior.frame_map().clone())
}
