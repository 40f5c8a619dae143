use std::collections::HashMap;

use crate::error::{Error, ProviderError, Result};
use crate::eval::EmbeddingProvider;

/// Embedding provider backed by per-frame "oracle" vectors.
///
/// Audio slices embed to the mean vector of every frame overlapping
/// `[start_ms, end_ms)`; text embeds to a stored vector per block text.
#[derive(Debug, Clone)]
pub struct MockFrameProvider {
    frames: Vec<Vec<f64>>,
    frame_ms: f64,
    texts: HashMap<String, Vec<f64>>,
}

pub fn mock_frame_provider(
    frame_vectors: Vec<Vec<f64>>,
    frame_ms: f64,
    texts: HashMap<String, Vec<f64>>,
) -> Result<MockFrameProvider> {
    let dim = frame_vectors.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(Error::Synth("frame vectors must be non-empty".into()));
    }
    if frame_vectors.iter().chain(texts.values()).any(|v| v.len() != dim) {
        return Err(Error::Synth(format!("all vectors must have dimension {dim}")));
    }
    if !(frame_ms.is_finite() && frame_ms > 0.0) {
        return Err(Error::Synth(format!("frame length must be positive, got {frame_ms}")));
    }
    Ok(MockFrameProvider {
        frames: frame_vectors,
        frame_ms,
        texts,
    })
}

impl EmbeddingProvider for MockFrameProvider {
    fn text_embed(&self, text: &str, _lang: &str) -> Result<Vec<f64>, ProviderError> {
        self.texts
            .get(text)
            .cloned()
            .ok_or_else(|| ProviderError::MissingKey(text.to_string()))
    }

    fn audio_embed(
        &self,
        audio_ref: &str,
        start_ms: u64,
        end_ms: u64,
        _lang: &str,
    ) -> Result<Vec<f64>, ProviderError> {
        let (s, e) = (start_ms as f64, end_ms as f64);
        let overlapping: Vec<&Vec<f64>> = self
            .frames
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let (fs, fe) = (*k as f64 * self.frame_ms, (*k + 1) as f64 * self.frame_ms);
                fs < e && fe > s
            })
            .map(|(_, v)| v)
            .collect();
        if overlapping.is_empty() {
            return Err(ProviderError::Other(format!(
                "{audio_ref}: no frames in [{start_ms}, {end_ms}) ms"
            )));
        }
        let mut mean = vec![0.0; self.frames[0].len()];
        for v in &overlapping {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += x;
            }
        }
        let k = overlapping.len() as f64;
        Ok(mean.into_iter().map(|m| m / k).collect())
    }
}
