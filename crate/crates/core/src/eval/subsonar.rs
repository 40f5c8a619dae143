use super::EmbeddingProvider;
use crate::error::{Error, ProviderError, Result};
use crate::subtitle::SubtitleDocument;

/// Cosine similarity; zero-norm vectors give 0.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Text-vs-audio cosine similarity of every block, in document order.
pub fn block_similarities(
    doc: &SubtitleDocument,
    audio_ref: &str,
    lang: &str,
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<f64>> {
    if doc.is_empty() {
        return Err(Error::Eval("cannot score an empty document".into()));
    }
    doc.blocks()
        .iter()
        .map(|b| {
            let wrap = |source: ProviderError| Error::Block {
                block: b.index(),
                source,
            };
            let text = provider.text_embed(&b.text(), lang).map_err(wrap)?;
            let audio = provider
                .audio_embed(audio_ref, b.start().ms(), b.end().ms(), lang)
                .map_err(wrap)?;
            if text.len() != audio.len() {
                return Err(wrap(ProviderError::Other(format!(
                    "text dimension {} differs from audio dimension {}",
                    text.len(),
                    audio.len()
                ))));
            }
            Ok(cosine(&text, &audio))
        })
        .collect()
}

/// Mean block-level text/audio similarity, in `[-1, 1]`.
pub fn subsonar_score(
    doc: &SubtitleDocument,
    audio_ref: &str,
    lang: &str,
    provider: &dyn EmbeddingProvider,
) -> Result<f64> {
    let sims = block_similarities(doc, audio_ref, lang, provider)?;
    Ok(sims.iter().sum::<f64>() / sims.len() as f64)
}
