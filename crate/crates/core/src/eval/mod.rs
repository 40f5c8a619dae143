//! Subtitle timing and quality metrics.

mod conformity;
mod kappa;
mod provider;
mod shift;
mod subsonar;

pub use conformity::{
    block_conformity, char_count, conformity, BlockConformity, ConformityReport, DEFAULT_CPL,
    DEFAULT_CPS,
};
pub use kappa::{cohen_kappa, kappa_report, KappaReport};
pub use provider::{
    audio_key, file_provider, remote_provider, EmbedRequest, EmbeddingProvider, FileProvider,
    RemoteProvider,
};
pub use shift::{shift_stats, ShiftReport, DEFAULT_SHIFT_THRESHOLD_MS, PERCEPTION_THRESHOLD_MS};
pub use subsonar::{block_similarities, cosine, subsonar_score};
