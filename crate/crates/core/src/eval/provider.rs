//! Sources of text and audio sentence embeddings.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ProviderError};

/// Embeds text and audio slices into a shared vector space.
///
/// Both modalities must return vectors of the same dimension.
pub trait EmbeddingProvider: Send + Sync {
    fn text_embed(&self, text: &str, lang: &str) -> Result<Vec<f64>, ProviderError>;

    fn audio_embed(
        &self,
        audio_ref: &str,
        start_ms: u64,
        end_ms: u64,
        lang: &str,
    ) -> Result<Vec<f64>, ProviderError>;
}

/// Lookup key of an audio slice in an embeddings file.
pub fn audio_key(audio_ref: &str, start_ms: u64, end_ms: u64) -> String {
    format!("{audio_ref}:{start_ms}:{end_ms}")
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EntryKind {
    Text,
    Audio,
}

#[derive(Debug, Deserialize)]
struct Entry {
    kind: EntryKind,
    key: String,
    vector: Vec<f64>,
}

/// Precomputed embeddings loaded from a JSON-lines file.
///
/// Each line is `{"kind":"text"|"audio","key":..,"vector":[..]}`; text keys
/// are the exact block text, audio keys are `audio_ref:start_ms:end_ms`.
#[derive(Debug, Clone, Default)]
pub struct FileProvider {
    text: HashMap<String, Vec<f64>>,
    audio: HashMap<String, Vec<f64>>,
    dim: usize,
}

impl FileProvider {
    pub fn parse(jsonl: &str) -> Result<Self, ProviderError> {
        let mut p = FileProvider::default();
        for (i, line) in jsonl.lines().enumerate() {
            let load = |message: String| ProviderError::Load {
                line: i + 1,
                message,
            };
            if line.trim().is_empty() {
                continue;
            }
            let entry: Entry = serde_json::from_str(line).map_err(|e| load(e.to_string()))?;
            if entry.vector.is_empty() || entry.vector.iter().any(|v| !v.is_finite()) {
                return Err(load("vector must be non-empty and finite".into()));
            }
            if p.dim == 0 {
                p.dim = entry.vector.len();
            } else if entry.vector.len() != p.dim {
                return Err(load(format!(
                    "dimension {} differs from earlier dimension {}",
                    entry.vector.len(),
                    p.dim
                )));
            }
            let table = match entry.kind {
                EntryKind::Text => &mut p.text,
                EntryKind::Audio => &mut p.audio,
            };
            if table.insert(entry.key.clone(), entry.vector).is_some() {
                return Err(load(format!("duplicate key {:?}", entry.key)));
            }
        }
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Loads an embeddings file as a provider.
pub fn file_provider(path: impl AsRef<Path>) -> Result<FileProvider, Error> {
    FileProvider::load(path)
}

impl EmbeddingProvider for FileProvider {
    fn text_embed(&self, text: &str, _lang: &str) -> Result<Vec<f64>, ProviderError> {
        self.text
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
        let key = audio_key(audio_ref, start_ms, end_ms);
        self.audio
            .get(&key)
            .cloned()
            .ok_or(ProviderError::MissingKey(key))
    }
}

/// Request body of the remote embedding service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EmbedRequest {
    Text {
        lang: String,
        text: String,
    },
    Audio {
        lang: String,
        audio_path: String,
        start_ms: u64,
        end_ms: u64,
    },
}

#[derive(Debug, Deserialize)]
struct EmbedResponse {
    vector: Vec<f64>,
}

/// Client for an HTTP embedding service (`POST <base_url>/embed`).
pub struct RemoteProvider {
    client: reqwest::blocking::Client,
    url: String,
    base_url: String,
    retries: usize,
    dim: Mutex<Option<usize>>,
}

impl RemoteProvider {
    /// Transport failures are retried this many times.
    pub const RETRIES: usize = 2;

    pub fn new(base_url: &str, timeout: Duration) -> Result<Self, ProviderError> {
        let base_url = base_url.trim_end_matches('/').to_string();
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Transport {
                url: base_url.clone(),
                message: e.to_string(),
            })?;
        Ok(RemoteProvider {
            client,
            url: format!("{base_url}/embed"),
            base_url,
            retries: Self::RETRIES,
            dim: Mutex::new(None),
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn embed(&self, request: &EmbedRequest) -> Result<Vec<f64>, ProviderError> {
        let mut attempt = 0;
        let response = loop {
            match self.client.post(&self.url).json(request).send() {
                Ok(r) => break r,
                Err(e) if attempt < self.retries => {
                    log::debug!("retrying {} after transport error: {e}", self.url);
                    attempt += 1;
                }
                Err(e) => {
                    return Err(ProviderError::Transport {
                        url: self.url.clone(),
                        message: format!("{e} (after {} attempts)", attempt + 1),
                    })
                }
            }
        };
        let status = response.status();
        if !status.is_success() {
            return Err(ProviderError::Status {
                url: self.url.clone(),
                status: status.as_u16(),
            });
        }
        let protocol = |message: String| ProviderError::Protocol {
            url: self.url.clone(),
            message,
        };
        let body = response.text().map_err(|e| protocol(e.to_string()))?;
        let parsed: EmbedResponse =
            serde_json::from_str(&body).map_err(|e| protocol(e.to_string()))?;
        if parsed.vector.is_empty() || parsed.vector.iter().any(|v| !v.is_finite()) {
            return Err(protocol("vector must be non-empty and finite".into()));
        }
        let mut dim = self.dim.lock().unwrap_or_else(|e| e.into_inner());
        match *dim {
            None => *dim = Some(parsed.vector.len()),
            Some(d) if d != parsed.vector.len() => {
                return Err(protocol(format!(
                    "dimension {} differs from earlier dimension {d}",
                    parsed.vector.len()
                )))
            }
            Some(_) => {}
        }
        Ok(parsed.vector)
    }
}

/// Connects to a remote embedding service.
pub fn remote_provider(base_url: &str, timeout_s: f64) -> Result<RemoteProvider, ProviderError> {
    if !(timeout_s.is_finite() && timeout_s > 0.0) {
        return Err(ProviderError::Other(format!(
            "timeout must be positive, got {timeout_s}"
        )));
    }
    RemoteProvider::new(base_url, Duration::from_secs_f64(timeout_s))
}

impl EmbeddingProvider for RemoteProvider {
    fn text_embed(&self, text: &str, lang: &str) -> Result<Vec<f64>, ProviderError> {
        self.embed(&EmbedRequest::Text {
            lang: lang.to_string(),
            text: text.to_string(),
        })
    }

    fn audio_embed(
        &self,
        audio_ref: &str,
        start_ms: u64,
        end_ms: u64,
        lang: &str,
    ) -> Result<Vec<f64>, ProviderError> {
        self.embed(&EmbedRequest::Audio {
            lang: lang.to_string(),
            audio_path: audio_ref.to_string(),
            start_ms,
            end_ms,
        })
    }
}
