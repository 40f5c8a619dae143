pub mod align;
pub mod cli;
pub mod error;
pub mod eval;
pub mod signal;
pub mod subtitle;
pub mod synth;

pub use error::{Error, ProviderError, Result};
