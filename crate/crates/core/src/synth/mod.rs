//! Seeded synthetic fixtures and brute-force reference aligners.
//!
//! The oracles here share no code with the production aligners; agreement
//! between the two is what the property tests check.

mod generate;
mod mock;
mod oracle;

pub use generate::{gen_block_diag, gen_peaky_posterior, random_emissions, SyntheticAlignment};
pub use mock::{mock_frame_provider, MockFrameProvider};
pub use oracle::{oracle_dtw, oracle_sbaam, oracle_sbaam_with, ORACLE_MAX_FRAMES, ORACLE_MAX_TOKENS};
