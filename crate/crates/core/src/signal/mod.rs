//! Matrix containers, their file format, and the kernels shared by the
//! attention aligners.

mod frames;
mod io;
mod kernels;
mod matrix;
mod sat;

pub use frames::{BlockTimings, FrameTimeMap, DEFAULT_FRAME_MS};
pub use io::{format_attention, format_posterior, parse_matrix, read_matrix, MatrixFile};
pub use kernels::{
    clip_negatives, median_filter_rows, normalize_over_tokens, DEFAULT_CLIP_EPS,
    DEFAULT_MEDIAN_WIDTH, STD_FLOOR,
};
pub use matrix::{AttentionMatrix, CtcPosterior, Matrix};
pub use sat::{prefix_sums, SummedAreaTable};
