use crate::error::{Error, Result};

/// Default encoder frame duration: 10 ms features downsampled by two
/// stride-2 convolutions.
pub const DEFAULT_FRAME_MS: f64 = 40.0;

/// Maps encoder frame indices to time.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameTimeMap {
    Uniform { frame_ms: f64 },
    /// `end_ms[i]` is the end time of frame `i`; frame 0 starts at 0.
    Explicit { end_ms: Vec<f64> },
}

impl Default for FrameTimeMap {
    fn default() -> Self {
        FrameTimeMap::Uniform {
            frame_ms: DEFAULT_FRAME_MS,
        }
    }
}

impl FrameTimeMap {
    pub fn uniform(frame_ms: f64) -> Result<Self> {
        if !(frame_ms.is_finite() && frame_ms > 0.0) {
            return Err(Error::InvalidMatrix(format!(
                "frame duration must be positive, got {frame_ms}"
            )));
        }
        Ok(FrameTimeMap::Uniform { frame_ms })
    }

    pub fn explicit(end_ms: Vec<f64>) -> Result<Self> {
        if end_ms.is_empty() {
            return Err(Error::InvalidMatrix("empty frame time list".into()));
        }
        if end_ms.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidMatrix(
                "frame end times must be finite and non-negative".into(),
            ));
        }
        if end_ms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMatrix(
                "frame end times must be strictly increasing".into(),
            ));
        }
        Ok(FrameTimeMap::Explicit { end_ms })
    }

    /// Checks that the map can describe `frames` frames.
    pub fn check_frames(&self, frames: usize) -> Result<()> {
        match self {
            FrameTimeMap::Explicit { end_ms } if end_ms.len() != frames => {
                Err(Error::InvalidMatrix(format!(
                    "{} frame end times for {frames} frames",
                    end_ms.len()
                )))
            }
            _ => Ok(()),
        }
    }

    /// Time of the boundary before frame `k` (`k == L` is the end of audio).
    pub fn boundary_ms(&self, k: usize) -> f64 {
        match self {
            FrameTimeMap::Uniform { frame_ms } => k as f64 * frame_ms,
            FrameTimeMap::Explicit { end_ms } => {
                if k == 0 {
                    0.0
                } else {
                    end_ms[k - 1]
                }
            }
        }
    }

    /// Boundary time rounded half away from zero to whole milliseconds.
    pub fn boundary_ms_rounded(&self, k: usize) -> u64 {
        self.boundary_ms(k).round() as u64
    }
}

/// Half-open frame intervals, one per subtitle block.
///
/// Intervals are contiguous, start at frame 0, and never exceed the frame
/// count of the matrix they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTimings {
    intervals: Vec<(usize, usize)>,
    frames: usize,
    frame_map: FrameTimeMap,
}

impl BlockTimings {
    pub fn new(
        intervals: Vec<(usize, usize)>,
        frames: usize,
        frame_map: FrameTimeMap,
    ) -> Result<Self> {
        frame_map.check_frames(frames)?;
        let mut expected_start = 0;
        for &(s, e) in &intervals {
            if s != expected_start {
                return Err(Error::Align(format!(
                    "interval [{s},{e}) does not start at frame {expected_start}"
                )));
            }
            if e <= s || e > frames {
                return Err(Error::Align(format!(
                    "interval [{s},{e}) is empty or exceeds {frames} frames"
                )));
            }
            expected_start = e;
        }
        Ok(BlockTimings {
            intervals,
            frames,
            frame_map,
        })
    }

    /// Builds contiguous intervals from exclusive end frames.
    pub fn from_ends(ends: &[usize], frames: usize, frame_map: FrameTimeMap) -> Result<Self> {
        let mut start = 0;
        let intervals = ends
            .iter()
            .map(|&e| {
                let iv = (start, e);
                start = e;
                iv
            })
            .collect();
        Self::new(intervals, frames, frame_map)
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn ends(&self) -> Vec<usize> {
        self.intervals.iter().map(|&(_, e)| e).collect()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame_map(&self) -> &FrameTimeMap {
        &self.frame_map
    }

    /// Stretches the final interval to the last frame.
    pub fn extend_last(mut self) -> Self {
        if let Some(last) = self.intervals.last_mut() {
            last.1 = self.frames;
        }
        self
    }

    /// Millisecond intervals; fails if rounding collapses a block.
    pub fn ms_intervals(&self) -> Result<Vec<(u64, u64)>> {
        self.intervals
            .iter()
            .map(|&(s, e)| {
                let (a, b) = (
                    self.frame_map.boundary_ms_rounded(s),
                    self.frame_map.boundary_ms_rounded(e),
                );
                if a >= b {
                    return Err(Error::Align(format!(
                        "frames [{s},{e}) round to an empty interval of {a} ms"
                    )));
                }
                Ok((a, b))
            })
            .collect()
    }
}
