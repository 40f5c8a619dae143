use super::FrameTimeMap;
use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value at row {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::InvalidMatrix(format!(
                "row {bad} has {} values, expected {cols}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Cross-attention weights: one row per target token, one column per
/// encoder frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    values: Matrix,
    frame_map: FrameTimeMap,
}

impl AttentionMatrix {
    pub fn new(values: Matrix, frame_map: FrameTimeMap) -> Result<Self> {
        frame_map.check_frames(values.cols())?;
        Ok(AttentionMatrix { values, frame_map })
    }

    /// Uniform 40 ms frames.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, FrameTimeMap::default())
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn frame_map(&self) -> &FrameTimeMap {
        &self.frame_map
    }

    /// Token count.
    pub fn tokens(&self) -> usize {
        self.values.rows()
    }

    /// Frame count.
    pub fn frames(&self) -> usize {
        self.values.cols()
    }

    pub fn with_values(&self, values: Matrix) -> Self {
        debug_assert_eq!(values.cols(), self.frames());
        AttentionMatrix {
            values,
            frame_map: self.frame_map.clone(),
        }
    }

    pub fn with_frame_map(self, frame_map: FrameTimeMap) -> Result<Self> {
        Self::new(self.values, frame_map)
    }
}

/// Per-frame CTC log-probabilities over a vocabulary that includes blank.
#[derive(Debug, Clone, PartialEq)]
pub struct CtcPosterior {
    logprobs: Matrix,
    blank: usize,
    frame_map: FrameTimeMap,
}

impl CtcPosterior {
    /// Tolerance on per-frame probability mass.
    pub const MASS_TOLERANCE: f64 = 1e-3;

    pub fn new(logprobs: Matrix, blank: usize, frame_map: FrameTimeMap) -> Result<Self> {
        if blank >= logprobs.cols() {
            return Err(Error::InvalidMatrix(format!(
                "blank index {blank} outside vocabulary of {}",
                logprobs.cols()
            )));
        }
        frame_map.check_frames(logprobs.rows())?;
        for t in 0..logprobs.rows() {
            let mass: f64 = logprobs.row(t).iter().map(|lp| lp.exp()).sum();
            if (mass - 1.0).abs() > Self::MASS_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "frame {t} probabilities sum to {mass}"
                )));
            }
        }
        Ok(CtcPosterior {
            logprobs,
            blank,
            frame_map,
        })
    }

    pub fn logprobs(&self) -> &Matrix {
        &self.logprobs
    }

    pub fn blank(&self) -> usize {
        self.blank
    }

    pub fn frame_map(&self) -> &FrameTimeMap {
        &self.frame_map
    }

    pub fn frames(&self) -> usize {
        self.logprobs.rows()
    }

    pub fn vocab_size(&self) -> usize {
        self.logprobs.cols()
    }

    pub fn with_frame_map(self, frame_map: FrameTimeMap) -> Result<Self> {
        frame_map.check_frames(self.frames())?;
        Ok(CtcPosterior { frame_map, ..self })
    }
}
