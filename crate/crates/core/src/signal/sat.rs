use super::Matrix;

/// Summed-area table over a matrix, answering half-open rectangle sums in
/// constant time.
#[derive(Debug, Clone)]
pub struct SummedAreaTable {
    cols: usize,
    // (rows + 1) x (cols + 1), first row and column zero
    table: Vec<f64>,
}

impl SummedAreaTable {
    pub fn new(m: &Matrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let stride = cols + 1;
        let mut table = vec![0.0; (rows + 1) * stride];
        for r in 0..rows {
            let mut run = 0.0;
            for c in 0..cols {
                run += m.get(r, c);
                table[(r + 1) * stride + c + 1] = table[r * stride + c + 1] + run;
            }
        }
        SummedAreaTable { cols, table }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.table[r * (self.cols + 1) + c]
    }

    /// Sum over rows `r0..r1` and columns `c0..c1`; empty ranges sum to 0.
    pub fn sum(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        if r0 >= r1 || c0 >= c1 {
            return 0.0;
        }
        self.at(r1, c1) - self.at(r0, c1) - self.at(r1, c0) + self.at(r0, c0)
    }
}

/// Builds the summed-area table of a matrix.
pub fn prefix_sums(m: &Matrix) -> SummedAreaTable {
    SummedAreaTable::new(m)
}
