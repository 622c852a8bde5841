//! Combinatorial solvers: maximum-weight bipartite assignment for
//! target/detection association and exact cycle-consistent partitioning for
//! target initialization.

mod hungarian;
mod partition;

pub use hungarian::{filter_matches, hungarian_max, Matches};
pub use partition::{partition_cycle_consistent, Partition};

/// Dense row-major score matrix. `f64::NEG_INFINITY` marks forbidden pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AffinityMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        AffinityMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged affinity rows");
        Self::from_fn(rows.len(), cols, |r, c| rows[r][c])
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

    /// Entries that may be matched: finite values only.
    #[inline]
    pub fn allowed(&self, r: usize, c: usize) -> bool {
        self.get(r, c).is_finite()
    }

    pub fn resize(&mut self, rows: usize, cols: usize) {
        self.rows = rows;
        self.cols = cols;
        self.data.clear();
        self.data.resize(rows * cols, 0.0);
    }
}
