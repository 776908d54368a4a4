//! Dense row-major sample matrix.

use crate::error::{Error, Result};

/// `n × d` matrix of real-valued samples stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Wraps a row-major buffer. Rejects shape mismatches and non-finite entries.
    pub fn new(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        if ncols == 0 {
            return Err(Error::Input("data must have at least one column".into()));
        }
        if values.len() != nrows * ncols {
            return Err(Error::Input(format!(
                "buffer of {} values does not fill a {nrows}x{ncols} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at row {}, column {}",
                pos / ncols,
                pos % ncols
            )));
        }
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::Input(format!(
                    "row {i} has {} columns, expected {ncols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), ncols, values)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.ncols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            nrows: indices.len(),
            ncols: self.ncols,
            values,
        }
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.ncols];
        for row in self.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let n = self.nrows.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

#[inline]
pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
