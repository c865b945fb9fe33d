use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse vector with strictly ascending indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec<T> {
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> SparseVec<T> {
    /// Build from unsorted (index, value) pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, T)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut out = SparseVec {
            indices: Vec::with_capacity(pairs.len()),
            values: Vec::with_capacity(pairs.len()),
        };
        for (i, v) in pairs {
            if out.indices.last() == Some(&i) {
                *out.values.last_mut().unwrap() += v;
            } else {
                out.indices.push(i);
                out.values.push(v);
            }
        }
        let (indices, values) = out
            .indices
            .into_iter()
            .zip(out.values)
            .filter(|(_, v)| *v != T::zero())
            .unzip();
        SparseVec { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<T> {
        let mut out = vec![T::zero(); dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rows<T> {
    Sparse(Vec<SparseVec<T>>),
    Dense(Vec<Vec<T>>),
}

/// Row-major feature matrix, sparse or dense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix<T> {
    n_cols: usize,
    rows: Rows<T>,
}

#[derive(Debug, Clone, Copy)]
pub enum Row<'a, T> {
    Sparse(&'a SparseVec<T>),
    Dense(&'a [T]),
}

impl<'a, T: Scalar> Row<'a, T> {
    /// Non-zero entries in ascending column order.
    pub fn iter(self) -> Box<dyn Iterator<Item = (usize, T)> + 'a> {
        match self {
            Row::Sparse(s) => Box::new(s.iter()),
            Row::Dense(d) => Box::new(d.iter().copied().enumerate().filter(|(_, v)| *v != T::zero())),
        }
    }

    pub fn dot(self, weights: &[T]) -> T {
        match self {
            Row::Sparse(s) => s.iter().map(|(i, v)| v * weights[i]).sum(),
            Row::Dense(d) => d.iter().zip(weights).map(|(a, b)| *a * *b).sum(),
        }
    }

    pub fn norm(self) -> T {
        match self {
            Row::Sparse(s) => s.values.iter().map(|v| *v * *v).sum::<T>().sqrt(),
            Row::Dense(d) => d.iter().map(|v| *v * *v).sum::<T>().sqrt(),
        }
    }

    pub fn to_dense(self, dim: usize) -> Vec<T> {
        match self {
            Row::Sparse(s) => s.to_dense(dim),
            Row::Dense(d) => d.to_vec(),
        }
    }
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn sparse(n_cols: usize, rows: Vec<SparseVec<T>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("row {r}: indices not ascending")));
            }
            if row.indices.last().is_some_and(|&i| i >= n_cols) {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: row.indices.last().unwrap() + 1,
                });
            }
            check_finite(r, row.values.iter())?;
        }
        Ok(FeatureMatrix {
            n_cols,
            rows: Rows::Sparse(rows),
        })
    }

    pub fn dense(n_cols: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            check_finite(r, row.iter())?;
        }
        Ok(FeatureMatrix {
            n_cols,
            rows: Rows::Dense(rows),
        })
    }

    /// Dense matrix from literal rows; the width is taken from the first row.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        Self::dense(n_cols, rows)
    }

    pub fn n_rows(&self) -> usize {
        match &self.rows {
            Rows::Sparse(r) => r.len(),
            Rows::Dense(r) => r.len(),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    pub fn row(&self, i: usize) -> Row<'_, T> {
        match &self.rows {
            Rows::Sparse(r) => Row::Sparse(&r[i]),
            Rows::Dense(r) => Row::Dense(&r[i]),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_, T>> {
        (0..self.n_rows()).map(|i| self.row(i))
    }

    /// Subset of rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let rows = match &self.rows {
            Rows::Sparse(r) => Rows::Sparse(indices.iter().map(|&i| r[i].clone()).collect()),
            Rows::Dense(r) => Rows::Dense(indices.iter().map(|&i| r[i].clone()).collect()),
        };
        FeatureMatrix {
            n_cols: self.n_cols,
            rows,
        }
    }

    /// Column-wise non-zeros: for each column, (row, value) with ascending row.
    pub fn columns(&self) -> Vec<Vec<(usize, T)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows().enumerate() {
            for (c, v) in row.iter() {
                cols[c].push((r, v));
            }
        }
        cols
    }
}

fn check_finite<'a, T: Scalar>(row: usize, values: impl Iterator<Item = &'a T>) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("row {row}: non-finite feature value")));
        }
    }
    Ok(())
}
