//! Dense row-major matrices over GF(q).

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, Residue};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FieldMatrix<T: Residue> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Residue> FieldMatrix<T> {
    /// Builds a matrix from row-major data, rejecting unreduced entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<T>, field: &PrimeField<T>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                len: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| !field.is_reduced(e)) {
            return Err(Error::EntryNotReduced {
                value: bad.wide(),
                q: field.modulus().wide(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from nested rows. Rows must have equal length and reduced entries.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R], field: &PrimeField<T>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::LengthMismatch(cols, r.len()));
            }
            entries.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, entries, field)
    }

    /// Like [`from_rows`](Self::from_rows) but reduces every entry mod q first.
    pub fn from_rows_reduced(rows: &[Vec<u128>], field: &PrimeField<T>) -> Result<Self> {
        let reduced: Vec<Vec<T>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.element(v)).collect())
            .collect();
        Self::from_rows(&reduced, field)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = T::one();
        }
        m
    }

    /// Builds a matrix entry by entry. The closure must return reduced values.
    pub(crate) fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// First `count` rows as a new matrix.
    pub fn top_rows(&self, count: usize) -> Self {
        let count = count.min(self.rows);
        Self {
            rows: count,
            cols: self.cols,
            entries: self.entries[..count * self.cols].to_vec(),
        }
    }

    /// Submatrix made of the given 0-based columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.cols,
            });
        }
        Ok(Self::from_fn(self.rows, cols.len(), |r, c| {
            self.get(r, cols[c])
        }))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Product with every entry reduced mod q.
    pub fn mul(&self, other: &Self, field: &PrimeField<T>) -> Result<Self> {
        let raw = self.mul_raw(other)?;
        Ok(Self::from_fn(self.rows, other.cols, |r, c| {
            field.reduce(raw[r][c])
        }))
    }

    /// Unreduced integer product, each entry accumulated in `u128`.
    pub fn mul_raw(&self, other: &Self) -> Result<Vec<Vec<u128>>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                (0..other.cols)
                    .map(|c| {
                        (0..self.cols)
                            .map(|k| self.get(r, k).wide() * other.get(k, c).wide())
                            .sum()
                    })
                    .collect()
            })
            .collect())
    }

    /// Rank over GF(q).
    pub fn rank(&self, field: &PrimeField<T>) -> usize {
        self.row_echelon(field).1.len()
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn row_echelon(&self, field: &PrimeField<T>) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..m.cols {
            if pivot_row == m.rows {
                break;
            }
            let Some(found) = (pivot_row..m.rows).find(|&r| m.get(r, col) != T::zero()) else {
                continue;
            };
            m.swap_rows(found, pivot_row);
            let inv = field.inv(m.get(pivot_row, col)).expect("pivot is nonzero");
            m.scale_row(pivot_row, inv, field);
            for r in 0..m.rows {
                if r != pivot_row {
                    let factor = m.get(r, col);
                    if factor != T::zero() {
                        m.sub_scaled_row(r, pivot_row, factor, field);
                    }
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.entries.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, k: T, field: &PrimeField<T>) {
        for c in 0..self.cols {
            let i = r * self.cols + c;
            self.entries[i] = field.mul(self.entries[i], k);
        }
    }

    // row[target] -= k * row[source]
    fn sub_scaled_row(&mut self, target: usize, source: usize, k: T, field: &PrimeField<T>) {
        for c in 0..self.cols {
            let s = field.mul(self.get(source, c), k);
            let i = target * self.cols + c;
            self.entries[i] = field.sub(self.entries[i], s);
        }
    }
}

impl<T: Residue> Index<(usize, usize)> for FieldMatrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.entries[r * self.cols + c]
    }
}

/// `true` iff the selected 0-based columns of `m` are linearly independent over GF(q).
pub fn columns_linearly_independent<T: Residue>(
    m: &FieldMatrix<T>,
    cols: &[usize],
    field: &PrimeField<T>,
) -> Result<bool> {
    for (i, c) in cols.iter().enumerate() {
        if cols[..i].contains(c) {
            return Err(Error::DuplicateIndex(*c));
        }
    }
    let sub = m.select_columns(cols)?;
    Ok(sub.rank(field) == cols.len())
}

/// Dot product accumulated without intermediate reduction.
pub fn dot_raw<T: Residue>(a: &[T], b: &[T]) -> Result<u128> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.wide() * y.wide()).sum())
}
