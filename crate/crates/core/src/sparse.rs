//! Compressed sparse row storage for the assembled blocks and the coupled
//! system.

use std::ops::{AddAssign, Mul};

use num_complex::Complex64;

/// Minimal scalar interface shared by real and complex entries.
pub trait Scalar: Copy + Default + PartialEq + AddAssign + Mul<Output = Self> + Send + Sync {
    fn abs(self) -> f64;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn abs(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Build from `(row, col, value)` triplets; duplicates are summed in
    /// input order, so the result does not depend on how the triplets were
    /// produced as long as their order is fixed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for i in order {
            let (r, c, v) = triplets[i];
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => T::default(),
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        self.iter().collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = *v * s;
        }
        out
    }

    pub fn to_complex(&self) -> CsrMatrix<Complex64> {
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| v.to_complex()).collect(),
        }
    }

    pub fn mul_vec<V>(&self, x: &[V]) -> Vec<V>
    where
        V: Copy + Default + AddAssign + Mul<T, Output = V>,
    {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| {
                let mut acc = V::default();
                for (c, v) in self.row(r) {
                    acc += x[c] * v;
                }
                acc
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Same sparsity pattern as the transpose.
    pub fn is_structurally_symmetric(&self) -> bool {
        self.nrows == self.ncols
            && self.iter().all(|(r, c, _)| {
                let span = self.row_ptr[c]..self.row_ptr[c + 1];
                self.col_idx[span].binary_search(&r).is_ok()
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 2.0]), vec![1.0, 3.0]);
        let t = m.transpose();
        assert_eq!(t.get(2, 1), 1.5);
        assert!(!m.is_structurally_symmetric());
    }
}
