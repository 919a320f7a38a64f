//! Compressed sparse column storage.

use crate::scalar::Real;

/// Matrix in compressed column form. Row indices are strictly increasing
/// within each column.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowval: Vec<usize>,
    pub nzval: Vec<T>,
}

impl<T: Real> CscMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            colptr: vec![0; ncols + 1],
            rowval: Vec::new(),
            nzval: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            colptr: (0..=n).collect(),
            rowval: (0..n).collect(),
            nzval: vec![T::one(); n],
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros kept (they fix the sparsity pattern).
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
            counts[c + 1] += 1;
        }
        for c in 0..ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(r, c, v) in triplets {
            let slot = next[c];
            rows[slot] = r;
            vals[slot] = v;
            next[c] += 1;
        }

        let mut colptr = Vec::with_capacity(ncols + 1);
        let mut rowval = Vec::with_capacity(triplets.len());
        let mut nzval = Vec::with_capacity(triplets.len());
        colptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for c in 0..ncols {
            order.clear();
            order.extend(counts[c]..counts[c + 1]);
            order.sort_by_key(|&k| rows[k]);
            for &k in &order {
                if rowval.len() > colptr[c] && *rowval.last().unwrap() == rows[k] {
                    *nzval.last_mut().unwrap() += vals[k];
                } else {
                    rowval.push(rows[k]);
                    nzval.push(vals[k]);
                }
            }
            colptr.push(rowval.len());
        }
        Self {
            nrows,
            ncols,
            colptr,
            rowval,
            nzval,
        }
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn nnz(&self) -> usize {
        self.rowval.len()
    }

    /// Checks structural invariants; returns a description of the first
    /// violation.
    pub fn check(&self) -> Result<(), String> {
        if self.colptr.len() != self.ncols + 1 || self.colptr[0] != 0 {
            return Err("column pointer array has wrong length or start".into());
        }
        if *self.colptr.last().unwrap() != self.rowval.len() || self.rowval.len() != self.nzval.len() {
            return Err("column pointers disagree with stored entries".into());
        }
        for c in 0..self.ncols {
            if self.colptr[c] > self.colptr[c + 1] {
                return Err(format!("column {c}: decreasing column pointer"));
            }
            let rows = &self.rowval[self.colptr[c]..self.colptr[c + 1]];
            for w in rows.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("column {c}: row indices not strictly increasing"));
                }
            }
            if let Some(&r) = rows.last() {
                if r >= self.nrows {
                    return Err(format!("column {c}: row index {r} out of range"));
                }
            }
        }
        Ok(())
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.ncols).all(|c| self.rowval[self.colptr[c]..self.colptr[c + 1]].iter().all(|&r| r <= c))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.ncols).flat_map(move |c| {
            (self.colptr[c]..self.colptr[c + 1]).map(move |k| (self.rowval[k], c, self.nzval[k]))
        })
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.iter_mut().for_each(|v| *v = T::zero());
        for c in 0..self.ncols {
            let xc = x[c];
            if xc == T::zero() {
                continue;
            }
            for k in self.colptr[c]..self.colptr[c + 1] {
                y[self.rowval[k]] += self.nzval[k] * xc;
            }
        }
    }

    /// `y = Aᵀ x`
    pub fn tmul_vec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for c in 0..self.ncols {
            let mut acc = T::zero();
            for k in self.colptr[c]..self.colptr[c + 1] {
                acc += self.nzval[k] * x[self.rowval[k]];
            }
            y[c] = acc;
        }
    }

    /// `y = P x` where `self` holds the upper triangle of symmetric `P`.
    pub fn sym_upper_mul_vec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(self.nrows, self.ncols);
        y.iter_mut().for_each(|v| *v = T::zero());
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowval[k];
                let v = self.nzval[k];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
    }

    /// Infinity norm of every column.
    pub fn col_norms_inf(&self) -> Vec<T> {
        (0..self.ncols)
            .map(|c| {
                self.nzval[self.colptr[c]..self.colptr[c + 1]]
                    .iter()
                    .fold(T::zero(), |m, v| m.max(v.abs()))
            })
            .collect()
    }

    /// Infinity norm of every row.
    pub fn row_norms_inf(&self) -> Vec<T> {
        let mut norms = vec![T::zero(); self.nrows];
        for (k, &r) in self.rowval.iter().enumerate() {
            norms[r] = norms[r].max(self.nzval[k].abs());
        }
        norms
    }

    /// Column infinity norms of the full symmetric matrix whose upper triangle
    /// is stored.
    pub fn sym_upper_col_norms_inf(&self) -> Vec<T> {
        let mut norms = vec![T::zero(); self.ncols];
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowval[k];
                let a = self.nzval[k].abs();
                norms[c] = norms[c].max(a);
                norms[r] = norms[r].max(a);
            }
        }
        norms
    }

    /// In place `A <- diag(left) A diag(right)`.
    pub fn scale(&mut self, left: &[T], right: &[T]) {
        for c in 0..self.ncols {
            for k in self.colptr[c]..self.colptr[c + 1] {
                self.nzval[k] = self.nzval[k] * left[self.rowval[k]] * right[c];
            }
        }
    }

    pub fn scale_all(&mut self, s: T) {
        self.nzval.iter_mut().for_each(|v| *v *= s);
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            d[r][c] += v;
        }
        d
    }

    /// Keeps only the rows selected by `rows` (in that order).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.nrows];
        for (new, &old) in rows.iter().enumerate() {
            map[old] = new;
        }
        let trip: Vec<_> = self
            .triplets()
            .filter(|&(r, _, _)| map[r] != usize::MAX)
            .map(|(r, c, v)| (map[r], c, v))
            .collect();
        Self::from_triplets(rows.len(), self.ncols, &trip)
    }

    pub fn cast<U: Real>(&self) -> CscMatrix<U> {
        CscMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            colptr: self.colptr.clone(),
            rowval: self.rowval.clone(),
            nzval: self.nzval.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
        }
    }
}
