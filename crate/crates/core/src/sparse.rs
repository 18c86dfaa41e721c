//! Compressed-sparse-column complex matrices.
//!
//! Every structure morphism in the model (copy and group multiplications,
//! swaps, cups, ladder operators on product spaces) has a handful of nonzeros
//! per column, while the spaces they act on grow as `D^3` or `D^4` in the law
//! checks. Dense storage stops being an option well before the sizes the
//! checks need, so morphisms keep their matrices in this format and convert
//! to `nalgebra` only at the edges.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Column-major sparse matrix. Row indices are strictly increasing within a
/// column and explicit zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
}

/// Accumulates one output column at a time, then sorts and merges duplicates.
struct ColumnBuilder {
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<C64>,
    scratch: Vec<(usize, C64)>,
}

impl ColumnBuilder {
    fn new(rows: usize, cols_hint: usize) -> Self {
        let mut col_ptr = Vec::with_capacity(cols_hint + 1);
        col_ptr.push(0);
        Self {
            rows,
            col_ptr,
            row_idx: Vec::new(),
            vals: Vec::new(),
            scratch: Vec::new(),
        }
    }

    #[inline]
    fn push(&mut self, row: usize, val: C64) {
        debug_assert!(row < self.rows);
        self.scratch.push((row, val));
    }

    /// Appends an entry whose row exceeds every row already in this column.
    #[inline]
    fn push_sorted(&mut self, row: usize, val: C64) {
        debug_assert!(self.scratch.is_empty());
        if val != ZERO {
            self.row_idx.push(row);
            self.vals.push(val);
        }
    }

    fn finish_column(&mut self) {
        // Stable sort keeps the summation order of duplicates fixed, so
        // results are reproducible bit for bit.
        self.scratch.sort_by_key(|&(r, _)| r);
        let mut iter = self.scratch.drain(..).peekable();
        while let Some((row, mut val)) = iter.next() {
            while let Some(&(next_row, next_val)) = iter.peek() {
                if next_row != row {
                    break;
                }
                val += next_val;
                iter.next();
            }
            if val != ZERO {
                self.row_idx.push(row);
                self.vals.push(val);
            }
        }
        self.col_ptr.push(self.row_idx.len());
    }

    fn build(self) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: self.col_ptr.len() - 1,
            col_ptr: self.col_ptr,
            row_idx: self.row_idx,
            vals: self.vals,
        }
    }
}

/// Walks two sorted columns in row order, pairing entries on equal rows.
fn merge_columns(
    (ra, va): (&[usize], &[C64]),
    (rb, vb): (&[usize], &[C64]),
    mut f: impl FnMut(usize, Option<C64>, Option<C64>),
) {
    let (mut p, mut q) = (0, 0);
    while p < ra.len() || q < rb.len() {
        match (ra.get(p), rb.get(q)) {
            (Some(&i), Some(&k)) if i == k => {
                f(i, Some(va[p]), Some(vb[q]));
                p += 1;
                q += 1;
            }
            (Some(&i), Some(&k)) if i < k => {
                f(i, Some(va[p]), None);
                p += 1;
            }
            (Some(&i), None) => {
                f(i, Some(va[p]), None);
                p += 1;
            }
            (_, Some(&k)) => {
                f(k, None, Some(vb[q]));
                q += 1;
            }
            (None, None) => unreachable!(),
        }
    }
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal_from(std::iter::repeat_n(ONE, n))
    }

    pub fn diagonal_from(diag: impl IntoIterator<Item = C64>) -> Self {
        let diag: Vec<C64> = diag.into_iter().collect();
        let n = diag.len();
        let mut b = ColumnBuilder::new(n, n);
        for (i, v) in diag.into_iter().enumerate() {
            b.push(i, v);
            b.finish_column();
        }
        b.build()
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut per_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); cols];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            per_col[c].push((r, v));
        }
        Self::from_columns(rows, per_col)
    }

    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, C64)>>) -> Self {
        let mut b = ColumnBuilder::new(rows, columns.len());
        for col in columns {
            for (r, v) in col {
                b.push(r, v);
            }
            b.finish_column();
        }
        b.build()
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut b = ColumnBuilder::new(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != ZERO {
                    b.push(i, v);
                }
            }
            b.finish_column();
        }
        b.build()
    }

    pub fn column_vector(v: &DVector<C64>) -> Self {
        Self::from_dense(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }

    pub fn row_vector(v: &DVector<C64>) -> Self {
        Self::column_vector(v).transpose()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Dense copy of column `j`.
    pub fn column_dense(&self, j: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.rows);
        let (rows, vals) = self.column(j);
        for (&i, &x) in rows.iter().zip(vals) {
            v[i] = x;
        }
        v
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[C64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.vals[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (rows, vals) = self.column(j);
        match rows.binary_search(&i) {
            Ok(k) => vals[k],
            Err(_) => ZERO,
        }
    }

    /// Iterates `(row, col, value)` over stored entries in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.cols).flat_map(move |j| {
            let (rows, vals) = self.column(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {:?} * {:?}",
            self.shape(),
            rhs.shape()
        );
        let mut b = ColumnBuilder::new(self.rows, rhs.cols);
        // Dense scatter accumulator; each entry sums its terms in the order
        // they are produced, so results do not depend on the row order.
        let mut acc = vec![ZERO; self.rows];
        let mut seen = vec![usize::MAX; self.rows];
        let mut touched: Vec<usize> = Vec::new();
        for j in 0..rhs.cols {
            let (ks, bvals) = rhs.column(j);
            for (&k, &bv) in ks.iter().zip(bvals) {
                let (is, avals) = self.column(k);
                for (&i, &av) in is.iter().zip(avals) {
                    if seen[i] != j {
                        seen[i] = j;
                        acc[i] = av * bv;
                        touched.push(i);
                    } else {
                        acc[i] += av * bv;
                    }
                }
            }
            touched.sort_unstable();
            for &i in &touched {
                b.push_sorted(i, acc[i]);
            }
            touched.clear();
            b.finish_column();
        }
        b.build()
    }

    /// Kronecker product with row-major index pairing: `(i, j) -> i * rhs.rows + j`.
    pub fn kron(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut b = ColumnBuilder::new(rows, cols);
        for ja in 0..self.cols {
            let (ra, va) = self.column(ja);
            for jb in 0..rhs.cols {
                let (rb, vb) = rhs.column(jb);
                for (&ia, &xa) in ra.iter().zip(va) {
                    for (&ib, &xb) in rb.iter().zip(vb) {
                        b.push_sorted(ia * rhs.rows + ib, xa * xb);
                    }
                }
                b.finish_column();
            }
        }
        b.build()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut per_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.rows];
        for (i, j, v) in self.triplets() {
            per_col[i].push((j, v));
        }
        Self::from_columns(self.cols, per_col)
    }

    pub fn conj(&self) -> SparseMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> SparseMatrix {
        self.transpose().conj()
    }

    pub fn scale(&self, c: C64) -> SparseMatrix {
        let mut b = ColumnBuilder::new(self.rows, self.cols);
        for j in 0..self.cols {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                b.push(i, v * c);
            }
            b.finish_column();
        }
        b.build()
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: C64, other: &SparseMatrix, beta: C64) -> SparseMatrix {
        assert_eq!(self.shape(), other.shape(), "combine shape mismatch");
        let mut b = ColumnBuilder::new(self.rows, self.cols);
        for j in 0..self.cols {
            merge_columns(self.column(j), other.column(j), |i, x, y| {
                let v = match (x, y) {
                    (Some(x), Some(y)) => alpha * x + beta * y,
                    (Some(x), None) => alpha * x,
                    (None, Some(y)) => beta * y,
                    (None, None) => ZERO,
                };
                b.push_sorted(i, v);
            });
            b.finish_column();
        }
        b.build()
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(ONE, other, ONE)
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.combine(ONE, other, -ONE)
    }

    /// Frobenius inner product `<self, other> = sum conj(self_ij) * other_ij`.
    pub fn inner(&self, other: &SparseMatrix) -> C64 {
        assert_eq!(self.shape(), other.shape(), "inner shape mismatch");
        let mut acc = ZERO;
        for j in 0..self.cols {
            let (ra, va) = self.column(j);
            let (rb, vb) = other.column(j);
            let (mut p, mut q) = (0, 0);
            while p < ra.len() && q < rb.len() {
                match ra[p].cmp(&rb[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        acc += va[p].conj() * vb[q];
                        p += 1;
                        q += 1;
                    }
                }
            }
        }
        acc
    }

    /// Largest entry modulus (0 for the empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        let mut worst: f64 = 0.0;
        for j in 0..self.cols {
            merge_columns(self.column(j), other.column(j), |_, x, y| {
                let d = x.unwrap_or(ZERO) - y.unwrap_or(ZERO);
                worst = worst.max(d.norm());
            });
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i == j)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Applies `factors[0] ⊗ factors[1] ⊗ ...` to every column of `self`
    /// without materializing the Kronecker product.
    pub fn apply_tensor(&self, factors: &[&SparseMatrix]) -> SparseMatrix {
        let in_dims: Vec<usize> = factors.iter().map(|f| f.cols).collect();
        let out_dims: Vec<usize> = factors.iter().map(|f| f.rows).collect();
        let in_total: usize = in_dims.iter().product();
        assert_eq!(
            in_total, self.rows,
            "apply_tensor: factor domains multiply to {in_total}, matrix has {} rows",
            self.rows
        );
        let out_total: usize = out_dims.iter().product();
        let mut b = ColumnBuilder::new(out_total, self.cols);
        let mut digits = vec![0usize; factors.len()];
        // Partial products carried across the factor loop, reused per column.
        let mut partial: Vec<(usize, C64)> = Vec::new();
        let mut next: Vec<(usize, C64)> = Vec::new();
        for j in 0..self.cols {
            let (rows, vals) = self.column(j);
            for (&idx, &v) in rows.iter().zip(vals) {
                let mut rem = idx;
                for (d, &dim) in digits.iter_mut().zip(&in_dims).rev() {
                    *d = rem % dim;
                    rem /= dim;
                }
                partial.clear();
                partial.push((0, v));
                for (f, &digit) in factors.iter().zip(&digits) {
                    let (frows, fvals) = f.column(digit);
                    next.clear();
                    for &(acc_idx, acc_v) in &partial {
                        for (&r, &fv) in frows.iter().zip(fvals) {
                            next.push((acc_idx * f.rows + r, acc_v * fv));
                        }
                    }
                    std::mem::swap(&mut partial, &mut next);
                }
                for &(r, x) in &partial {
                    b.push(r, x);
                }
            }
            b.finish_column();
        }
        b.build()
    }
}
