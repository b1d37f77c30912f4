//! Compressed sparse row matrices and the spatial kernels used by the
//! preconditioners.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; column indices are sorted within each row.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (i, j, v) in entries {
            assert!(i < rows && j < cols, "triplet ({i}, {j}) outside {rows}x{cols}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        idx.binary_search(&j).map_or(0.0, |p| val[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            let (idx, val) = self.row(i);
            *yi = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.rows {
            let (idx, val) = self.row(i);
            entries.extend(idx.iter().zip(val).map(|(&j, &v)| (j, i, v)));
        }
        Self::from_triplets(self.cols, self.rows, entries)
    }

    /// `A B` by row-wise accumulation.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut acc = vec![0.0; other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched = Vec::new();
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            touched.clear();
            let (ia, va) = self.row(i);
            for (&k, &a) in ia.iter().zip(va) {
                let (ib, vb) = other.row(k);
                for (&j, &b) in ib.iter().zip(vb) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr[i + 1] = indices.len();
        }
        Self { rows: self.rows, cols: other.cols, indptr, indices, values }
    }

    /// `Pᵀ A P`.
    pub fn galerkin(&self, p: &Self) -> Self {
        p.transpose().matmul(&self.matmul(p))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                row[j] = v;
            }
        }
        d
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                let (idx, val) = self.row(i);
                idx.iter().zip(val).all(|(&j, &v)| (v - self.get(j, i)).abs() <= tol)
            })
    }

    /// One forward then one backward Gauss–Seidel sweep on `A x = b`.
    pub fn symmetric_gauss_seidel(&self, diag: &[f64], b: &[f64], x: &mut [f64]) {
        let sweep = |i: usize, x: &mut [f64]| {
            let (idx, val) = self.row(i);
            let mut s = b[i];
            for (&j, &v) in idx.iter().zip(val) {
                if j != i {
                    s -= v * x[j];
                }
            }
            x[i] = s / diag[i];
        };
        for i in 0..self.rows {
            sweep(i, x);
        }
        for i in (0..self.rows).rev() {
            sweep(i, x);
        }
    }
}

/// Zero-fill incomplete Cholesky factor `L` with `A ≈ L Lᵀ`.
#[derive(Debug, Clone)]
pub struct IncompleteCholesky {
    /// Strictly lower part by rows, then the diagonal.
    lower: CsrMatrix,
    diag: Vec<f64>,
    shift: f64,
}

impl IncompleteCholesky {
    /// Factors `A`, retrying with a growing diagonal shift `A + α diag(A)` if a
    /// pivot is not positive.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let d = a.diagonal();
        if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Singular(format!("nonpositive diagonal {:e} at row {i}", d[i])));
        }
        let mut shift = 0.0;
        for _ in 0..30 {
            if let Some(f) = Self::try_factor(a, &d, shift) {
                if shift > 0.0 {
                    log::debug!("incomplete Cholesky needed shift {shift:e}");
                }
                return Ok(f);
            }
            shift = if shift == 0.0 { 1e-3 } else { 2.0 * shift };
        }
        Err(Error::Breakdown("incomplete Cholesky failed for every shift".into()))
    }

    fn try_factor(a: &CsrMatrix, d: &[f64], shift: f64) -> Option<Self> {
        let n = a.rows();
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            let (idx, val) = a.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                if j < i {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr[i + 1] = indices.len();
        }
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (start, end) = (indptr[i], indptr[i + 1]);
            for p in start..end {
                let k = indices[p];
                // dot of L[i, ..k] and L[k, ..k] over the shared pattern
                let (ks, ke) = (indptr[k], indptr[k + 1]);
                let (mut q, mut r) = (start, ks);
                let mut s = values[p];
                while q < p && r < ke {
                    match indices[q].cmp(&indices[r]) {
                        std::cmp::Ordering::Less => q += 1,
                        std::cmp::Ordering::Greater => r += 1,
                        std::cmp::Ordering::Equal => {
                            s -= values[q] * values[r];
                            q += 1;
                            r += 1;
                        }
                    }
                }
                values[p] = s / diag[k];
            }
            let pivot = d[i] * (1.0 + shift)
                - values[start..end].iter().map(|v| v * v).sum::<f64>();
            if !(pivot > 1e-14 * d[i]) {
                return None;
            }
            diag[i] = pivot.sqrt();
        }
        let lower = CsrMatrix { rows: n, cols: n, indptr, indices, values };
        Some(Self { lower, diag, shift })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `x = (L Lᵀ)⁻¹ b`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let (idx, val) = self.lower.row(i);
            let s: f64 = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
            x[i] = (b[i] - s) / self.diag[i];
        }
        for i in (0..n).rev() {
            x[i] /= self.diag[i];
            let xi = x[i];
            let (idx, val) = self.lower.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                x[j] -= v * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, 2.0));
            if i > 0 {
                e.push((i, i - 1, -1.0));
                e.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, e)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matmul_and_galerkin_match_dense() {
        let a = laplacian_1d(5);
        let p = CsrMatrix::from_triplets(5, 3, vec![(0, 0, 1.0), (1, 0, 0.5), (1, 1, 0.5), (2, 1, 1.0), (3, 1, 0.5), (3, 2, 0.5), (4, 2, 1.0)]);
        let g = a.galerkin(&p).to_dense();
        let (ad, pd) = (a.to_dense(), p.to_dense());
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..5 {
                    for l in 0..5 {
                        s += pd[k][i] * ad[k][l] * pd[l][j];
                    }
                }
                assert!((g[i][j] - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ic0_is_exact_on_tridiagonal() {
        let a = laplacian_1d(20);
        let f = IncompleteCholesky::new(&a).unwrap();
        assert_eq!(f.shift(), 0.0);
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 20];
        f.solve(&b, &mut x);
        let mut ax = vec![0.0; 20];
        a.mul_vec(&x, &mut ax);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn gauss_seidel_converges() {
        let a = laplacian_1d(10);
        let d = a.diagonal();
        let b = vec![1.0; 10];
        let mut x = vec![0.0; 10];
        for _ in 0..500 {
            a.symmetric_gauss_seidel(&d, &b, &mut x);
        }
        let mut ax = vec![0.0; 10];
        a.mul_vec(&x, &mut ax);
        assert!(ax.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }
}
