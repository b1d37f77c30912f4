use super::harmonics::{eval_all, harmonic_count, lm_index};
use super::quadrature::SphereQuadrature;
use super::AngularBasis;
use crate::error::{Error, Result};

/// Entries below this magnitude are treated as structural zeros.
const DROP_TOLERANCE: f64 = 1e-12;

/// `∫_S s_i Y_odd Y_even ds` for one Cartesian component, `n_minus × n_plus`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    rows: usize,
    cols: usize,
    dense: Vec<f64>,
    // odd row -> (even col, value)
    by_row: Vec<Vec<(usize, f64)>>,
    // even col -> (odd row, value)
    by_col: Vec<Vec<(usize, f64)>>,
}

impl CouplingMatrix {
    fn from_dense(rows: usize, cols: usize, mut dense: Vec<f64>) -> Self {
        let mut by_row = vec![Vec::new(); rows];
        let mut by_col = vec![Vec::new(); cols];
        for j in 0..rows {
            for k in 0..cols {
                let v = dense[j * cols + k];
                if v.abs() > DROP_TOLERANCE {
                    by_row[j].push((k, v));
                    by_col[k].push((j, v));
                } else {
                    dense[j * cols + k] = 0.0;
                }
            }
        }
        Self { rows, cols, dense, by_row, by_col }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, odd: usize, even: usize) -> f64 {
        self.dense[odd * self.cols + even]
    }

    /// Nonzeros of an odd row as `(even column, value)`.
    pub fn row(&self, odd: usize) -> &[(usize, f64)] {
        &self.by_row[odd]
    }

    /// Nonzeros of an even column as `(odd row, value)`.
    pub fn col(&self, even: usize) -> &[(usize, f64)] {
        &self.by_col[even]
    }

    pub fn nnz(&self) -> usize {
        self.by_row.iter().map(Vec::len).sum()
    }

    /// `y += self · x` with `x` indexed by even modes and `y` by odd modes.
    #[inline]
    pub fn apply_add(&self, x: &[f64], y: &mut [f64]) {
        for (yj, row) in y.iter_mut().zip(&self.by_row) {
            let mut acc = 0.0;
            for &(k, v) in row {
                acc += v * x[k];
            }
            *yj += acc;
        }
    }

    /// `x += selfᵀ · y`.
    #[inline]
    pub fn apply_transpose_add(&self, y: &[f64], x: &mut [f64]) {
        for (xk, col) in x.iter_mut().zip(&self.by_col) {
            let mut acc = 0.0;
            for &(j, v) in col {
                acc += v * y[j];
            }
            *xk += acc;
        }
    }
}

/// The three direction-coupling matrices `T_x, T_y, T_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularCouplings {
    pub tx: CouplingMatrix,
    pub ty: CouplingMatrix,
    pub tz: CouplingMatrix,
}

impl AngularCouplings {
    pub fn component(&self, i: usize) -> &CouplingMatrix {
        match i {
            0 => &self.tx,
            1 => &self.ty,
            _ => &self.tz,
        }
    }
}

/// Computes `(T_i)_{jk} = ∫_S s_i Y_{odd_j} Y_{even_k} ds` by quadrature.
///
/// The rule must be exact for degree `2N + 1`; [`SphereQuadrature::for_order`]
/// satisfies this.
pub fn coupling_matrices(basis: &AngularBasis, quad: &SphereQuadrature) -> Result<AngularCouplings> {
    let n = basis.order();
    if quad.is_empty() {
        return Err(Error::Argument("empty sphere quadrature".into()));
    }
    let (np, nm) = (basis.n_plus(), basis.n_minus());
    let even_idx: Vec<usize> = basis.even_modes().iter().map(|md| lm_index(md.l, md.m)).collect();
    let odd_idx: Vec<usize> = basis.odd_modes().iter().map(|md| lm_index(md.l, md.m)).collect();
    let mut dense = [vec![0.0; nm * np], vec![0.0; nm * np], vec![0.0; nm * np]];
    let mut y = vec![0.0; harmonic_count(n)];
    let mut ye = vec![0.0; np];
    for (s, w) in quad.nodes().iter().zip(quad.weights()) {
        eval_all(n, *s, &mut y);
        for (k, &gi) in even_idx.iter().enumerate() {
            ye[k] = y[gi];
        }
        for (j, &gi) in odd_idx.iter().enumerate() {
            let yo = y[gi] * w;
            for (i, d) in dense.iter_mut().enumerate() {
                let f = yo * s[i];
                let row = &mut d[j * np..(j + 1) * np];
                for (r, e) in row.iter_mut().zip(&ye) {
                    *r += f * e;
                }
            }
        }
    }
    let [dx, dy, dz] = dense;
    Ok(AngularCouplings {
        tx: CouplingMatrix::from_dense(nm, np, dx),
        ty: CouplingMatrix::from_dense(nm, np, dy),
        tz: CouplingMatrix::from_dense(nm, np, dz),
    })
}
