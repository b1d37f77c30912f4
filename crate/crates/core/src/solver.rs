//! Schur complement elimination and preconditioned conjugate gradients.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{BlockOperator, Field};
use crate::error::{Error, Result};
use crate::mesh::Hierarchy;
use crate::sparse::{CsrMatrix, IncompleteCholesky};

/// A symmetric linear map on `R^dim`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// An approximation of the inverse of a [`LinearOperator`].
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec(x, y);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `S = M + R + Bᵀ C⁻¹ B`, applied without assembly.
pub struct SchurOperator<'a> {
    op: &'a BlockOperator,
    c_inv: Vec<f64>,
}

impl<'a> SchurOperator<'a> {
    pub fn new(op: &'a BlockOperator) -> Result<Self> {
        if let Some(i) = op.odd_diag.iter().position(|&c| c == 0.0 || !c.is_finite()) {
            return Err(Error::Singular(format!("odd diagonal entry {i} is {}", op.odd_diag[i])));
        }
        Ok(Self { op, c_inv: op.odd_diag.iter().map(|c| 1.0 / c).collect() })
    }

    pub fn blocks(&self) -> &BlockOperator {
        self.op
    }

    pub fn c_inv(&self) -> &[f64] {
        &self.c_inv
    }

    /// Right-hand side `q⁺ + Bᵀ C⁻¹ q⁻` of the reduced system.
    pub fn reduced_rhs(&self, q_plus: &[f64], q_minus: &[f64]) -> Vec<f64> {
        let t: Vec<f64> = q_minus.iter().zip(&self.c_inv).map(|(q, c)| q * c).collect();
        let mut rhs = vec![0.0; self.op.even_len()];
        self.op.apply_bt(&t, &mut rhs);
        rhs.iter_mut().zip(q_plus).for_each(|(r, q)| *r += q);
        rhs
    }
}

impl LinearOperator for SchurOperator<'_> {
    fn dim(&self) -> usize {
        self.op.even_len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut t = vec![0.0; self.op.odd_len()];
        self.op.apply_b(x, &mut t);
        t.par_iter_mut().zip(&self.c_inv).for_each(|(v, c)| *v *= c);
        let mut z = vec![0.0; self.op.even_len()];
        self.op.apply_bt(&t, &mut z);
        self.op.apply_even(x, y, true);
        y.par_iter_mut().zip(&z).for_each(|(a, b)| *a += b);
    }
}

/// `S x`.
pub fn schur_apply(s: &SchurOperator<'_>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; s.dim()];
    s.apply(x, &mut y);
    y
}

/// `u⁻ = C⁻¹ (q⁻ - B u⁺)`.
pub fn recover_odd(op: &BlockOperator, q_minus: &[f64], u_plus: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = op.odd_diag.iter().position(|&c| c == 0.0) {
        return Err(Error::Singular(format!("odd diagonal entry {i} is zero")));
    }
    let mut bu = vec![0.0; op.odd_len()];
    op.apply_b(u_plus, &mut bu);
    Ok(q_minus.iter().zip(&bu).zip(&op.odd_diag).map(|((q, b), c)| (q - b) / c).collect())
}

/// Outcome of a PCG run plus the parameters echoed by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual `‖b - S x_k‖ / ‖b‖` per iteration, starting at 1.
    pub residual_history: Vec<f64>,
    pub seconds: f64,
    pub dofs_even: usize,
    pub dofs_odd: usize,
    /// Echoed parameters, in insertion order.
    pub params: Vec<(String, String)>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }

    pub fn with_param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    /// One `key=value` line per field; the history is comma separated.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k}={v}");
        }
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "final_residual={:e}", self.final_residual());
        let _ = writeln!(s, "dofs_even={}", self.dofs_even);
        let _ = writeln!(s, "dofs_odd={}", self.dofs_odd);
        let _ = writeln!(s, "seconds={:.6}", self.seconds);
        let hist: Vec<String> = self.residual_history.iter().map(|r| format!("{r:e}")).collect();
        let _ = writeln!(s, "residual_history={}", hist.join(","));
        s
    }
}

/// Preconditioned conjugate gradients on `S x = b` from `x = 0`.
///
/// Stops when the relative 2-norm residual drops to `tol`. The recursive
/// residual is replaced by the true one every 50 iterations and verified
/// before returning.
pub fn pcg_solve(
    s: &dyn LinearOperator,
    b: &[f64],
    precond: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let start = Instant::now();
    let n = s.dim();
    if b.len() != n {
        return Err(Error::Argument(format!("rhs has length {}, operator {n}", b.len())));
    }
    let report = |iterations, residual_history| SolveReport {
        iterations,
        residual_history,
        seconds: start.elapsed().as_secs_f64(),
        dofs_even: n,
        dofs_odd: 0,
        params: Vec::new(),
    };
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, report(0, vec![0.0])));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut history = vec![1.0];
    for it in 1..=max_iter {
        if !(rz > 0.0) {
            return Err(Error::Breakdown(format!("preconditioned residual product {rz:e} at iteration {it}")));
        }
        s.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Breakdown(format!("nonpositive curvature {pq:e} at iteration {it}")));
        }
        let alpha = rz / pq;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= alpha * qi);
        let mut rel = norm(&r) / bnorm;
        if it % 50 == 0 || rel <= tol {
            s.apply(&x, &mut q);
            r.iter_mut().zip(b.iter().zip(&q)).for_each(|(ri, (bi, qi))| *ri = bi - qi);
            rel = norm(&r) / bnorm;
        }
        history.push(rel);
        if rel <= tol {
            return Ok((x, report(it, history)));
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Err(Error::Convergence { iterations: max_iter, residual: *history.last().unwrap() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    Jacobi,
    BlockSpatial,
}

impl FromStr for PreconditionerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "jacobi" => Ok(Self::Jacobi),
            "block_spatial" => Ok(Self::BlockSpatial),
            other => Err(Error::Argument(format!("unknown preconditioner `{other}`"))),
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Jacobi => "jacobi",
            Self::BlockSpatial => "block_spatial",
        })
    }
}

/// `D_{T,k} = Σ_j t_j t_jᵀ / C_{T,j}` with `t_j = (T_x[j,k], T_y[j,k])`, the
/// per-triangle tensor of the mode-diagonal part of `Bᵀ C⁻¹ B`.
fn mode_tensors(op: &BlockOperator, c_inv: &[f64], k: usize) -> Vec<[f64; 3]> {
    let tr = &op.transport;
    let nm = op.n_minus();
    let mut col: Vec<(usize, f64, f64)> = Vec::new();
    for &(j, v) in tr.tx.col(k) {
        col.push((j, v, 0.0));
    }
    for &(j, v) in tr.ty.col(k) {
        match col.iter_mut().find(|e| e.0 == j) {
            Some(e) => e.2 = v,
            None => col.push((j, 0.0, v)),
        }
    }
    (0..op.n_triangles())
        .map(|t| {
            let mut d = [0.0; 3];
            for &(j, x, y) in &col {
                let w = c_inv[t * nm + j];
                d[0] += w * x * x;
                d[1] += w * x * y;
                d[2] += w * y * y;
            }
            d
        })
        .collect()
}

/// `diag(M) + diag(R) + diag(Bᵀ C⁻¹ B)`.
pub fn schur_diagonal(s: &SchurOperator<'_>) -> Vec<f64> {
    let op = s.blocks();
    let np = op.n_plus();
    let nv = op.n_vertices();
    let mut diag = vec![0.0; nv * np];
    for (_, block, range) in &op.mass.blocks {
        let d = block.diagonal();
        for v in 0..nv {
            for k in range.clone() {
                diag[v * np + k] += d[v];
            }
        }
    }
    let rd = op.boundary.diagonal();
    let tr = &op.transport;
    for k in 0..np {
        let dk = mode_tensors(op, s.c_inv(), k);
        for v in 0..nv {
            diag[v * np + k] += rd[v];
        }
        for (t, tri) in tr.triangles.iter().enumerate() {
            let d = dk[t];
            for (a, &v) in tri.iter().enumerate() {
                let [wx, wy] = tr.weighted_gradients[t][a];
                diag[v * np + k] += wx * wx * d[0] + 2.0 * wx * wy * d[1] + wy * wy * d[2];
            }
        }
    }
    diag
}

/// Inverse of the exact diagonal of `S`.
pub struct Jacobi {
    inv: Vec<f64>,
}

impl Jacobi {
    pub fn new(s: &SchurOperator<'_>) -> Result<Self> {
        let d = schur_diagonal(s);
        if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Singular(format!("nonpositive Schur diagonal {:e} at {i}", d[i])));
        }
        Ok(Self { inv: d.iter().map(|v| 1.0 / v).collect() })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.iter_mut().zip(r.iter().zip(&self.inv)).for_each(|(zi, (ri, di))| *zi = ri * di);
    }
}

/// Symmetric V(1,1) cycle for one spatial block.
struct SpatialMultilevel {
    /// Operators coarsest first.
    ops: Vec<CsrMatrix>,
    diags: Vec<Vec<f64>>,
    /// `prolong[l]` maps level `l` to `l + 1`.
    prolong: Vec<CsrMatrix>,
    restrict: Vec<CsrMatrix>,
    coarse: IncompleteCholesky,
}

impl SpatialMultilevel {
    fn new(fine: CsrMatrix, prolong: &[CsrMatrix], restrict: &[CsrMatrix]) -> Result<Self> {
        let mut ops = vec![fine];
        for l in (0..prolong.len()).rev() {
            let coarse = restrict[l].matmul(&ops.last().unwrap().matmul(&prolong[l]));
            ops.push(coarse);
        }
        ops.reverse();
        let coarse = IncompleteCholesky::new(&ops[0])?;
        let diags = ops.iter().map(CsrMatrix::diagonal).collect();
        Ok(Self { ops, diags, prolong: prolong.to_vec(), restrict: restrict.to_vec(), coarse })
    }

    fn cycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        if level == 0 {
            self.coarse.solve(b, x);
            return;
        }
        let a = &self.ops[level];
        x.fill(0.0);
        a.symmetric_gauss_seidel(&self.diags[level], b, x);
        let mut r = vec![0.0; b.len()];
        a.mul_vec(x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let rc_len = self.ops[level - 1].rows();
        let mut rc = vec![0.0; rc_len];
        self.restrict[level - 1].mul_vec(&r, &mut rc);
        let mut xc = vec![0.0; rc_len];
        self.cycle(level - 1, &rc, &mut xc);
        let mut px = vec![0.0; b.len()];
        self.prolong[level - 1].mul_vec(&xc, &mut px);
        x.iter_mut().zip(&px).for_each(|(xi, pi)| *xi += pi);
        a.symmetric_gauss_seidel(&self.diags[level], b, x);
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(self.ops.len() - 1, b, x);
    }
}

/// Per-even-mode spatial preconditioner.
///
/// For mode `k` it approximately inverts `M_k + R + K_k`, where `K_k` collects
/// the mode-diagonal part of `Bᵀ C⁻¹ B`. The spatial solve is a symmetric
/// multilevel V-cycle over the supplied hierarchy (incomplete Cholesky on the
/// coarsest level); without a hierarchy it is a single incomplete Cholesky
/// solve.
pub struct BlockSpatial {
    n_plus: usize,
    solvers: Vec<SpatialMultilevel>,
}

impl BlockSpatial {
    pub fn new(s: &SchurOperator<'_>, hierarchy: Option<&Hierarchy>) -> Result<Self> {
        let op = s.blocks();
        let nv = op.n_vertices();
        let (prolong, restrict) = match hierarchy {
            Some(h) if h.finest().n_vertices() == nv => {
                let p: Vec<CsrMatrix> = (1..h.levels()).map(|l| prolongation_matrix(h, l)).collect();
                let r = p.iter().map(CsrMatrix::transpose).collect();
                (p, r)
            }
            Some(_) => {
                return Err(Error::Argument("hierarchy does not end at the operator's mesh".into()))
            }
            None => (Vec::new(), Vec::new()),
        };
        let solvers = (0..op.n_plus())
            .into_par_iter()
            .map(|k| SpatialMultilevel::new(spatial_block(s, k), &prolong, &restrict))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_plus: op.n_plus(), solvers })
    }
}

fn prolongation_matrix(h: &Hierarchy, level: usize) -> CsrMatrix {
    let map = h.map(level);
    let mut e: Vec<(usize, usize, f64)> = (0..map.coarse_vertices).map(|v| (v, v, 1.0)).collect();
    for (i, &[a, b]) in map.midpoint_parents.iter().enumerate() {
        e.push((map.coarse_vertices + i, a, 0.5));
        e.push((map.coarse_vertices + i, b, 0.5));
    }
    CsrMatrix::from_triplets(map.fine_vertices(), map.coarse_vertices, e)
}

/// `M_k + R + K_k` as an explicit spatial matrix.
fn spatial_block(s: &SchurOperator<'_>, k: usize) -> CsrMatrix {
    let op = s.blocks();
    let nv = op.n_vertices();
    let mut e = Vec::new();
    for (_, block, range) in &op.mass.blocks {
        if range.contains(&k) {
            for v in 0..nv {
                let (idx, val) = block.row(v);
                e.extend(idx.iter().zip(val).map(|(&u, &w)| (v, u, w)));
            }
        }
    }
    for v in 0..nv {
        let (idx, val) = op.boundary.row(v);
        e.extend(idx.iter().zip(val).map(|(&u, &w)| (v, u, w)));
    }
    let tr = &op.transport;
    let dk = mode_tensors(op, s.c_inv(), k);
    for (t, tri) in tr.triangles.iter().enumerate() {
        let d = dk[t];
        let w = &tr.weighted_gradients[t];
        for a in 0..3 {
            for b in 0..3 {
                let val = w[a][0] * (d[0] * w[b][0] + d[1] * w[b][1])
                    + w[a][1] * (d[1] * w[b][0] + d[2] * w[b][1]);
                e.push((tri[a], tri[b], val));
            }
        }
    }
    CsrMatrix::from_triplets(nv, nv, e)
}

impl Preconditioner for BlockSpatial {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let np = self.n_plus;
        let nv = r.len() / np;
        let parts: Vec<Vec<f64>> = self
            .solvers
            .par_iter()
            .enumerate()
            .map(|(k, solver)| {
                let b: Vec<f64> = (0..nv).map(|v| r[v * np + k]).collect();
                let mut x = vec![0.0; nv];
                solver.solve(&b, &mut x);
                x
            })
            .collect();
        for (k, x) in parts.iter().enumerate() {
            for v in 0..nv {
                z[v * np + k] = x[v];
            }
        }
    }
}

/// Builds the requested preconditioner for `S`.
pub fn build_preconditioner(
    s: &SchurOperator<'_>,
    kind: PreconditionerKind,
    hierarchy: Option<&Hierarchy>,
) -> Result<Box<dyn Preconditioner>> {
    Ok(match kind {
        PreconditionerKind::Jacobi => Box::new(Jacobi::new(s)?),
        PreconditionerKind::BlockSpatial => Box::new(BlockSpatial::new(s, hierarchy)?),
    })
}

/// Solves the mixed system via the Schur complement and recovers the odd part.
pub fn solve_mixed(
    op: &BlockOperator,
    q_plus: &[f64],
    q_minus: &[f64],
    kind: PreconditionerKind,
    hierarchy: Option<&Hierarchy>,
    tol: f64,
    max_iter: usize,
) -> Result<(Field, SolveReport)> {
    let start = Instant::now();
    let s = SchurOperator::new(op)?;
    let precond = build_preconditioner(&s, kind, hierarchy)?;
    let rhs = s.reduced_rhs(q_plus, q_minus);
    let (even, mut report) = pcg_solve(&s, &rhs, precond.as_ref(), tol, max_iter)?;
    let odd = recover_odd(op, q_minus, &even)?;
    report.seconds = start.elapsed().as_secs_f64();
    report.dofs_even = op.even_len();
    report.dofs_odd = op.odd_len();
    let field = Field { even, odd, n_plus: op.n_plus(), n_minus: op.n_minus() };
    Ok((field, report))
}
