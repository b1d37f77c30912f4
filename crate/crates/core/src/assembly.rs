//! The blocks `M`, `R`, `B`, `C` of the mixed even/odd system and its loads.
//!
//! Unknowns are stored vertex-major for the even part (`even[v * n_plus + k]`)
//! and triangle-major for the odd part (`odd[t * n_minus + j]`).

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;

use crate::angular::{AngularBasis, AngularCouplings, CouplingMatrix};
use crate::error::{Error, Result};
use crate::mesh::{Hierarchy, Mesh2D, Region, VertexStar};
use crate::pml::TransportCoefficients;
use crate::sparse::CsrMatrix;

/// Paired even (P1 × S⁺) and odd (P0 × S⁻) coefficient arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
    pub n_plus: usize,
    pub n_minus: usize,
}

impl Field {
    pub fn zeros(n_vertices: usize, n_triangles: usize, basis: &AngularBasis) -> Self {
        Self {
            even: vec![0.0; n_vertices * basis.n_plus()],
            odd: vec![0.0; n_triangles * basis.n_minus()],
            n_plus: basis.n_plus(),
            n_minus: basis.n_minus(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.even.len() / self.n_plus
    }

    pub fn n_triangles(&self) -> usize {
        self.odd.len() / self.n_minus
    }

    /// `∫_S u(r, s) ds = √(4π) u_00(r)` per vertex.
    pub fn angular_mean(&self) -> Vec<f64> {
        let c = (4.0 * PI).sqrt();
        self.even.chunks(self.n_plus).map(|v| c * v[0]).collect()
    }

    /// Nested P1/P0 prolongation from hierarchy level `from` to `to`.
    pub fn prolong(&self, hierarchy: &Hierarchy, from: usize, to: usize) -> Self {
        Self {
            even: hierarchy.prolong_p1(&self.even, self.n_plus, from, to),
            odd: hierarchy.prolong_p0(&self.odd, self.n_minus, from, to),
            n_plus: self.n_plus,
            n_minus: self.n_minus,
        }
    }

    /// Re-expresses the field in a basis of equal or higher order; the extra
    /// modes are zero.
    pub fn embed(&self, from: &AngularBasis, to: &AngularBasis) -> Result<Self> {
        if from.n_plus() != self.n_plus || from.n_minus() != self.n_minus {
            return Err(Error::Argument("field does not match the source basis".into()));
        }
        if to.order() < from.order() {
            return Err(Error::Argument(format!("cannot embed order {} into order {}", from.order(), to.order())));
        }
        let even_map: Vec<usize> =
            from.even_modes().iter().map(|m| to.even_position(m.l, m.m).unwrap()).collect();
        let odd_map: Vec<usize> = from.odd_modes().iter().map(|m| to.odd_position(m.l, m.m).unwrap()).collect();
        let scatter = |src: &[f64], map: &[usize], stride: usize| {
            let mut out = vec![0.0; src.len() / map.len() * stride];
            for (s, d) in src.chunks(map.len()).zip(out.chunks_mut(stride)) {
                for (&k, &v) in map.iter().zip(s) {
                    d[k] = v;
                }
            }
            out
        };
        Ok(Self {
            even: scatter(&self.even, &even_map, to.n_plus()),
            odd: scatter(&self.odd, &odd_map, to.n_minus()),
            n_plus: to.n_plus(),
            n_minus: to.n_minus(),
        })
    }
}

/// Per-even-degree P1 mass blocks weighted by `μ - σ_l`.
#[derive(Debug, Clone)]
pub struct EvenMass {
    /// `(l, block, even-mode range)` for each even degree `l`.
    pub blocks: Vec<(usize, CsrMatrix, Range<usize>)>,
}

/// P1 mass on triangle `t` with weight `w`: `w |T| / 12 (1 + δ_ab)`.
fn local_mass(area: f64, w: f64) -> [[f64; 3]; 3] {
    let (d, o) = (w * area / 6.0, w * area / 12.0);
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn mode_ranges(basis: &AngularBasis) -> Vec<(usize, Range<usize>)> {
    let mut out: Vec<(usize, Range<usize>)> = Vec::new();
    for (k, m) in basis.even_modes().iter().enumerate() {
        match out.last_mut() {
            Some((l, r)) if *l == m.l => r.end = k + 1,
            _ => out.push((m.l, k..k + 1)),
        }
    }
    out
}

/// Weighted P1 mass blocks, one per even degree.
pub fn assemble_even_mass(
    mesh: &Mesh2D,
    coeffs: &TransportCoefficients,
    basis: &AngularBasis,
) -> EvenMass {
    if !coeffs.is_coercive() {
        log::warn!("gamma = {:.3e} <= 0: the even mass matrix may be singular", coeffs.gamma());
    }
    let blocks = mode_ranges(basis)
        .into_iter()
        .map(|(l, range)| {
            let mut e = Vec::with_capacity(9 * mesh.n_triangles());
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let m = local_mass(mesh.area(t), coeffs.collision(t, l));
                for a in 0..3 {
                    for b in 0..3 {
                        e.push((tri[a], tri[b], m[a][b]));
                    }
                }
            }
            (l, CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), e), range)
        })
        .collect();
    EvenMass { blocks }
}

/// P1 boundary mass on the outer boundary; the same block serves every even
/// mode since the angular Gram matrix is the identity.
pub fn assemble_boundary(mesh: &Mesh2D) -> CsrMatrix {
    let trace = mesh.boundary_trace_dofs();
    let mut e = Vec::with_capacity(4 * trace.edges.len());
    for (v, m) in &trace.edges {
        for a in 0..2 {
            for b in 0..2 {
                e.push((v[a], v[b], m[a][b]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), e)
}

/// Kronecker factors of `B = Σ_{i∈{x,y}} G_i ⊗ T_i`.
#[derive(Debug, Clone)]
pub struct Transport {
    pub(crate) triangles: Vec<[usize; 3]>,
    /// `|T| ∇φ_v` for the three vertices of each triangle.
    pub(crate) weighted_gradients: Vec<[[f64; 2]; 3]>,
    pub(crate) tx: CouplingMatrix,
    pub(crate) ty: CouplingMatrix,
    star: VertexStar,
    n_vertices: usize,
}

pub fn assemble_transport(mesh: &Mesh2D, couplings: &AngularCouplings) -> Transport {
    let weighted_gradients = (0..mesh.n_triangles())
        .map(|t| {
            let a = mesh.area(t);
            mesh.gradients(t).map(|g| [a * g[0], a * g[1]])
        })
        .collect();
    Transport {
        triangles: mesh.triangles().to_vec(),
        weighted_gradients,
        tx: couplings.tx.clone(),
        ty: couplings.ty.clone(),
        star: mesh.vertex_star(),
        n_vertices: mesh.n_vertices(),
    }
}

impl Transport {
    pub fn n_plus(&self) -> usize {
        self.tx.cols()
    }

    pub fn n_minus(&self) -> usize {
        self.tx.rows()
    }

    /// Spatial factor `G_i` as an explicit `n_triangles × n_vertices` matrix.
    pub fn spatial_factor(&self, i: usize) -> CsrMatrix {
        let mut e = Vec::with_capacity(3 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            for a in 0..3 {
                e.push((t, tri[a], self.weighted_gradients[t][a][i]));
            }
        }
        CsrMatrix::from_triplets(self.triangles.len(), self.n_vertices, e)
    }

    /// `y = B x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (np, nm) = (self.n_plus(), self.n_minus());
        y.par_chunks_mut(nm).enumerate().for_each_init(
            || vec![0.0; 2 * np],
            |buf, (t, out)| {
                let (gx, gy) = buf.split_at_mut(np);
                gx.fill(0.0);
                gy.fill(0.0);
                for (a, &v) in self.triangles[t].iter().enumerate() {
                    let [wx, wy] = self.weighted_gradients[t][a];
                    let xv = &x[v * np..(v + 1) * np];
                    for k in 0..np {
                        gx[k] += wx * xv[k];
                        gy[k] += wy * xv[k];
                    }
                }
                out.fill(0.0);
                self.tx.apply_add(gx, out);
                self.ty.apply_add(gy, out);
            },
        );
    }

    /// `x = Bᵀ y`, gathered per vertex for deterministic sums.
    pub fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        let (np, nm) = (self.n_plus(), self.n_minus());
        let mut z = vec![0.0; self.triangles.len() * 2 * np];
        z.par_chunks_mut(2 * np).enumerate().for_each(|(t, zt)| {
            let (zx, zy) = zt.split_at_mut(np);
            let yt = &y[t * nm..(t + 1) * nm];
            self.tx.apply_transpose_add(yt, zx);
            self.ty.apply_transpose_add(yt, zy);
        });
        x.par_chunks_mut(np).enumerate().for_each(|(v, xv)| {
            xv.fill(0.0);
            for &t in self.star.triangles(v) {
                let a = self.triangles[t].iter().position(|&u| u == v).unwrap();
                let [wx, wy] = self.weighted_gradients[t][a];
                let zt = &z[t * 2 * np..(t + 1) * 2 * np];
                for k in 0..np {
                    xv[k] += wx * zt[k] + wy * zt[np + k];
                }
            }
        });
    }
}

/// Diagonal of `C`: `|T| (μ_T - σ_{l,T})` per triangle and odd mode.
pub fn assemble_odd_diag(
    mesh: &Mesh2D,
    coeffs: &TransportCoefficients,
    basis: &AngularBasis,
) -> Result<Vec<f64>> {
    let nm = basis.n_minus();
    let mut c = Vec::with_capacity(mesh.n_triangles() * nm);
    for t in 0..mesh.n_triangles() {
        let a = mesh.area(t);
        c.extend(basis.odd_modes().iter().map(|m| a * coeffs.collision(t, m.l)));
    }
    if coeffs.is_coercive() {
        if let Some(i) = c.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Singular(format!(
                "odd diagonal entry {i} is {:e} although gamma > 0",
                c[i]
            )));
        }
    }
    Ok(c)
}

/// Loads for an isotropic source given per triangle: mode (0,0) receives
/// `√(4π) q_T |T| / 3` at each vertex of `T`; the odd load vanishes.
pub fn project_source(mesh: &Mesh2D, basis: &AngularBasis, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let np = basis.n_plus();
    let mut q_plus = vec![0.0; mesh.n_vertices() * np];
    let c = (4.0 * PI).sqrt() / 3.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let w = c * q[t] * mesh.area(t);
        for &v in tri {
            q_plus[v * np] += w;
        }
    }
    (q_plus, vec![0.0; mesh.n_triangles() * basis.n_minus()])
}

/// The assembled mixed system.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub mass: EvenMass,
    pub boundary: CsrMatrix,
    pub transport: Transport,
    pub odd_diag: Vec<f64>,
    n_plus: usize,
    n_minus: usize,
    areas: Vec<f64>,
    interior: Vec<bool>,
}

impl BlockOperator {
    pub fn assemble(
        mesh: &Mesh2D,
        coeffs: &TransportCoefficients,
        basis: &AngularBasis,
        couplings: &AngularCouplings,
    ) -> Result<Self> {
        if coeffs.mu().len() != mesh.n_triangles() {
            return Err(Error::Argument("coefficients do not match the mesh".into()));
        }
        let odd_diag = assemble_odd_diag(mesh, coeffs, basis)?;
        Ok(Self {
            mass: assemble_even_mass(mesh, coeffs, basis),
            boundary: assemble_boundary(mesh),
            transport: assemble_transport(mesh, couplings),
            odd_diag,
            n_plus: basis.n_plus(),
            n_minus: basis.n_minus(),
            areas: (0..mesh.n_triangles()).map(|t| mesh.area(t)).collect(),
            interior: mesh.tags().iter().map(|&r| r == Region::Interior).collect(),
        })
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    pub fn n_vertices(&self) -> usize {
        self.boundary.rows()
    }

    pub fn n_triangles(&self) -> usize {
        self.areas.len()
    }

    pub fn even_len(&self) -> usize {
        self.n_vertices() * self.n_plus
    }

    pub fn odd_len(&self) -> usize {
        self.n_triangles() * self.n_minus
    }

    /// `y = (M + R) x`, or `y = M x` when `with_boundary` is false.
    pub fn apply_even(&self, x: &[f64], y: &mut [f64], with_boundary: bool) {
        let np = self.n_plus;
        y.par_chunks_mut(np).enumerate().for_each(|(v, yv)| {
            yv.fill(0.0);
            for (_, block, range) in &self.mass.blocks {
                let (idx, val) = block.row(v);
                for (&u, &w) in idx.iter().zip(val) {
                    let xu = &x[u * np..(u + 1) * np];
                    for k in range.clone() {
                        yv[k] += w * xu[k];
                    }
                }
            }
            if with_boundary {
                let (idx, val) = self.boundary.row(v);
                for (&u, &w) in idx.iter().zip(val) {
                    let xu = &x[u * np..(u + 1) * np];
                    for k in 0..np {
                        yv[k] += w * xu[k];
                    }
                }
            }
        });
    }

    /// `y = R x`.
    pub fn apply_boundary(&self, x: &[f64], y: &mut [f64]) {
        let np = self.n_plus;
        y.par_chunks_mut(np).enumerate().for_each(|(v, yv)| {
            yv.fill(0.0);
            let (idx, val) = self.boundary.row(v);
            for (&u, &w) in idx.iter().zip(val) {
                for k in 0..np {
                    yv[k] += w * x[u * np + k];
                }
            }
        });
    }

    pub fn apply_b(&self, x: &[f64], y: &mut [f64]) {
        self.transport.apply(x, y);
    }

    pub fn apply_bt(&self, y: &[f64], x: &mut [f64]) {
        self.transport.apply_transpose(y, x);
    }

    /// Squared error norm over INTERIOR triangles:
    /// `‖d‖²_{L²} + ‖s·∇d⁺‖²`, the gradient term evaluated as `Σ (B d⁺)² / |T|`.
    pub fn interior_error_sq(&self, d_even: &[f64], d_odd: &[f64]) -> f64 {
        let (np, nm) = (self.n_plus, self.n_minus);
        let mut bd = vec![0.0; self.odd_len()];
        self.apply_b(d_even, &mut bd);
        let tris = &self.transport.triangles;
        (0..self.n_triangles())
            .filter(|&t| self.interior[t])
            .map(|t| {
                let m = local_mass(self.areas[t], 1.0);
                let mut even = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        let (u, v) = (tris[t][a], tris[t][b]);
                        let dot: f64 = (0..np).map(|k| d_even[u * np + k] * d_even[v * np + k]).sum();
                        even += m[a][b] * dot;
                    }
                }
                let odd: f64 = d_odd[t * nm..(t + 1) * nm].iter().map(|v| v * v).sum::<f64>();
                let grad: f64 = bd[t * nm..(t + 1) * nm].iter().map(|v| v * v).sum::<f64>();
                even + self.areas[t] * odd + grad / self.areas[t]
            })
            .sum()
    }

    /// Explicit sparse `M`, `R`, `B` and the diagonal of `C` in the global
    /// layout, assembled entry by entry. Intended for small instances.
    pub fn explicit_blocks(&self) -> (CsrMatrix, CsrMatrix, CsrMatrix, Vec<f64>) {
        let (np, nm) = (self.n_plus, self.n_minus);
        let nv = self.n_vertices();
        let mut m = Vec::new();
        for (_, block, range) in &self.mass.blocks {
            for v in 0..nv {
                let (idx, val) = block.row(v);
                for (&u, &w) in idx.iter().zip(val) {
                    m.extend(range.clone().map(|k| (v * np + k, u * np + k, w)));
                }
            }
        }
        let mut r = Vec::new();
        for v in 0..nv {
            let (idx, val) = self.boundary.row(v);
            for (&u, &w) in idx.iter().zip(val) {
                r.extend((0..np).map(|k| (v * np + k, u * np + k, w)));
            }
        }
        let mut b = Vec::new();
        let tr = &self.transport;
        for (t, tri) in tr.triangles.iter().enumerate() {
            for (a, &v) in tri.iter().enumerate() {
                let [wx, wy] = tr.weighted_gradients[t][a];
                for j in 0..nm {
                    for k in 0..np {
                        let val = wx * tr.tx.get(j, k) + wy * tr.ty.get(j, k);
                        if val != 0.0 {
                            b.push((t * nm + j, v * np + k, val));
                        }
                    }
                }
            }
        }
        let ne = nv * np;
        (
            CsrMatrix::from_triplets(ne, ne, m),
            CsrMatrix::from_triplets(ne, ne, r),
            CsrMatrix::from_triplets(self.odd_len(), ne, b),
            self.odd_diag.clone(),
        )
    }
}
