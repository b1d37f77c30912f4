//! Discrete-ordinates reference solutions by ray tracing through the mesh.
//!
//! Every sample ray is traced along its full chord through the extended
//! domain. With piecewise-constant `μ` and emission per triangle, the
//! transport along a chord is integrated exactly, and the reflection rule
//! couples only the two chord endpoints, so the reflected inflow is
//! eliminated exactly per chord. Scattering enters through source iteration
//! on the scalar flux at triangle centroids.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::angular::SphereQuadrature;
use crate::error::{Error, Result};
use crate::mesh::{Mesh2D, VertexStar};
use crate::pml::{reflect_factor, TransportCoefficients};

/// Antipodally symmetric product ordinates: Gauss–Legendre in `cos θ` times
/// a shifted uniform azimuthal rule with an even number of angles.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinateSet {
    directions: Vec<[f64; 3]>,
    weights: Vec<f64>,
    n_azimuth: usize,
    n_polar: usize,
}

impl OrdinateSet {
    pub fn product(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_azimuth == 0 || n_azimuth % 2 != 0 || n_polar == 0 {
            return Err(Error::Argument(format!(
                "ordinates need n_polar >= 1 and an even n_azimuth, got {n_polar} x {n_azimuth}"
            )));
        }
        let q = SphereQuadrature::product(n_polar, n_azimuth, 0.5)?;
        Ok(Self { directions: q.nodes().to_vec(), weights: q.weights().to_vec(), n_azimuth, n_polar })
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Index of `-s_o`.
    pub fn antipode(&self, o: usize) -> usize {
        let (i, j) = (o / self.n_azimuth, o % self.n_azimuth);
        (self.n_polar - 1 - i) * self.n_azimuth + (j + self.n_azimuth / 2) % self.n_azimuth
    }
}

/// Spatial sample points with quadrature weights.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Triangles that may contain the start of a ray from each point.
    candidates: Vec<Vec<usize>>,
    /// Outward normals of outer boundary edges through each point.
    normals: Vec<Vec<[f64; 2]>>,
}

impl SampleSet {
    /// Centroids of the triangles selected by `keep`, weighted by area.
    pub fn centroids(mesh: &Mesh2D, keep: impl Fn(usize) -> bool) -> Self {
        let ts: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| keep(t)).collect();
        Self {
            points: ts.iter().map(|&t| mesh.centroid(t)).collect(),
            weights: ts.iter().map(|&t| mesh.area(t)).collect(),
            candidates: ts.iter().map(|&t| vec![t]).collect(),
            normals: vec![Vec::new(); ts.len()],
        }
    }

    /// The given vertices with the supplied weights.
    pub fn vertices(mesh: &Mesh2D, vertices: &[usize], weights: Vec<f64>) -> Self {
        let star = mesh.vertex_star();
        let mut normals = vec![Vec::new(); mesh.n_vertices()];
        for e in mesh.boundary_edges() {
            for &v in &e.vertices {
                normals[v].push(e.normal);
            }
        }
        Self {
            points: vertices.iter().map(|&v| mesh.vertices()[v]).collect(),
            weights,
            candidates: vertices.iter().map(|&v| star.triangles(v).to_vec()).collect(),
            normals: vertices.iter().map(|&v| normals[v].clone()).collect(),
        }
    }

    /// Midpoints of the outer boundary edges, weighted by edge length.
    pub fn boundary_midpoints(mesh: &Mesh2D) -> Self {
        let star = mesh.vertex_star();
        let edges = mesh.boundary_edges();
        let owner = |e: &crate::mesh::BoundaryEdge| {
            let [a, b] = e.vertices;
            star.triangles(a)
                .iter()
                .copied()
                .find(|t| mesh.triangles()[*t].contains(&b))
                .expect("boundary edge has an owner")
        };
        Self {
            points: edges
                .iter()
                .map(|e| {
                    let (p, q) = (mesh.vertices()[e.vertices[0]], mesh.vertices()[e.vertices[1]]);
                    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
                })
                .collect(),
            weights: edges.iter().map(|e| e.length).collect(),
            candidates: edges.iter().map(|e| vec![owner(e)]).collect(),
            normals: edges.iter().map(|e| vec![e.normal]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The outward normal at a boundary sample, if any.
    pub fn boundary_normal(&self, i: usize) -> Option<[f64; 2]> {
        match self.normals[i].as_slice() {
            [] => None,
            [n] => Some(*n),
            ns => {
                let s = ns.iter().fold([0.0; 2], |a, n| [a[0] + n[0], a[1] + n[1]]);
                let l = s[0].hypot(s[1]);
                Some([s[0] / l, s[1] / l])
            }
        }
    }
}

/// Values on `samples × ordinates`, stored `values[p * n_ord + o]`.
#[derive(Debug, Clone)]
pub struct SampledField {
    pub samples: SampleSet,
    pub ordinates: OrdinateSet,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn value(&self, p: usize, o: usize) -> f64 {
        self.values[p * self.ordinates.len() + o]
    }

    /// Ordinate quadrature of `u(r_p, ·)` over the sphere.
    pub fn angular_mean(&self) -> Vec<f64> {
        let w = self.ordinates.weights();
        self.values.chunks(w.len()).map(|u| u.iter().zip(w).map(|(a, b)| a * b).sum()).collect()
    }
}

/// Discrete `L²(D × S)` distance of two sampled fields.
pub fn consistency_error(u: &SampledField, w: &SampledField) -> Result<f64> {
    if u.samples.points != w.samples.points
        || u.samples.weights != w.samples.weights
        || u.ordinates != w.ordinates
    {
        return Err(Error::Argument("sampled fields use different sample sets".into()));
    }
    let n = u.ordinates.len();
    let mut s = 0.0;
    for p in 0..u.samples.len() {
        for (o, wo) in u.ordinates.weights().iter().enumerate() {
            let d = u.values[p * n + o] - w.values[p * n + o];
            s += u.samples.weights[p] * wo * d * d;
        }
    }
    Ok(s.sqrt())
}

/// Boundary condition on the outer boundary of the traced mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Vacuum,
    Reflect,
}

/// A straight line through a sample point, cut into per-triangle segments.
#[derive(Debug, Clone)]
struct Chord {
    /// Triangles from the backward exit `x2` to the forward exit `x1`.
    tris: Vec<u32>,
    /// Planar segment lengths.
    lens: Vec<f64>,
    /// Number of segments between `x2` and the sample point.
    split: usize,
    n_back: [f64; 2],
    n_fwd: [f64; 2],
}

/// Walks straight lines through a triangulation.
pub struct RayTracer<'m> {
    mesh: &'m Mesh2D,
    neighbors: Vec<[Option<usize>; 3]>,
    star: VertexStar,
    nudge: f64,
}

struct Walk {
    tris: Vec<u32>,
    lens: Vec<f64>,
    normal: [f64; 2],
}

impl<'m> RayTracer<'m> {
    pub fn new(mesh: &'m Mesh2D) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.vertices() {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let diameter = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        Self { mesh, neighbors: mesh.neighbors(), star: mesh.vertex_star(), nudge: 1e-12 * diameter }
    }

    pub fn mesh(&self) -> &Mesh2D {
        self.mesh
    }

    fn min_barycentric(&self, t: usize, p: [f64; 2]) -> f64 {
        self.mesh.barycentric(t, p).into_iter().fold(f64::INFINITY, f64::min)
    }

    fn best_of(&self, cands: impl Iterator<Item = usize>, p: [f64; 2]) -> Option<usize> {
        let mut best = None;
        let mut score = -1e-9;
        for t in cands {
            let s = self.min_barycentric(t, p);
            if s > score {
                score = s;
                best = Some(t);
            }
        }
        best
    }

    /// Outward normal of local edge `i` (opposite vertex `i`) of triangle `t`.
    fn edge_normal(&self, t: usize, i: usize) -> [f64; 2] {
        let c = self.mesh.corners(t);
        let (p, q) = (c[(i + 1) % 3], c[(i + 2) % 3]);
        let d = [q[0] - p[0], q[1] - p[1]];
        let l = d[0].hypot(d[1]);
        [d[1] / l, -d[0] / l]
    }

    /// Boundary normal near the triangles around `t` best aligned with `d`.
    fn fallback_normal(&self, t: usize, d: [f64; 2]) -> [f64; 2] {
        let mut best = ([d[0], d[1]], f64::NEG_INFINITY);
        for &v in &self.mesh.triangles()[t] {
            for &s in self.star.triangles(v) {
                for i in 0..3 {
                    if self.neighbors[s][i].is_none() {
                        let n = self.edge_normal(s, i);
                        let a = n[0] * d[0] + n[1] * d[1];
                        if a > best.1 {
                            best = (n, a);
                        }
                    }
                }
            }
        }
        best.0
    }

    /// Walks from `origin` along the unit vector `d` until leaving the mesh.
    fn walk(&self, origin: [f64; 2], d: [f64; 2], start: Option<usize>, normals: &[[f64; 2]]) -> Result<Walk> {
        let mut tris = Vec::new();
        let mut lens = Vec::new();
        let at = |t: f64| [origin[0] + t * d[0], origin[1] + t * d[1]];
        let Some(mut tri) = start else {
            // leaving at once through the boundary at the origin
            let normal = normals
                .iter()
                .copied()
                .max_by(|a, b| (a[0] * d[0] + a[1] * d[1]).total_cmp(&(b[0] * d[0] + b[1] * d[1])))
                .ok_or_else(|| Error::Geometry(format!("ray start {origin:?} lies outside the mesh")))?;
            return Ok(Walk { tris, lens, normal });
        };
        let mut t_cur = 0.0;
        for _ in 0..4 * self.mesh.n_triangles() + 16 {
            let lam = self.mesh.barycentric(tri, origin);
            let grads = self.mesh.gradients(tri);
            let mut exit = (f64::INFINITY, 0usize);
            for i in 0..3 {
                let rate = grads[i][0] * d[0] + grads[i][1] * d[1];
                if rate < 0.0 {
                    let ti = -lam[i] / rate;
                    if ti < exit.0 {
                        exit = (ti, i);
                    }
                }
            }
            let t_exit = exit.0.max(t_cur);
            tris.push(tri as u32);
            lens.push(t_exit - t_cur);
            t_cur = t_exit;
            let probe = at(t_exit + self.nudge);
            let next = match self.neighbors[tri][exit.1] {
                None => return Ok(Walk { tris, lens, normal: self.edge_normal(tri, exit.1) }),
                Some(n) if self.min_barycentric(n, probe) > -1e-9 => Some(n),
                Some(_) => {
                    let corners = self.mesh.triangles()[tri];
                    let cands = corners.iter().flat_map(|&v| self.star.triangles(v).iter().copied());
                    self.best_of(cands.filter(|&s| s != tri), probe)
                }
            };
            match next {
                Some(n) => tri = n,
                None => return Ok(Walk { tris, lens, normal: self.fallback_normal(tri, d) }),
            }
        }
        Err(Error::Geometry(format!("ray from {origin:?} did not leave the mesh")))
    }

    fn start_triangle(&self, p: [f64; 2], d: [f64; 2], cands: &[usize]) -> Option<usize> {
        let probe = [p[0] + self.nudge * d[0], p[1] + self.nudge * d[1]];
        self.best_of(cands.iter().copied(), probe)
    }

    fn chord(&self, samples: &SampleSet, i: usize, d: [f64; 2]) -> Result<Chord> {
        let p = samples.points[i];
        let cands = &samples.candidates[i];
        let back_d = [-d[0], -d[1]];
        let back = self.walk(p, back_d, self.start_triangle(p, back_d, cands), &samples.normals[i])?;
        let fwd = self.walk(p, d, self.start_triangle(p, d, cands), &samples.normals[i])?;
        let split = back.tris.len();
        let mut tris: Vec<u32> = back.tris.into_iter().rev().collect();
        let mut lens: Vec<f64> = back.lens.into_iter().rev().collect();
        tris.extend(fwd.tris);
        lens.extend(fwd.lens);
        Ok(Chord { tris, lens, split, n_back: back.normal, n_fwd: fwd.normal })
    }

    /// Planar distance along `-d` from `p` back to the boundary; `p` must lie
    /// in triangle `t` or on its boundary.
    pub fn travel_to_boundary(&self, p: [f64; 2], d: [f64; 2], t: usize) -> Result<f64> {
        let back_d = [-d[0], -d[1]];
        let start = self.start_triangle(p, back_d, &[t]);
        Ok(self.walk(p, back_d, start, &[])?.lens.iter().sum())
    }
}

/// Per-segment data `(e_i, g_i)` with `e = exp(-μL)` and
/// `g = (1 - e)/μ` (or `L` when `μ = 0`); `L` is the 3D length.
fn segment_factors(chord: &Chord, mu: &[f64], rho: f64) -> Vec<(f64, f64)> {
    chord
        .tris
        .iter()
        .zip(&chord.lens)
        .map(|(&t, &l)| {
            let (m, l) = (mu[t as usize], l / rho);
            let tau = m * l;
            if tau == 0.0 {
                (1.0, l)
            } else {
                ((-tau).exp(), -(-tau).exp_m1() / m)
            }
        })
        .collect()
}

/// Inflow reflection factors `(f_back, f_fwd)` for direction `s`, or zeros.
fn chord_factors(chord: &Chord, s: [f64; 3], bc: BoundaryCondition) -> (f64, f64) {
    match bc {
        BoundaryCondition::Vacuum => (0.0, 0.0),
        BoundaryCondition::Reflect => {
            // s enters at x2, -s enters at x1
            let in_back = (s[0] * chord.n_back[0] + s[1] * chord.n_back[1]).min(-1e-300);
            let in_fwd = (-(s[0] * chord.n_fwd[0] + s[1] * chord.n_fwd[1])).min(-1e-300);
            (
                reflect_factor(in_back.max(-1.0)).unwrap_or(0.0),
                reflect_factor(in_fwd.max(-1.0)).unwrap_or(0.0),
            )
        }
    }
}

/// Coefficients `c_i` with `u(p, s) = Σ c_i Q_i` and `u(p, -s) = Σ c'_i Q_i`.
///
/// With `A = u(x1, s)` and `B = u(x2, -s)` the chord satisfies
/// `A = S_A + τ f_2 B` and `B = S_B + τ f_1 A`, solved exactly.
fn chord_coefficients(chord: &Chord, mu: &[f64], s: [f64; 3], bc: BoundaryCondition) -> (Vec<f64>, Vec<f64>) {
    let rho = s[0].hypot(s[1]);
    let seg = segment_factors(chord, mu, rho);
    let k = seg.len();
    let split = chord.split;
    // prefix[i] = Π_{j<i} e_j, suffix[i] = Π_{j>=i} e_j
    let mut prefix = vec![1.0; k + 1];
    let mut suffix = vec![1.0; k + 1];
    for i in 0..k {
        prefix[i + 1] = prefix[i] * seg[i].0;
        suffix[k - 1 - i] = suffix[k - i] * seg[k - 1 - i].0;
    }
    let tau = prefix[k];
    let (tau_back, tau_fwd) = (prefix[split], suffix[split]);
    let (f2, f1) = chord_factors(chord, s, bc);
    let den = 1.0 - tau * tau * f1 * f2;
    let mut plus = vec![0.0; k];
    let mut minus = vec![0.0; k];
    for i in 0..k {
        let g = seg[i].1;
        let (w_a, w_b) = (g * suffix[i + 1], g * prefix[i]);
        plus[i] = tau_back * f2 * (w_b + tau * f1 * w_a) / den;
        minus[i] = tau_fwd * f1 * (w_a + tau * f2 * w_b) / den;
    }
    let mut att = 1.0;
    for i in (0..split).rev() {
        plus[i] += seg[i].1 * att;
        att *= seg[i].0;
    }
    att = 1.0;
    for i in split..k {
        minus[i] += seg[i].1 * att;
        att *= seg[i].0;
    }
    (plus, minus)
}

/// Inflow data for [`characteristics_solve`].
pub enum Inflow<'a> {
    Vacuum,
    Constant(f64),
    Trace(&'a dyn Fn([f64; 2], [f64; 3]) -> f64),
}

/// `u(r, s)` for a pure absorber along the backward ray from `r` in
/// triangle `t`: exact integration of the per-triangle source `q` plus the
/// attenuated inflow at the boundary exit point.
pub fn characteristics_solve(
    tracer: &RayTracer<'_>,
    coeffs: &TransportCoefficients,
    q: &[f64],
    r: [f64; 2],
    t: usize,
    s: [f64; 3],
    inflow: Inflow<'_>,
) -> Result<f64> {
    let rho = s[0].hypot(s[1]);
    if rho < 1e-14 {
        return Err(Error::Argument("direction has no in-plane component".into()));
    }
    let back_d = [-s[0] / rho, -s[1] / rho];
    let start = tracer.start_triangle(r, back_d, &[t]);
    let walk = tracer.walk(r, back_d, start, &[])?;
    let mu = coeffs.mu();
    let (mut value, mut att, mut dist) = (0.0, 1.0, 0.0);
    for (&tri, &l) in walk.tris.iter().zip(&walk.lens) {
        let (m, l3) = (mu[tri as usize], l / rho);
        let g = if m * l3 == 0.0 { l3 } else { -(-m * l3).exp_m1() / m };
        value += att * g * q[tri as usize];
        att *= (-m * l3).exp();
        dist += l;
    }
    let exit = [r[0] + dist * back_d[0], r[1] + dist * back_d[1]];
    let g = match inflow {
        Inflow::Vacuum => 0.0,
        Inflow::Constant(c) => c,
        Inflow::Trace(f) => f(exit, s),
    };
    Ok(value + att * g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceIterationOptions {
    /// Successive max-difference stopping threshold.
    pub tol: f64,
    /// Overrides the default cap `10 ⌈1/(1 - σ_0/μ)⌉`.
    pub max_iter: Option<usize>,
}

impl Default for SourceIterationOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None }
    }
}

#[derive(Debug, Clone)]
pub struct SourceIterationReport {
    pub iterations: usize,
    /// Max-norm of successive scalar-flux differences.
    pub differences: Vec<f64>,
}

/// Linear maps from triangle emissions to sampled values.
struct CoefficientTable {
    offsets: Vec<usize>,
    tris: Vec<u32>,
    coefs: Vec<f64>,
}

impl CoefficientTable {
    /// Rows ordered `[p * n_ord + o]`.
    fn build(
        tracer: &RayTracer<'_>,
        samples: &SampleSet,
        ords: &OrdinateSet,
        mu: &[f64],
        bc: BoundaryCondition,
    ) -> Result<Self> {
        let n = ords.len();
        let rows: Vec<Vec<(Vec<u32>, Vec<f64>)>> = (0..samples.len())
            .into_par_iter()
            .map(|p| {
                let mut out: Vec<Option<(Vec<u32>, Vec<f64>)>> = vec![None; n];
                for o in 0..n {
                    if out[o].is_some() {
                        continue;
                    }
                    let s = ords.directions()[o];
                    let rho = s[0].hypot(s[1]);
                    let chord = tracer.chord(samples, p, [s[0] / rho, s[1] / rho])?;
                    let (cp, cm) = chord_coefficients(&chord, mu, s, bc);
                    out[o] = Some((chord.tris.clone(), cp));
                    out[ords.antipode(o)] = Some((chord.tris, cm));
                }
                Ok(out.into_iter().map(Option::unwrap).collect())
            })
            .collect::<Result<_>>()?;
        let mut offsets = vec![0];
        let mut tris = Vec::new();
        let mut coefs = Vec::new();
        for row in rows.into_iter().flatten() {
            tris.extend(row.0);
            coefs.extend(row.1);
            offsets.push(tris.len());
        }
        Ok(Self { offsets, tris, coefs })
    }

    fn apply(&self, q: &[f64]) -> Vec<f64> {
        (0..self.offsets.len() - 1)
            .into_par_iter()
            .map(|r| {
                let span = self.offsets[r]..self.offsets[r + 1];
                self.tris[span.clone()].iter().zip(&self.coefs[span]).map(|(&t, c)| c * q[t as usize]).sum()
            })
            .collect()
    }
}

/// Solves the transport problem on the traced mesh by source iteration.
///
/// Scattering must be isotropic (or absent); the scalar flux is sampled at
/// the centroids of scattering triangles. Returns the field on `samples`.
pub fn source_iteration(
    tracer: &RayTracer<'_>,
    coeffs: &TransportCoefficients,
    samples: &SampleSet,
    ordinates: &OrdinateSet,
    bc: BoundaryCondition,
    opts: SourceIterationOptions,
) -> Result<(SampledField, SourceIterationReport)> {
    let mesh = tracer.mesh();
    if coeffs.mu().len() != mesh.n_triangles() {
        return Err(Error::Argument("coefficients do not match the traced mesh".into()));
    }
    if ordinates.directions().iter().any(|s| s[0].hypot(s[1]) < 1e-14) {
        return Err(Error::Argument("ordinates must have in-plane components".into()));
    }
    let sigma0: Vec<f64> = (0..mesh.n_triangles())
        .map(|t| {
            let k = coeffs.kernel(t);
            if !k.is_zero() && !k.is_isotropic() {
                return Err(Error::Argument("the ordinate oracle supports isotropic scattering only".into()));
            }
            Ok(k.total())
        })
        .collect::<Result<_>>()?;
    let ratio = coeffs.scattering_ratio();
    if ratio >= 1.0 {
        return Err(Error::Model(format!("scattering ratio {ratio} is not subcritical")));
    }
    let cap = opts.max_iter.unwrap_or(10 * (1.0 / (1.0 - ratio)).ceil() as usize);
    let mu = coeffs.mu();
    let q0 = coeffs.source();
    let out_table = CoefficientTable::build(tracer, samples, ordinates, mu, bc)?;

    let scattering: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| sigma0[t] > 0.0).collect();
    let mut emission = q0.to_vec();
    let mut report = SourceIterationReport { iterations: 1, differences: Vec::new() };
    if !scattering.is_empty() {
        let centroids = SampleSet::centroids(mesh, |t| sigma0[t] > 0.0);
        let flux_table = CoefficientTable::build(tracer, &centroids, ordinates, mu, bc)?;
        let w = ordinates.weights();
        let n = ordinates.len();
        let mut phi = vec![0.0; scattering.len()];
        report.iterations = 0;
        loop {
            let u = flux_table.apply(&emission);
            let new_phi: Vec<f64> =
                u.chunks(n).map(|c| c.iter().zip(w).map(|(a, b)| a * b).sum()).collect();
            let diff = new_phi.iter().zip(&phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            phi = new_phi;
            report.iterations += 1;
            report.differences.push(diff);
            for (i, &t) in scattering.iter().enumerate() {
                emission[t] = q0[t] + sigma0[t] / (4.0 * PI) * phi[i];
            }
            if diff <= opts.tol {
                break;
            }
            if report.iterations >= cap {
                return Err(Error::Convergence { iterations: report.iterations, residual: diff });
            }
        }
    }
    let values = out_table.apply(&emission);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Geometry(format!("non-finite sampled value at row {i}")));
    }
    Ok((SampledField { samples: samples.clone(), ordinates: ordinates.clone(), values }, report))
}

/// Whether the full line through `r` in direction `s` misses the inner domain.
pub fn line_misses(spec: &crate::mesh::GeometrySpec, r: [f64; 2], s: [f64; 3]) -> Result<bool> {
    let back = spec.ray_exit_distance(r, s)?;
    let fwd = spec.ray_exit_distance(r, [-s[0], -s[1], -s[2]])?;
    Ok(back.is_infinite() && fwd.is_infinite())
}
