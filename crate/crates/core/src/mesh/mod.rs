//! Triangulations of the extended cross-section with region tags.

mod build;
mod geometry;
mod io;
mod refine;

pub use build::build_mesh;
pub use geometry::{ray_exit_distance, GeometrySpec, Shape};
pub use io::{read_ascii, write_ascii};
pub use refine::{uniform_refine, uniform_refine_with_map, Hierarchy, RefinementMap};

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Interior,
    Layer,
}

/// An edge on the outer boundary, oriented counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub normal: [f64; 2],
    pub length: f64,
}

/// A conforming triangulation with counter-clockwise triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<Region>,
    boundary_edges: Vec<BoundaryEdge>,
    h: f64,
}

/// Per-edge P1 boundary masses on the outer boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    /// Boundary vertices, ascending.
    pub vertices: Vec<usize>,
    /// `(a, b, local)` with `local = L/6 [[2,1],[1,2]]`.
    pub edges: Vec<([usize; 2], [[f64; 2]; 2])>,
}

impl BoundaryTrace {
    /// Row sums of the boundary mass, indexed by vertex.
    pub fn lumped(&self, n_vertices: usize) -> Vec<f64> {
        let mut w = vec![0.0; n_vertices];
        for (e, m) in &self.edges {
            w[e[0]] += m[0][0] + m[0][1];
            w[e[1]] += m[1][0] + m[1][1];
        }
        w
    }
}

/// Compressed vertex → triangle incidence.
#[derive(Debug, Clone)]
pub struct VertexStar {
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl VertexStar {
    pub fn triangles(&self, v: usize) -> &[usize] {
        &self.items[self.offsets[v]..self.offsets[v + 1]]
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh2D {
    /// Builds a mesh, reorienting triangles counter-clockwise and extracting
    /// boundary edges. Rejects degenerate or non-conforming input.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        tags: Vec<Region>,
        h: f64,
    ) -> Result<Self> {
        if tags.len() != triangles.len() {
            return Err(Error::Argument(format!(
                "{} region tags for {} triangles",
                tags.len(),
                triangles.len()
            )));
        }
        if triangles.is_empty() {
            return Err(Error::Geometry("empty triangulation".into()));
        }
        let nv = vertices.len();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Geometry(format!("triangle {t} references a missing vertex")));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let scale = (0..3)
                .map(|i| {
                    let (p, q) = (vertices[tri[i]], vertices[tri[(i + 1) % 3]]);
                    (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
                })
                .fold(0.0, f64::max);
            if !(a.abs() > 1e-14 * scale) {
                return Err(Error::Geometry(format!("triangle {t} has zero area")));
            }
            if a < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
        for tri in &triangles {
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let e = count.entry(edge_key(a, b)).or_insert((0, [a, b]));
                e.0 += 1;
            }
        }
        let mut boundary_edges = Vec::new();
        for &(n, [a, b]) in count.values() {
            match n {
                1 => {
                    let (p, q) = (vertices[a], vertices[b]);
                    let d = [q[0] - p[0], q[1] - p[1]];
                    let length = d[0].hypot(d[1]);
                    boundary_edges.push(BoundaryEdge {
                        vertices: [a, b],
                        normal: [d[1] / length, -d[0] / length],
                        length,
                    });
                }
                2 => {}
                _ => return Err(Error::Geometry(format!("edge ({a}, {b}) shared by {n} triangles"))),
            }
        }
        boundary_edges.sort_by_key(|e| edge_key(e.vertices[0], e.vertices[1]));
        Ok(Self { vertices, triangles, tags, boundary_edges, h })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[Region] {
        &self.tags
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [p, q, r] = self.corners(t);
        signed_area(p, q, r)
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [p, q, r] = self.corners(t);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Constant gradients of the three P1 hat functions on triangle `t`.
    pub fn gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [p, q, r] = self.corners(t);
        let two_a = 2.0 * signed_area(p, q, r);
        let g = |a: [f64; 2], b: [f64; 2]| [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a];
        [g(q, r), g(r, p), g(p, q)]
    }

    /// Barycentric coordinates of `x` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: [f64; 2]) -> [f64; 3] {
        let [p, q, r] = self.corners(t);
        let a = signed_area(p, q, r);
        [signed_area(x, q, r) / a, signed_area(p, x, r) / a, signed_area(p, q, x) / a]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.n_triangles()).filter(|&t| self.tags[t] == region).map(|t| self.area(t)).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut h = 0.0_f64;
        for t in 0..self.n_triangles() {
            let c = self.corners(t);
            for i in 0..3 {
                let (p, q) = (c[i], c[(i + 1) % 3]);
                h = h.max((p[0] - q[0]).hypot(p[1] - q[1]));
            }
        }
        h
    }

    pub fn vertex_star(&self) -> VertexStar {
        let mut offsets = vec![0usize; self.n_vertices() + 1];
        for tri in &self.triangles {
            for &v in tri {
                offsets[v + 1] += 1;
            }
        }
        for i in 0..self.n_vertices() {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items = vec![0usize; offsets[self.n_vertices()]];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                items[fill[v]] = t;
                fill[v] += 1;
            }
        }
        VertexStar { offsets, items }
    }

    /// For each triangle and local edge `i` (opposite vertex `i`), the
    /// neighbouring triangle across it.
    pub fn neighbors(&self) -> Vec<[Option<usize>; 3]> {
        let mut owner: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut out = vec![[None; 3]; self.n_triangles()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let key = edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3]);
                if let Some((s, j)) = owner.remove(&key) {
                    out[t][i] = Some(s);
                    out[s][j] = Some(t);
                } else {
                    owner.insert(key, (t, i));
                }
            }
        }
        out
    }

    /// Whether vertex `v` touches an INTERIOR triangle.
    pub fn interior_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for (tri, tag) in self.triangles.iter().zip(&self.tags) {
            if *tag == Region::Interior {
                for &v in tri {
                    mask[v] = true;
                }
            }
        }
        mask
    }

    /// The INTERIOR triangles as a standalone mesh, with the map from new to
    /// old vertex indices and from new to old triangle indices.
    pub fn interior_submesh(&self) -> Result<(Mesh2D, Vec<usize>, Vec<usize>)> {
        let mut new_index = vec![usize::MAX; self.n_vertices()];
        let mut old_vertices = Vec::new();
        let mut tris = Vec::new();
        let mut old_tris = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.tags[t] != Region::Interior {
                continue;
            }
            let mut nt = [0; 3];
            for (k, &v) in tri.iter().enumerate() {
                if new_index[v] == usize::MAX {
                    new_index[v] = old_vertices.len();
                    old_vertices.push(v);
                }
                nt[k] = new_index[v];
            }
            tris.push(nt);
            old_tris.push(t);
        }
        if tris.is_empty() {
            return Err(Error::Geometry("mesh has no INTERIOR triangles".into()));
        }
        let verts = old_vertices.iter().map(|&v| self.vertices[v]).collect();
        let tags = vec![Region::Interior; tris.len()];
        Ok((Mesh2D::new(verts, tris, tags, self.h)?, old_vertices, old_tris))
    }

    /// P1 boundary mass data on the outer boundary.
    pub fn boundary_trace_dofs(&self) -> BoundaryTrace {
        let mut vertices: Vec<usize> =
            self.boundary_edges.iter().flat_map(|e| e.vertices).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let edges = self
            .boundary_edges
            .iter()
            .map(|e| {
                let (d, o) = (e.length / 3.0, e.length / 6.0);
                (e.vertices, [[d, o], [o, d]])
            })
            .collect();
        BoundaryTrace { vertices, edges }
    }

    /// Discrete `η`: minimum over outer boundary vertices (with averaged
    /// outward normals) of the cosine between the normal and the direction
    /// from any vertex of the INTERIOR boundary polygon.
    pub fn eta(&self) -> f64 {
        let mut normal = vec![[0.0; 2]; self.n_vertices()];
        for e in &self.boundary_edges {
            for &v in &e.vertices {
                normal[v][0] += e.normal[0];
                normal[v][1] += e.normal[1];
            }
        }
        let nbrs = self.neighbors();
        let mut inner = vec![false; self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.tags[t] != Region::Interior {
                continue;
            }
            for i in 0..3 {
                let across = nbrs[t][i].map(|s| self.tags[s]);
                if across != Some(Region::Interior) {
                    inner[tri[(i + 1) % 3]] = true;
                    inner[tri[(i + 2) % 3]] = true;
                }
            }
        }
        let inner: Vec<[f64; 2]> =
            (0..self.n_vertices()).filter(|&v| inner[v]).map(|v| self.vertices[v]).collect();
        let outer = self.boundary_trace_dofs().vertices;
        let mut eta = f64::INFINITY;
        for v in outer {
            let n = normal[v];
            let nn = n[0].hypot(n[1]);
            let r = self.vertices[v];
            for p in &inner {
                let d = [r[0] - p[0], r[1] - p[1]];
                eta = eta.min((d[0] * n[0] + d[1] * n[1]) / (nn * d[0].hypot(d[1])));
            }
        }
        eta
    }
}

/// Free-function form of [`Mesh2D::boundary_trace_dofs`].
pub fn boundary_trace_dofs(mesh: &Mesh2D) -> BoundaryTrace {
    mesh.boundary_trace_dofs()
}
