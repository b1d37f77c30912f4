use std::collections::HashMap;

use super::{edge_key, Mesh2D};
use crate::error::{Error, Result};

/// Parent data of one uniform refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementMap {
    /// Number of coarse vertices; they keep their indices on the fine mesh.
    pub coarse_vertices: usize,
    /// Parent edge of fine vertex `coarse_vertices + i`.
    pub midpoint_parents: Vec<[usize; 2]>,
    /// Parent triangle of each fine triangle.
    pub triangle_parent: Vec<usize>,
}

impl RefinementMap {
    pub fn fine_vertices(&self) -> usize {
        self.coarse_vertices + self.midpoint_parents.len()
    }

    /// Nested P1 interpolation of `stride` interleaved components.
    pub fn prolong_p1(&self, coarse: &[f64], stride: usize) -> Vec<f64> {
        let mut fine = Vec::with_capacity(self.fine_vertices() * stride);
        fine.extend_from_slice(&coarse[..self.coarse_vertices * stride]);
        for &[a, b] in &self.midpoint_parents {
            for k in 0..stride {
                fine.push(0.5 * (coarse[a * stride + k] + coarse[b * stride + k]));
            }
        }
        fine
    }

    /// Transpose of [`prolong_p1`](Self::prolong_p1).
    pub fn restrict_p1(&self, fine: &[f64], stride: usize) -> Vec<f64> {
        let mut coarse = fine[..self.coarse_vertices * stride].to_vec();
        for (i, &[a, b]) in self.midpoint_parents.iter().enumerate() {
            let m = (self.coarse_vertices + i) * stride;
            for k in 0..stride {
                let v = 0.5 * fine[m + k];
                coarse[a * stride + k] += v;
                coarse[b * stride + k] += v;
            }
        }
        coarse
    }

    /// Nested P0 injection of `stride` interleaved components.
    pub fn prolong_p0(&self, coarse: &[f64], stride: usize) -> Vec<f64> {
        let mut fine = Vec::with_capacity(self.triangle_parent.len() * stride);
        for &p in &self.triangle_parent {
            fine.extend_from_slice(&coarse[p * stride..(p + 1) * stride]);
        }
        fine
    }
}

/// Splits each triangle into four through its edge midpoints.
pub fn uniform_refine(mesh: &Mesh2D) -> Mesh2D {
    uniform_refine_with_map(mesh).0
}

/// [`uniform_refine`] together with the parent map.
pub fn uniform_refine_with_map(mesh: &Mesh2D) -> (Mesh2D, RefinementMap) {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint_parents = Vec::new();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut get = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| {
        *mid.entry(edge_key(a, b)).or_insert_with(|| {
            let (p, q) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            midpoint_parents.push([a, b]);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut tags = Vec::with_capacity(4 * mesh.n_triangles());
    let mut triangle_parent = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let ab = get(a, b, &mut vertices);
        let bc = get(b, c, &mut vertices);
        let ca = get(c, a, &mut vertices);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        tags.extend([mesh.tags()[t]; 4]);
        triangle_parent.extend([t; 4]);
    }
    let fine = Mesh2D::new(vertices, triangles, tags, 0.5 * mesh.h())
        .expect("refinement of a valid mesh is valid");
    (fine, RefinementMap { coarse_vertices: nv, midpoint_parents, triangle_parent })
}

/// A chain of uniformly refined meshes, coarsest first.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    meshes: Vec<Mesh2D>,
    maps: Vec<RefinementMap>,
}

impl Hierarchy {
    pub fn new(base: Mesh2D, refinements: usize) -> Self {
        let mut meshes = vec![base];
        let mut maps = Vec::with_capacity(refinements);
        for _ in 0..refinements {
            let (fine, map) = uniform_refine_with_map(meshes.last().unwrap());
            meshes.push(fine);
            maps.push(map);
        }
        Self { meshes, maps }
    }

    pub fn levels(&self) -> usize {
        self.meshes.len()
    }

    pub fn mesh(&self, level: usize) -> &Mesh2D {
        &self.meshes[level]
    }

    pub fn finest(&self) -> &Mesh2D {
        self.meshes.last().unwrap()
    }

    /// Map from `level - 1` to `level`.
    pub fn map(&self, level: usize) -> &RefinementMap {
        &self.maps[level - 1]
    }

    /// Level whose nominal mesh size matches `h` to a relative `1e-9`.
    pub fn level_of(&self, h: f64) -> Result<usize> {
        self.meshes
            .iter()
            .position(|m| (m.h() - h).abs() <= 1e-9 * h)
            .ok_or_else(|| Error::Argument(format!("mesh size {h} is not a level of the hierarchy")))
    }

    /// Prolongs P1 data from `from` to `to >= from`.
    pub fn prolong_p1(&self, data: &[f64], stride: usize, from: usize, to: usize) -> Vec<f64> {
        let mut v = data.to_vec();
        for l in from + 1..=to {
            v = self.map(l).prolong_p1(&v, stride);
        }
        v
    }

    /// Prolongs P0 data from `from` to `to >= from`.
    pub fn prolong_p0(&self, data: &[f64], stride: usize, from: usize, to: usize) -> Vec<f64> {
        let mut v = data.to_vec();
        for l in from + 1..=to {
            v = self.map(l).prolong_p0(&v, stride);
        }
        v
    }
}
