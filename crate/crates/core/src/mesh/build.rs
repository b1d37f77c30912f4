use std::f64::consts::PI;

use super::{GeometrySpec, Mesh2D, Region, Shape};
use crate::error::{Error, Result};

/// Structured triangulation of the extended domain with mesh size about `h`.
///
/// Rectangles in rectangles give a criss-cross tensor grid whose lines include
/// the inner rectangle's sides. Concentric disks give a ring template with
/// `6k` vertices on ring `k`, all on exact circles. Other combinations are
/// rejected.
pub fn build_mesh(spec: &GeometrySpec, h: f64) -> Result<Mesh2D> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Argument(format!("mesh size must be positive, got {h}")));
    }
    match (spec.inner, spec.outer) {
        (Shape::Rectangle { min: a0, max: a1 }, Shape::Rectangle { min: b0, max: b1 }) => {
            let xs = breakpoints(&[b0[0], a0[0], a1[0], b1[0]], h);
            let ys = breakpoints(&[b0[1], a0[1], a1[1], b1[1]], h);
            rectangle_grid(&xs, &ys, spec.inner, h)
        }
        (Shape::Disk { center: c1, radius: r1 }, Shape::Disk { center: c2, radius: r2 }) => {
            if (c1[0] - c2[0]).hypot(c1[1] - c2[1]) > 1e-12 * r2 {
                return Err(Error::Geometry("only concentric disks are supported".into()));
            }
            ring_mesh(c1, r1, r2, h)
        }
        _ => Err(Error::Geometry(
            "unsupported geometry: use rectangle/rectangle or concentric disk/disk".into(),
        )),
    }
}

fn breakpoints(knots: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![knots[0]];
    for w in knots.windows(2) {
        let n = ((w[1] - w[0]) / h - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
    }
    out
}

fn rectangle_grid(xs: &[f64], ys: &[f64], inner: Shape, h: f64) -> Result<Mesh2D> {
    let (nx, ny) = (xs.len(), ys.len());
    let mut vertices = Vec::with_capacity(nx * ny);
    for &y in ys {
        for &x in xs {
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    let mut tags = Vec::with_capacity(triangles.capacity());
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
            let mid = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            let tag = if inner.contains(mid) { Region::Interior } else { Region::Layer };
            tags.push(tag);
            tags.push(tag);
        }
    }
    Mesh2D::new(vertices, triangles, tags, h)
}

fn ring_mesh(center: [f64; 2], r1: f64, r2: f64, h: f64) -> Result<Mesh2D> {
    let n1 = (r1 / h - 1e-9).ceil().max(1.0) as usize;
    let n2 = ((r2 - r1) / h - 1e-9).ceil().max(1.0) as usize;
    let radius = |k: usize| {
        if k <= n1 {
            r1 * k as f64 / n1 as f64
        } else {
            r1 + (r2 - r1) * (k - n1) as f64 / n2 as f64
        }
    };

    let mut vertices = vec![center];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=n1 + n2 {
        let r = radius(k);
        let n = 6 * k;
        let ring = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                vertices.push([center[0] + r * t.cos(), center[1] + r * t.sin()]);
                vertices.len() - 1
            })
            .collect();
        rings.push(ring);
    }

    let mut triangles = Vec::new();
    let mut tags = Vec::new();
    for k in 1..rings.len() {
        let tag = if k <= n1 { Region::Interior } else { Region::Layer };
        let before = triangles.len();
        stitch(&rings[k - 1], &rings[k], &mut triangles);
        tags.resize(tags.len() + triangles.len() - before, tag);
    }
    Mesh2D::new(vertices, triangles, tags, h)
}

/// Triangulates the annulus between two rings whose first vertex sits at
/// angle zero, advancing along whichever ring has the earlier next gap.
fn stitch(a: &[usize], b: &[usize], out: &mut Vec<[usize; 3]>) {
    let (na, nb) = (a.len(), b.len());
    if na == 1 {
        for j in 0..nb {
            out.push([a[0], b[j], b[(j + 1) % nb]]);
        }
        return;
    }
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_a = if i == na {
            false
        } else if j == nb {
            true
        } else {
            (i as f64 + 0.5) / (na as f64) < (j as f64 + 0.5) / (nb as f64)
        };
        if advance_a {
            out.push([a[i], a[(i + 1) % na], b[j % nb]]);
            i += 1;
        } else {
            out.push([a[i % na], b[j], b[(j + 1) % nb]]);
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lattice_rectangle_counts() {
        let g = GeometrySpec::new(
            Shape::rectangle(0.0, 0.0, 7.0, 7.0),
            Shape::rectangle(-1.0, -1.0, 8.0, 8.0),
        )
        .unwrap();
        let m = build_mesh(&g, 1.0).unwrap();
        assert_eq!(m.n_vertices(), 100);
        assert_eq!(m.n_triangles(), 162);
        assert_relative_eq!(m.region_area(Region::Interior), 49.0, epsilon = 1e-12);
        assert_relative_eq!(m.total_area(), 81.0, epsilon = 1e-12);
    }

    #[test]
    fn disk_mesh_is_tagged_and_has_exact_boundary() {
        let g = GeometrySpec::concentric_disks(1.0, 1.2).unwrap();
        let m = build_mesh(&g, 0.1).unwrap();
        assert!(m.tags().contains(&Region::Interior) && m.tags().contains(&Region::Layer));
        for e in m.boundary_edges() {
            for &v in &e.vertices {
                let p = m.vertices()[v];
                assert_relative_eq!(p[0].hypot(p[1]), 1.2, epsilon = 1e-14);
            }
        }
        let exact = PI * 1.44;
        assert!((m.total_area() - exact).abs() < 0.02 * exact);
        assert!(m.max_edge_length() < 0.2);
    }

    #[test]
    fn non_concentric_and_mixed_shapes_rejected() {
        let g = GeometrySpec::new(Shape::disk(0.1, 0.0, 1.0), Shape::disk(0.0, 0.0, 1.5)).unwrap();
        assert!(matches!(build_mesh(&g, 0.1), Err(Error::Geometry(_))));
        let g = GeometrySpec::new(Shape::disk(0.0, 0.0, 1.0), Shape::rectangle(-2.0, -2.0, 2.0, 2.0))
            .unwrap();
        assert!(matches!(build_mesh(&g, 0.1), Err(Error::Geometry(_))));
        let g = GeometrySpec::concentric_disks(1.0, 1.2).unwrap();
        assert!(matches!(build_mesh(&g, 0.0), Err(Error::Argument(_))));
    }
}
