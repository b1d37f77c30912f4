use crate::error::{Error, Result};

/// A convex planar shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
}

impl Shape {
    pub fn disk(cx: f64, cy: f64, radius: f64) -> Self {
        Shape::Disk { center: [cx, cy], radius }
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Shape::Rectangle { min: [x0, y0], max: [x1, y1] }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Shape::Disk { radius, center } => {
                if !(radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::Geometry(format!("invalid disk radius {radius}")));
                }
            }
            Shape::Rectangle { min, max } => {
                if !(max[0] > min[0] && max[1] > min[1]) {
                    return Err(Error::Geometry(format!("degenerate rectangle {min:?}..{max:?}")));
                }
            }
        }
        Ok(())
    }

    /// Whether `p` lies in the open shape.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.signed_distance(p) < 0.0
    }

    /// Negative inside, positive outside. Exact for disks; for rectangles the
    /// outside value is the Euclidean distance and the inside value minus the
    /// distance to the nearest side.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            Shape::Disk { center, radius } => {
                ((p[0] - center[0]).hypot(p[1] - center[1])) - radius
            }
            Shape::Rectangle { min, max } => {
                let dx = (min[0] - p[0]).max(p[0] - max[0]);
                let dy = (min[1] - p[1]).max(p[1] - max[1]);
                if dx <= 0.0 && dy <= 0.0 {
                    dx.max(dy)
                } else {
                    dx.max(0.0).hypot(dy.max(0.0))
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Shape::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match *self {
            Shape::Disk { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            Shape::Rectangle { min, max } => 2.0 * ((max[0] - min[0]) + (max[1] - min[1])),
        }
    }

    /// Smallest `t >= 0` with `r - t d` in the closed shape, `d` a unit vector.
    pub fn backward_hit(&self, r: [f64; 2], d: [f64; 2]) -> Option<f64> {
        match *self {
            Shape::Disk { center, radius } => {
                let p = [r[0] - center[0], r[1] - center[1]];
                let pd = p[0] * d[0] + p[1] * d[1];
                let pp = p[0] * p[0] + p[1] * p[1];
                if pp <= radius * radius {
                    return Some(0.0);
                }
                let disc = pd * pd - pp + radius * radius;
                if disc < 0.0 {
                    return None;
                }
                let t = pd - disc.sqrt();
                (t >= 0.0).then_some(t)
            }
            Shape::Rectangle { min, max } => {
                // q(t) = r - t d
                let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
                for i in 0..2 {
                    let v = -d[i];
                    if v == 0.0 {
                        if r[i] < min[i] || r[i] > max[i] {
                            return None;
                        }
                    } else {
                        let t0 = (min[i] - r[i]) / v;
                        let t1 = (max[i] - r[i]) / v;
                        lo = lo.max(t0.min(t1));
                        hi = hi.min(t0.max(t1));
                    }
                }
                (lo <= hi).then_some(lo)
            }
        }
    }

    /// Point on the boundary at parameter `u in [0, 1)` with its outward normal.
    fn boundary_sample(&self, u: f64) -> ([f64; 2], [f64; 2]) {
        match *self {
            Shape::Disk { center, radius } => {
                let t = 2.0 * std::f64::consts::PI * u;
                let n = [t.cos(), t.sin()];
                ([center[0] + radius * n[0], center[1] + radius * n[1]], n)
            }
            Shape::Rectangle { min, max } => {
                let (w, h) = (max[0] - min[0], max[1] - min[1]);
                let mut s = u * 2.0 * (w + h);
                if s < w {
                    return ([min[0] + s, min[1]], [0.0, -1.0]);
                }
                s -= w;
                if s < h {
                    return ([max[0], min[1] + s], [1.0, 0.0]);
                }
                s -= h;
                if s < w {
                    return ([max[0] - s, max[1]], [0.0, 1.0]);
                }
                s -= w;
                ([min[0], max[1] - s], [-1.0, 0.0])
            }
        }
    }
}

/// The original domain `R` and its extension `R^ℓ`, both convex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySpec {
    pub inner: Shape,
    pub outer: Shape,
}

impl GeometrySpec {
    /// Validates that `inner` is compactly contained in `outer`.
    pub fn new(inner: Shape, outer: Shape) -> Result<Self> {
        inner.validate()?;
        outer.validate()?;
        let spec = Self { inner, outer };
        let ell = spec.layer_thickness();
        if !(ell > 0.0) {
            return Err(Error::Geometry(format!(
                "inner domain is not compactly contained in the extended domain (gap {ell:.3e})"
            )));
        }
        Ok(spec)
    }

    /// The disk/disk setup `B_r(0) ⊂ B_R(0)`.
    pub fn concentric_disks(inner_radius: f64, outer_radius: f64) -> Result<Self> {
        Self::new(Shape::disk(0.0, 0.0, inner_radius), Shape::disk(0.0, 0.0, outer_radius))
    }

    /// `ℓ = dist(∂R^ℓ, R)`; nonpositive when containment fails.
    pub fn layer_thickness(&self) -> f64 {
        match (self.inner, self.outer) {
            (Shape::Disk { center: c1, radius: r1 }, Shape::Disk { center: c2, radius: r2 }) => {
                r2 - (c1[0] - c2[0]).hypot(c1[1] - c2[1]) - r1
            }
            (Shape::Rectangle { min: a0, max: a1 }, Shape::Rectangle { min: b0, max: b1 }) => {
                (a0[0] - b0[0]).min(a0[1] - b0[1]).min(b1[0] - a1[0]).min(b1[1] - a1[1])
            }
            (Shape::Disk { center, radius }, Shape::Rectangle { min, max }) => (center[0] - min[0])
                .min(center[1] - min[1])
                .min(max[0] - center[0])
                .min(max[1] - center[1])
                - radius,
            (Shape::Rectangle { min, max }, Shape::Disk { center, radius }) => {
                let far = [min, max, [min[0], max[1]], [max[0], min[1]]]
                    .iter()
                    .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
                    .fold(0.0, f64::max);
                radius - far
            }
        }
    }

    /// `η`: minimum over outer boundary points of the cosine between the
    /// outward normal and any in-plane direction whose backward ray meets `R`,
    /// estimated on `samples` boundary points of each shape.
    pub fn eta(&self, samples: usize) -> f64 {
        let n = samples.max(8);
        let inner: Vec<[f64; 2]> =
            (0..n).map(|i| self.inner.boundary_sample(i as f64 / n as f64).0).collect();
        (0..n)
            .map(|i| {
                let (r, nrm) = self.outer.boundary_sample((i as f64 + 0.5) / n as f64);
                inner
                    .iter()
                    .map(|v| {
                        let d = [r[0] - v[0], r[1] - v[1]];
                        (d[0] * nrm[0] + d[1] * nrm[1]) / d[0].hypot(d[1])
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `ℓ(r, s)`: 3D travel distance along `-s` from `r` to the closed inner
    /// domain, or `INFINITY` if the backward ray misses it.
    pub fn ray_exit_distance(&self, r: [f64; 2], s: [f64; 3]) -> Result<f64> {
        if self.inner.signed_distance(r) < -1e-12 {
            return Err(Error::Domain(format!("point {r:?} lies inside the original domain")));
        }
        let rho = s[0].hypot(s[1]);
        if rho < 1e-14 {
            return Ok(f64::INFINITY);
        }
        let d = [s[0] / rho, s[1] / rho];
        Ok(self.inner.backward_hit(r, d).map_or(f64::INFINITY, |t| t / rho))
    }
}

/// Free-function form of [`GeometrySpec::ray_exit_distance`].
pub fn ray_exit_distance(spec: &GeometrySpec, r: [f64; 2], s: [f64; 3]) -> Result<f64> {
    spec.ray_exit_distance(r, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn disk_case() -> GeometrySpec {
        GeometrySpec::concentric_disks(1.0, 1.2).unwrap()
    }

    #[test]
    fn layer_thickness_of_examples() {
        assert_abs_diff_eq!(disk_case().layer_thickness(), 0.2, epsilon = 1e-15);
        let lattice =
            GeometrySpec::new(Shape::rectangle(0.0, 0.0, 7.0, 7.0), Shape::rectangle(-1.0, -1.0, 8.0, 8.0))
                .unwrap();
        assert_abs_diff_eq!(lattice.layer_thickness(), 1.0);
    }

    #[test]
    fn containment_is_enforced() {
        let e = GeometrySpec::concentric_disks(1.2, 1.0).unwrap_err();
        assert!(matches!(e, Error::Geometry(_)));
        let e = GeometrySpec::new(Shape::disk(0.5, 0.0, 1.0), Shape::disk(0.0, 0.0, 1.2)).unwrap_err();
        assert!(matches!(e, Error::Geometry(_)));
    }

    #[test]
    fn exit_distance_examples() {
        let g = disk_case();
        assert_abs_diff_eq!(g.ray_exit_distance([1.1, 0.0], [1.0, 0.0, 0.0]).unwrap(), 0.1, epsilon = 1e-14);
        assert_eq!(g.ray_exit_distance([1.2, 0.0], [0.0, 1.0, 0.0]).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(g.ray_exit_distance([1.2, 0.0], [1.0, 0.0, 0.0]).unwrap(), 0.2, epsilon = 1e-14);
        assert_eq!(g.ray_exit_distance([1.2, 0.0], [0.0, 0.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(matches!(g.ray_exit_distance([0.5, 0.0], [1.0, 0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn out_of_plane_directions_travel_further() {
        let g = disk_case();
        let c = (0.5_f64).sqrt();
        let l = g.ray_exit_distance([1.2, 0.0], [c, 0.0, c]).unwrap();
        assert_abs_diff_eq!(l, 0.2 / c, epsilon = 1e-13);
    }

    #[test]
    fn eta_for_concentric_disks() {
        let eta = disk_case().eta(720);
        let exact = (1.0 - 1.0 / 1.44_f64).sqrt();
        assert!((eta - exact).abs() < 1e-3, "eta = {eta}");
    }

    #[test]
    fn rectangle_backward_hit() {
        let r = Shape::rectangle(0.0, 0.0, 7.0, 7.0);
        assert_abs_diff_eq!(r.backward_hit([8.0, 3.0], [1.0, 0.0]).unwrap(), 1.0);
        assert!(r.backward_hit([8.0, 3.0], [-1.0, 0.0]).is_none());
        assert!(r.backward_hit([8.0, 3.0], [0.0, 1.0]).is_none());
    }
}
