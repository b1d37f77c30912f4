//! Coefficients on the extended domain, the extension operator and the
//! reflection boundary rule.

use crate::angular::ScatteringKernel;
use crate::error::{Error, Result};
use crate::mesh::{GeometrySpec, Mesh2D, Region};

/// A homogeneous material: absorption and scattering kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub mu: f64,
    pub kernel: ScatteringKernel,
}

impl Material {
    pub fn new(mu: f64, kernel: ScatteringKernel) -> Self {
        Self { mu, kernel }
    }
}

/// Data on the original domain, sampled at triangle centroids.
pub struct Medium<'a> {
    pub materials: Vec<Material>,
    /// Index into `materials` for a point of the original domain.
    pub material_at: Box<dyn Fn([f64; 2]) -> usize + Send + Sync + 'a>,
    /// Isotropic source density `q(r)`.
    pub source: Box<dyn Fn([f64; 2]) -> f64 + Send + Sync + 'a>,
}

impl<'a> Medium<'a> {
    pub fn homogeneous(
        material: Material,
        source: impl Fn([f64; 2]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Self { materials: vec![material], material_at: Box::new(|_| 0), source: Box::new(source) }
    }
}

/// Piecewise-constant coefficients on the extended domain.
///
/// The layer carries absorption `a`, no scattering and no source.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportCoefficients {
    mu: Vec<f64>,
    /// Distinct kernels; the last one is the zero kernel used on the layer.
    kernels: Vec<ScatteringKernel>,
    kernel_of: Vec<usize>,
    source: Vec<f64>,
    a: f64,
    ell: f64,
    gamma: f64,
    big_gamma: f64,
}

/// `a = -ln(target) / ℓ` for a target attenuation `e^{-aℓ}` in `(0, 1]`.
pub fn layer_absorption(target: f64, ell: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::Argument(format!("attenuation target must lie in (0, 1], got {target}")));
    }
    if !(ell > 0.0) {
        return Err(Error::Argument(format!("layer thickness must be positive, got {ell}")));
    }
    Ok(-target.ln() / ell)
}

/// Samples `medium` at the centroids of INTERIOR triangles and extends it to
/// the layer with absorption `a`.
pub fn extend_coefficients(
    mesh: &Mesh2D,
    spec: &GeometrySpec,
    medium: &Medium<'_>,
    a: f64,
) -> Result<TransportCoefficients> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Argument(format!("layer absorption must be finite and >= 0, got {a}")));
    }
    for (i, m) in medium.materials.iter().enumerate() {
        if !(m.mu >= 0.0 && m.mu.is_finite()) {
            return Err(Error::Model(format!("material {i}: absorption {} is not >= 0", m.mu)));
        }
        let s0 = m.kernel.total();
        if s0 > m.mu * (1.0 + 1e-12) {
            return Err(Error::Model(format!(
                "material {i}: scattering {s0} exceeds absorption {}",
                m.mu
            )));
        }
    }
    let n = mesh.n_triangles();
    let layer_kernel = medium.materials.len();
    let mut kernels: Vec<ScatteringKernel> = medium.materials.iter().map(|m| m.kernel.clone()).collect();
    kernels.push(ScatteringKernel::zero());
    let mut mu = Vec::with_capacity(n);
    let mut kernel_of = Vec::with_capacity(n);
    let mut source = Vec::with_capacity(n);
    for t in 0..n {
        match mesh.tags()[t] {
            Region::Interior => {
                let c = mesh.centroid(t);
                let k = (medium.material_at)(c);
                let mat = medium.materials.get(k).ok_or_else(|| {
                    Error::Argument(format!("material index {k} out of range at {c:?}"))
                })?;
                let q = (medium.source)(c);
                if !q.is_finite() {
                    return Err(Error::Model(format!("source is not finite at {c:?}")));
                }
                mu.push(mat.mu);
                kernel_of.push(k);
                source.push(q);
            }
            Region::Layer => {
                mu.push(a);
                kernel_of.push(layer_kernel);
                source.push(0.0);
            }
        }
    }
    let gamma = (0..n)
        .map(|t| mu[t] - kernels[kernel_of[t]].max_eigenvalue().max(0.0))
        .fold(f64::INFINITY, f64::min);
    let big_gamma = mu.iter().copied().fold(0.0, f64::max);
    if !(gamma > 0.0) {
        log::warn!("coercivity bound gamma = {gamma:.3e} is not positive; the system may be singular");
    }
    Ok(TransportCoefficients {
        mu,
        kernels,
        kernel_of,
        source,
        a,
        ell: spec.layer_thickness(),
        gamma,
        big_gamma,
    })
}

impl TransportCoefficients {
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Isotropic source density per triangle.
    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn kernel(&self, t: usize) -> &ScatteringKernel {
        &self.kernels[self.kernel_of[t]]
    }

    /// Scattering eigenvalue `σ_l` on triangle `t`.
    pub fn sigma(&self, t: usize, l: usize) -> f64 {
        self.kernel(t).eigenvalue(l)
    }

    /// `μ_T - σ_{l,T}`.
    pub fn collision(&self, t: usize, l: usize) -> f64 {
        self.mu[t] - self.sigma(t, l)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// `e^{-aℓ}`.
    pub fn attenuation(&self) -> f64 {
        (-self.a * self.ell).exp()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[allow(non_snake_case)]
    pub fn Gamma(&self) -> f64 {
        self.big_gamma
    }

    /// Whether the uniform absorption assumption holds.
    pub fn is_coercive(&self) -> bool {
        self.gamma > 0.0
    }

    pub fn is_pure_absorber(&self) -> bool {
        self.kernels.iter().all(ScatteringKernel::is_zero)
    }

    /// Largest `σ_0 / μ` over triangles with `μ > 0`.
    pub fn scattering_ratio(&self) -> f64 {
        (0..self.mu.len())
            .filter(|&t| self.mu[t] > 0.0)
            .map(|t| self.sigma(t, 0) / self.mu[t])
            .fold(0.0, f64::max)
    }

    /// The same coefficients with a different layer absorption.
    pub fn with_layer_absorption(&self, a: f64, mesh: &Mesh2D) -> Self {
        let mut out = self.clone();
        for t in 0..mesh.n_triangles() {
            if mesh.tags()[t] == Region::Layer {
                out.mu[t] = a;
            }
        }
        out.a = a;
        out.gamma = (0..out.mu.len())
            .map(|t| out.mu[t] - out.kernel(t).max_eigenvalue().max(0.0))
            .fold(f64::INFINITY, f64::min);
        out.big_gamma = out.mu.iter().copied().fold(0.0, f64::max);
        out
    }
}

/// `(E u)(r, s) = e^{-aℓ(r,s)} u(r - ℓ(r,s) s, s)` for finite `ℓ(r,s)`, else 0.
///
/// `trace` is evaluated at points of the inner boundary.
pub fn extension_apply(
    spec: &GeometrySpec,
    a: f64,
    trace: impl Fn([f64; 2], [f64; 3]) -> f64,
    r: [f64; 2],
    s: [f64; 3],
) -> Result<f64> {
    let l = spec.ray_exit_distance(r, s)?;
    if !l.is_finite() {
        return Ok(0.0);
    }
    let hit = [r[0] - l * s[0], r[1] - l * s[1]];
    Ok((-a * l).exp() * trace(hit, s))
}

/// The reflection factor `(s·n + 1)/(s·n - 1)` for inflow `s·n ∈ [-1, 0)`.
pub fn reflect_factor(s_dot_n: f64) -> Result<f64> {
    if !(-1.0 - 1e-12..0.0).contains(&s_dot_n) {
        return Err(Error::Argument(format!("reflection needs s·n in [-1, 0), got {s_dot_n}")));
    }
    Ok((s_dot_n + 1.0) / (s_dot_n - 1.0))
}

/// Inflow value at `(r, s)` from the outgoing value `g(r, -s)`.
pub fn reflect(g_outgoing: f64, s_dot_n: f64) -> Result<f64> {
    Ok(reflect_factor(s_dot_n)? * g_outgoing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use approx::assert_abs_diff_eq;

    fn disk_case(a: f64) -> (Mesh2D, TransportCoefficients) {
        let spec = GeometrySpec::concentric_disks(1.0, 1.2).unwrap();
        let mesh = build_mesh(&spec, 0.2).unwrap();
        let medium = Medium::homogeneous(
            Material::new(10.1, ScatteringKernel::isotropic(10.0 / (4.0 * std::f64::consts::PI)).unwrap()),
            |p| (-5.0 * ((p[0] - 0.75).powi(2) + p[1] * p[1])).exp(),
        );
        let c = extend_coefficients(&mesh, &spec, &medium, a).unwrap();
        (mesh, c)
    }

    #[test]
    fn layer_absorption_from_target() {
        assert_abs_diff_eq!(layer_absorption(0.25, 0.2).unwrap(), 10.0 * 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(layer_absorption(0.5, 0.2).unwrap(), 5.0 * 2f64.ln(), epsilon = 1e-12);
        assert_eq!(layer_absorption(1.0, 0.2).unwrap(), 0.0);
        assert!(layer_absorption(0.0, 0.2).is_err());
        assert!(layer_absorption(1.5, 0.2).is_err());
    }

    #[test]
    fn disk_gamma_and_layer_values() {
        let a = layer_absorption(0.5, 0.2).unwrap();
        let (mesh, c) = disk_case(a);
        assert_abs_diff_eq!(c.gamma(), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(c.Gamma(), 10.1);
        for t in 0..mesh.n_triangles() {
            if mesh.tags()[t] == Region::Layer {
                assert_abs_diff_eq!(c.mu()[t], 3.4657359027997265, epsilon = 1e-12);
                assert_eq!(c.source()[t], 0.0);
                assert!(c.kernel(t).is_zero());
            } else {
                assert_abs_diff_eq!(c.collision(t, 0), 0.1, epsilon = 1e-12);
                assert_abs_diff_eq!(c.collision(t, 2), 10.1, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_layer_flags_gamma() {
        let (_, c) = disk_case(0.0);
        assert_eq!(c.gamma(), 0.0);
        assert!(!c.is_coercive());
    }

    #[test]
    fn zero_kernel_gamma_is_min_mu() {
        let spec = GeometrySpec::concentric_disks(1.0, 1.2).unwrap();
        let mesh = build_mesh(&spec, 0.2).unwrap();
        let medium = Medium::homogeneous(Material::new(2.0, ScatteringKernel::zero()), |_| 1.0);
        let c = extend_coefficients(&mesh, &spec, &medium, 5.0).unwrap();
        assert_eq!(c.gamma(), 2.0);
        assert!(c.is_pure_absorber());
    }

    #[test]
    fn supercritical_medium_is_a_model_error() {
        let spec = GeometrySpec::concentric_disks(1.0, 1.2).unwrap();
        let mesh = build_mesh(&spec, 0.2).unwrap();
        let k = ScatteringKernel::isotropic(2.0 / (4.0 * std::f64::consts::PI)).unwrap();
        let medium = Medium::homogeneous(Material::new(1.0, k), |_| 1.0);
        assert!(matches!(extend_coefficients(&mesh, &spec, &medium, 1.0), Err(Error::Model(_))));
    }

    #[test]
    fn extension_examples() {
        let spec = GeometrySpec::concentric_disks(1.0, 1.2).unwrap();
        let one = |_: [f64; 2], _: [f64; 3]| 1.0;
        let e = extension_apply(&spec, 5.0, one, [1.2, 0.0], [0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e, 0.0);
        let e = extension_apply(&spec, 0.0, one, [1.2, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(e, 1.0);
        let e = extension_apply(&spec, 5.0, one, [1.2, 0.0], [1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(e, (-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn reflection_examples() {
        assert_abs_diff_eq!(reflect(3.0, -1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(reflect(1.0, -0.6).unwrap(), -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(reflect(1.0, -1e-12).unwrap(), -1.0, epsilon = 1e-11);
        assert!(reflect(1.0, 0.0).is_err());
        assert!(reflect(1.0, 0.3).is_err());
    }
}
