use std::f64::consts::PI;

use super::quadrature::gauss_legendre;
use super::AngularBasis;
use crate::error::{Error, Result};

/// Phase-function kernel `k(t) = Σ_l k_l P_l(t)`, `t = s·s'`, truncated.
///
/// By the Funk–Hecke formula the scattering operator acts on `Y_l^m` by the
/// eigenvalue `σ_l = 4π k_l / (2l + 1)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScatteringKernel {
    legendre: Vec<f64>,
}

impl ScatteringKernel {
    /// A kernel without scattering.
    pub fn zero() -> Self {
        Self { legendre: Vec::new() }
    }

    /// Constant kernel `k(t) = value`, i.e. `σ_0 = 4π value`.
    pub fn isotropic(value: f64) -> Result<Self> {
        Self::from_legendre(vec![value])
    }

    /// Kernel from its Legendre coefficients; rejects kernels that are negative
    /// somewhere on `[-1, 1]`.
    pub fn from_legendre(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Model("kernel coefficients must be finite".into()));
        }
        let kernel = Self { legendre: coeffs };
        let scale = kernel.legendre.iter().map(|c| c.abs()).sum::<f64>();
        let min = kernel.min_value();
        if min < -1e-12 * scale.max(1e-300) {
            return Err(Error::Model(format!(
                "scattering kernel takes negative value {min:.3e} on [-1, 1]"
            )));
        }
        Ok(kernel)
    }

    /// Kernel with prescribed eigenvalues `σ_0, σ_1, ..`.
    pub fn from_eigenvalues(sigma: &[f64]) -> Result<Self> {
        Self::from_legendre(
            sigma
                .iter()
                .enumerate()
                .map(|(l, s)| s * (2 * l + 1) as f64 / (4.0 * PI))
                .collect(),
        )
    }

    /// Henyey–Greenstein phase function scaled to total scattering `sigma0`,
    /// truncated after `terms` Legendre modes.
    pub fn henyey_greenstein(g: f64, sigma0: f64, terms: usize) -> Result<Self> {
        if !(-1.0 < g && g < 1.0) {
            return Err(Error::Model(format!("asymmetry parameter g = {g} outside (-1, 1)")));
        }
        let sigma: Vec<f64> = (0..terms).map(|l| sigma0 * g.powi(l as i32)).collect();
        Self::from_eigenvalues(&sigma)
    }

    pub fn legendre_coefficients(&self) -> &[f64] {
        &self.legendre
    }

    pub fn is_zero(&self) -> bool {
        self.legendre.iter().all(|c| *c == 0.0)
    }

    /// Whether only the `l = 0` coefficient is nonzero.
    pub fn is_isotropic(&self) -> bool {
        self.legendre.iter().skip(1).all(|c| *c == 0.0)
    }

    /// `σ_l`; zero beyond the truncation.
    pub fn eigenvalue(&self, l: usize) -> f64 {
        self.legendre
            .get(l)
            .map_or(0.0, |k| 4.0 * PI * k / (2 * l + 1) as f64)
    }

    /// Total scattering `σ_0 = ∫_S k(s·s') ds'`.
    pub fn total(&self) -> f64 {
        self.eigenvalue(0)
    }

    /// Largest eigenvalue over all degrees (at least zero).
    pub fn max_eigenvalue(&self) -> f64 {
        (0..self.legendre.len()).map(|l| self.eigenvalue(l)).fold(0.0, f64::max)
    }

    /// Evaluates `k(t)` by the Legendre three-term recurrence.
    pub fn eval(&self, t: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, t);
        let mut acc = 0.0;
        for (l, c) in self.legendre.iter().enumerate() {
            let p = match l {
                0 => 1.0,
                1 => t,
                _ => {
                    let lf = l as f64;
                    let p2 = ((2.0 * lf - 1.0) * t * p1 - (lf - 1.0) * p0) / lf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            acc += c * p;
        }
        acc
    }

    fn min_value(&self) -> f64 {
        if self.legendre.len() <= 1 {
            return self.legendre.first().copied().unwrap_or(0.0);
        }
        let n = 64 + 8 * self.legendre.len();
        let (gl, _) = gauss_legendre(self.legendre.len() + 1);
        (0..=n)
            .map(|i| -1.0 + 2.0 * i as f64 / n as f64)
            .chain(gl)
            .map(|t| self.eval(t))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues `σ_l` for `l = 0..=N`.
pub fn scattering_eigenvalues(kernel: &ScatteringKernel, basis: &AngularBasis) -> Vec<f64> {
    (0..=basis.order()).map(|l| kernel.eigenvalue(l)).collect()
}
