use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Product quadrature on the unit sphere.
///
/// Gauss–Legendre in `cos θ` times the uniform trapezoid rule in azimuth.
/// Weights sum to `4π`.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

impl SphereQuadrature {
    /// Product rule with `n_polar` Gauss points and `n_azimuth` trapezoid points.
    ///
    /// Azimuths are `φ_j = 2π (j + offset) / n_azimuth`.
    pub fn product(n_polar: usize, n_azimuth: usize, offset: f64) -> Result<Self> {
        if n_polar == 0 || n_azimuth == 0 {
            return Err(Error::Argument("quadrature orders must be positive".into()));
        }
        let (xs, ws) = gauss_legendre(n_polar);
        let dphi = 2.0 * PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (&z, &w) in xs.iter().zip(&ws) {
            let r = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..n_azimuth {
                let phi = dphi * (j as f64 + offset);
                nodes.push([r * phi.cos(), r * phi.sin(), z]);
                weights.push(w * dphi);
            }
        }
        Ok(Self { nodes, weights })
    }

    /// Rule integrating every spherical polynomial of degree `<= 2N + 2` exactly.
    pub fn for_order(order: usize) -> Result<Self> {
        let degree = 2 * order + 3;
        Self::product(degree.div_ceil(2), degree, 0.0)
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut([f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(s, w)| w * f(*s)).sum()
    }
}
