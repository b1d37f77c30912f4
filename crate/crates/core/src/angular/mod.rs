//! Angular discretization: real spherical harmonics split into even and odd
//! degrees, sphere quadrature, the `s_i` coupling matrices and the
//! eigenvalues of the scattering operator.

mod coupling;
mod harmonics;
mod quadrature;
mod scattering;

pub use coupling::{coupling_matrices, AngularCouplings, CouplingMatrix};
pub use harmonics::{eval_all, eval_real_sph_harm, harmonic_count, lm_index};
pub use quadrature::{gauss_legendre, SphereQuadrature};
pub use scattering::{scattering_eigenvalues, ScatteringKernel};

use crate::error::{Error, Result};

/// A spherical-harmonic index with `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub l: usize,
    pub m: i32,
}

/// Even and odd spherical-harmonic index sets of a truncation order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularBasis {
    order: usize,
    even: Vec<Mode>,
    odd: Vec<Mode>,
}

impl AngularBasis {
    /// Truncation order `N` (odd).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn even_modes(&self) -> &[Mode] {
        &self.even
    }

    pub fn odd_modes(&self) -> &[Mode] {
        &self.odd
    }

    pub fn n_plus(&self) -> usize {
        self.even.len()
    }

    pub fn n_minus(&self) -> usize {
        self.odd.len()
    }

    /// Position of `(l, m)` among the even modes.
    pub fn even_position(&self, l: usize, m: i32) -> Option<usize> {
        if l % 2 != 0 || l > self.order || m.unsigned_abs() as usize > l {
            return None;
        }
        // l even: degrees 0, 2, .., l-2 contribute Σ (2j+1) = l(l-1)/2 modes.
        Some(l * (l.max(1) - 1) / 2 + (m + l as i32) as usize)
    }

    /// Position of `(l, m)` among the odd modes.
    pub fn odd_position(&self, l: usize, m: i32) -> Option<usize> {
        if l % 2 != 1 || l > self.order || m.unsigned_abs() as usize > l {
            return None;
        }
        // degrees 1, 3, .., l-2 contribute (l-1)l/2 modes.
        Some((l - 1) * l / 2 + (m + l as i32) as usize)
    }
}

/// Builds the even/odd index sets for an odd truncation order `N >= 1`.
pub fn build_basis(order: usize) -> Result<AngularBasis> {
    if order == 0 || order % 2 == 0 {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for l in 0..=order {
        let target = if l % 2 == 0 { &mut even } else { &mut odd };
        for m in -(l as i32)..=(l as i32) {
            target.push(Mode { l, m });
        }
    }
    Ok(AngularBasis { order, even, odd })
}
