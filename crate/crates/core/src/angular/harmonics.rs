//! Real, L²(S²)-orthonormal spherical harmonics without the Condon–Shortley phase.
//!
//! `Y_l^0 = q_l^0(z)`, `Y_l^m = √2 q_l^m(z) Re((x + iy)^m)` and
//! `Y_l^{-m} = √2 q_l^m(z) Im((x + iy)^m)` for `m > 0`, where `q_l^m` is the
//! normalized associated Legendre function with the `sin^m θ` factor removed.
//! Working with the reduced functions avoids dividing by `sin θ` at the poles.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Position of `(l, m)` in the lexicographically ordered list of all harmonics.
#[inline]
pub fn lm_index(l: usize, m: i32) -> usize {
    ((l * l + l) as i64 + m as i64) as usize
}

/// Number of harmonics with degree `<= lmax`.
#[inline]
pub fn harmonic_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Evaluates every real harmonic of degree `<= lmax` at the unit vector `s`.
///
/// `out` receives `(lmax + 1)^2` values ordered by [`lm_index`]. No check is
/// made that `s` has unit length.
pub fn eval_all(lmax: usize, s: [f64; 3], out: &mut [f64]) {
    let n = lmax + 1;
    assert!(out.len() >= n * n, "output buffer too small");
    let z = s[2];

    // q[m][l] for l >= m, stored per m column.
    let mut qmm = 1.0 / (4.0 * PI).sqrt();
    // Re/Im parts of (x + iy)^m.
    let (mut cm, mut sm) = (1.0, 0.0);
    let mut col = vec![0.0; n];
    for m in 0..n {
        if m > 0 {
            qmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let (c, s_) = (cm * s[0] - sm * s[1], cm * s[1] + sm * s[0]);
            cm = c;
            sm = s_;
        }
        col[m] = qmm;
        if m + 1 < n {
            col[m + 1] = ((2 * m + 3) as f64).sqrt() * z * qmm;
        }
        for l in (m + 2)..n {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            col[l] = a * (z * col[l - 1] - b * col[l - 2]);
        }
        for l in m..n {
            if m == 0 {
                out[lm_index(l, 0)] = col[l];
            } else {
                let f = std::f64::consts::SQRT_2 * col[l];
                out[lm_index(l, m as i32)] = f * cm;
                out[lm_index(l, -(m as i32))] = f * sm;
            }
        }
    }
}

/// Evaluates a single real spherical harmonic `Y_l^m(s)`.
pub fn eval_real_sph_harm(l: usize, m: i32, s: [f64; 3]) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Argument(format!("invalid harmonic index (l, m) = ({l}, {m})")));
    }
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("direction is not a unit vector (|s| = {norm})")));
    }
    let mut buf = vec![0.0; harmonic_count(l)];
    eval_all(l, s, &mut buf);
    Ok(buf[lm_index(l, m)])
}
