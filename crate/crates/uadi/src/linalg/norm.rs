//! Low-rank norms, orthonormal bases and SPD matrix functions.

use super::Mat;
use crate::error::{Result, UadiError};

/// Largest singular value.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

fn thin_r(z: &Mat) -> Mat {
    if z.nrows() >= z.ncols() {
        z.clone().qr().r()
    } else {
        // Wide factor: Z itself is already no larger than its R factor.
        z.clone()
    }
}

/// `‖Z M Z₂ᵀ‖₂` without forming the `n × n₂` product.
///
/// `M` defaults to the identity and `Z₂` to `Z`. Both tall factors are
/// reduced by thin QR, so only an `r × r₂` matrix is decomposed.
pub fn gram_norm2(z: &Mat, m: Option<&Mat>, z2: Option<&Mat>) -> Result<f64> {
    let z2 = z2.unwrap_or(z);
    if let Some(m) = m {
        if m.nrows() != z.ncols() || m.ncols() != z2.ncols() {
            return Err(UadiError::DimensionMismatch(format!(
                "middle is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                z.ncols(),
                z2.ncols()
            )));
        }
    } else if z.ncols() != z2.ncols() {
        return Err(UadiError::DimensionMismatch(
            "identity middle needs equal factor widths".into(),
        ));
    }
    if z.is_empty() || z2.is_empty() {
        return Ok(0.0);
    }
    let r1 = thin_r(z);
    let r2 = thin_r(z2);
    let core = match m {
        Some(m) => &r1 * m * r2.transpose(),
        None => &r1 * r2.transpose(),
    };
    Ok(spectral_norm(&core))
}

/// Orthonormal basis of the range of `z` (SVD with relative rank cut 1e-12).
pub fn orth(z: &Mat) -> Mat {
    if z.is_empty() {
        return Mat::zeros(z.nrows(), 0);
    }
    let svd = z.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Mat::zeros(z.nrows(), 0);
    }
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 1e-12 * smax).collect();
    Mat::from_fn(z.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Orthonormal basis for the part of `z` not already in the span of the
/// orthonormal columns `h` (classical Gram–Schmidt applied twice).
///
/// Directions whose remaining norm falls below `1e-10` of their original
/// norm are dropped.
pub fn orth_against(h: &Mat, z: &Mat) -> Mat {
    if h.ncols() == 0 {
        return orth(z);
    }
    let scale = z.norm();
    if scale == 0.0 {
        return Mat::zeros(z.nrows(), 0);
    }
    let mut r = z.clone();
    for _ in 0..2 {
        let c = h.transpose() * &r;
        r -= h * c;
    }
    if r.norm() <= 1e-10 * scale {
        return Mat::zeros(z.nrows(), 0);
    }
    let q = orth(&r);
    // Re-orthogonalize the new directions once more against h.
    let c = h.transpose() * &q;
    let q = &q - h * c;
    let keep: Vec<usize> = (0..q.ncols())
        .filter(|&j| q.column(j).norm() > 1e-10)
        .collect();
    let q = Mat::from_fn(q.nrows(), keep.len(), |i, j| q[(i, keep[j])]);
    orth(&q)
}

/// Cholesky factor `L` (lower) of a symmetric positive-definite matrix, or
/// `None` if the matrix is not numerically positive definite.
pub fn try_cholesky_pd(m: &Mat) -> Option<Mat> {
    let s = super::symmetrize(m);
    let ch = s.cholesky()?;
    let l = ch.l();
    let dmin = l.diagonal().iter().cloned().fold(f64::INFINITY, f64::min);
    let dmax = l.diagonal().iter().cloned().fold(0.0, f64::max);
    if dmin > 1e-8 * dmax {
        Some(l)
    } else {
        None
    }
}

fn spd_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Option<Mat> {
    let s = super::symmetrize(m);
    let eig = s.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-14 * lmax.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let d = eig.eigenvalues.map(f);
    let q = &eig.eigenvectors;
    Some(q * Mat::from_diagonal(&d) * q.transpose())
}

/// Symmetric square root of an SPD matrix.
pub fn sqrt_spd(m: &Mat) -> Option<Mat> {
    spd_fn(m, f64::sqrt)
}

/// Symmetric inverse square root of an SPD matrix.
pub fn inv_sqrt_spd(m: &Mat) -> Option<Mat> {
    spd_fn(m, |x| 1.0 / x.sqrt())
}
