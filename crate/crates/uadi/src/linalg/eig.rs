//! Small dense (generalized) eigendecompositions with left and right vectors.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{lu_solve_c, to_complex, CMat, Mat};
use crate::error::{Result, UadiError};

/// Eigen-triple of a small matrix or pencil.
#[derive(Debug, Clone)]
pub struct SmallEig {
    /// Eigenvalues λₗ.
    pub values: Vec<Complex64>,
    /// Right eigenvectors as columns: `M · right = right · diag(λ)`.
    pub right: CMat,
    /// Rows of `right⁻¹`, so `left · M = diag(λ) · left`.
    pub left: CMat,
}

/// Eigendecomposition of `F` (or of `Eopt⁻¹ F` when a descriptor matrix is
/// given). Eigenvectors come from back-substitution on the complex Schur
/// form; left vectors are the rows of the inverse eigenvector matrix.
pub fn small_eig(f: &CMat, e: Option<&CMat>) -> Result<SmallEig> {
    let k = f.nrows();
    if f.ncols() != k {
        return Err(UadiError::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            f.nrows(),
            f.ncols()
        )));
    }
    let m = match e {
        Some(e) => {
            if e.shape() != f.shape() {
                return Err(UadiError::DimensionMismatch("E does not match F".into()));
            }
            lu_solve_c(e, f).ok_or(UadiError::SingularProjectedE)?
        }
        None => f.clone(),
    };
    if k == 0 {
        return Ok(SmallEig {
            values: vec![],
            right: CMat::zeros(0, 0),
            left: CMat::zeros(0, 0),
        });
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(UadiError::EigFailure);
    }
    let (q, t) = Schur::try_new(m, f64::EPSILON, 200 * k)
        .ok_or(UadiError::EigFailure)?
        .unpack();
    let values: Vec<Complex64> = (0..k).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);

    // Right eigenvectors of the triangular factor.
    let mut y = CMat::zeros(k, k);
    for j in 0..k {
        y[(j, j)] = Complex64::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in i + 1..=j {
                acc += t[(i, l)] * y[(l, j)];
            }
            let mut d = t[(i, i)] - t[(j, j)];
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, j)] = -acc / d;
        }
        let nrm = y.column(j).norm();
        y.column_mut(j).unscale_mut(nrm);
    }
    let right = q * y;
    let left = lu_solve_c(&right, &CMat::identity(k, k)).ok_or(UadiError::EigFailure)?;
    Ok(SmallEig {
        values,
        right,
        left,
    })
}

/// Real-data wrapper of [`small_eig`].
pub fn small_eig_real(f: &Mat, e: Option<&Mat>) -> Result<SmallEig> {
    let ec = e.map(to_complex);
    small_eig(&to_complex(f), ec.as_ref())
}
