//! Dense and sparse numerical kernels.
//!
//! Dense matrices are `nalgebra` matrices (real [`Mat`] or complex [`CMat`]);
//! sparse pencils are stored in compressed-column form and factored through
//! `faer`'s sparse LU.

mod eig;
mod norm;
mod small;
mod sparse;

pub use eig::{small_eig, small_eig_real, SmallEig};
pub use norm::{
    gram_norm2, inv_sqrt_spd, orth, orth_against, spectral_norm, sqrt_spd, try_cholesky_pd,
};
pub use small::{
    solve_kron_sylvester, solve_small_lyapunov, solve_small_lyapunov_real, solve_small_sylvester,
    solve_small_sylvester_real, KronOperator,
};
pub use sparse::{shifted_solve, ShiftedFactorization, SparseSquareMatrix};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Real dense matrix.
pub type Mat = DMatrix<f64>;
/// Complex dense matrix.
pub type CMat = DMatrix<Complex64>;

/// Shorthand for a complex scalar.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lifts a real matrix into the complex field.
pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Real part, entrywise.
pub fn real_part(m: &CMat) -> Mat {
    m.map(|z| z.re)
}

/// Imaginary part, entrywise.
pub fn imag_part(m: &CMat) -> Mat {
    m.map(|z| z.im)
}

/// Horizontal concatenation of two real matrices with equal row count.
pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    if a.ncols() == 0 {
        return b.clone();
    }
    if b.ncols() == 0 {
        return a.clone();
    }
    assert_eq!(a.nrows(), b.nrows(), "hcat row mismatch");
    let mut out = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Vertical concatenation of two real matrices with equal column count.
pub fn vcat(a: &Mat, b: &Mat) -> Mat {
    if a.nrows() == 0 {
        return b.clone();
    }
    if b.nrows() == 0 {
        return a.clone();
    }
    assert_eq!(a.ncols(), b.ncols(), "vcat column mismatch");
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Block-diagonal assembly of two real matrices.
pub fn blkdiag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Solves `m · x = rhs` by LU with partial pivoting; `None` when singular.
pub fn lu_solve(m: &Mat, rhs: &Mat) -> Option<Mat> {
    let x = m.clone().lu().solve(rhs)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Complex counterpart of [`lu_solve`].
pub fn lu_solve_c(m: &CMat, rhs: &CMat) -> Option<CMat> {
    let x = m.clone().lu().solve(rhs)?;
    if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Dense inverse through LU; `None` when singular or badly conditioned
/// beyond double precision.
pub fn inverse(m: &Mat) -> Option<Mat> {
    let n = m.nrows();
    let inv = lu_solve(m, &Mat::identity(n, n))?;
    let cond = m.norm() * inv.norm();
    if cond.is_finite() && cond < 1e17 {
        Some(inv)
    } else {
        None
    }
}

/// Symmetric part `(m + mᵀ)/2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}
