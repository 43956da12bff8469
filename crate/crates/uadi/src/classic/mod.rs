//! Reference ADI solvers: CF-ADI (Lyapunov), FADI (Sylvester) and RADI
//! (Riccati), all in real arithmetic for conjugate-closed shift sequences.

mod fadi;
mod radi;
mod realify;

pub use fadi::{fadi, group_fadi_cases, FadiCase, FadiGroup, FadiOutput};
pub use radi::{radi, RadiOutput};
pub use realify::{append_core, cf_block, CfBlock};

use num_complex::Complex64;

use crate::error::{Result, UadiError};
use crate::linalg::{gram_norm2, hcat, Mat};
use crate::system::StateSpaceSystem;

/// Relative size of the imaginary part below which a shift counts as real.
pub const REAL_SHIFT_TOL: f64 = 1e-10;

/// `true` when `z` is treated as a real shift.
pub fn is_real_shift(z: Complex64) -> bool {
    z.im == 0.0 || z.im.abs() <= REAL_SHIFT_TOL * z.norm()
}

/// One realified ADI step: a real shift or a conjugate pair represented by
/// its first member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftUnit {
    Real(f64),
    Pair(Complex64),
}

impl ShiftUnit {
    /// Number of shift values consumed (1 or 2).
    pub fn width(&self) -> usize {
        match self {
            ShiftUnit::Real(_) => 1,
            ShiftUnit::Pair(_) => 2,
        }
    }

    /// The shift that is actually factored.
    pub fn shift(&self) -> Complex64 {
        match *self {
            ShiftUnit::Real(a) => Complex64::new(a, 0.0),
            ShiftUnit::Pair(z) => z,
        }
    }

    /// All shift values covered by the unit.
    pub fn values(&self) -> Vec<Complex64> {
        match *self {
            ShiftUnit::Real(a) => vec![Complex64::new(a, 0.0)],
            ShiftUnit::Pair(z) => vec![z, z.conj()],
        }
    }

    /// Builds a unit from a single shift value (a complex value implies its
    /// conjugate).
    pub fn from_shift(z: Complex64) -> Self {
        if is_real_shift(z) {
            ShiftUnit::Real(z.re)
        } else {
            ShiftUnit::Pair(z)
        }
    }
}

/// Groups a shift list into real shifts and consecutive conjugate pairs.
///
/// With `require_stable`, every shift must have a strictly negative real
/// part; otherwise only a nonzero real part is required.
pub fn to_units(shifts: &[Complex64], require_stable: bool) -> Result<Vec<ShiftUnit>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < shifts.len() {
        let z = shifts[i];
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(UadiError::NonFiniteShift(z));
        }
        if (require_stable && z.re >= 0.0) || z.re == 0.0 {
            return Err(UadiError::UnstableShift(z));
        }
        if is_real_shift(z) {
            out.push(ShiftUnit::Real(z.re));
            i += 1;
        } else {
            match shifts.get(i + 1) {
                Some(&w) if (w - z.conj()).norm() <= 1e-12 * z.norm() => {
                    out.push(ShiftUnit::Pair(z));
                    i += 2;
                }
                _ => return Err(UadiError::UnpairedComplexShift(z)),
            }
        }
    }
    Ok(out)
}

/// Which side of a system a Lyapunov solve targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `A P Eᵀ + E P Aᵀ + B Bᵀ = 0`.
    Controllability,
    /// `Aᵀ Q E + Eᵀ Q A + Cᵀ C = 0`.
    Observability,
}

/// Low-rank approximation `V · M · Wᵀ` (with `W = V` and `M = I` by
/// default).
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankSolution {
    pub left: Mat,
    pub middle: Option<Mat>,
    pub right: Option<Mat>,
    pub tag: String,
}

impl LowRankSolution {
    /// Symmetric factor form `Z·Zᵀ` or `Z·M·Zᵀ`.
    pub fn symmetric(left: Mat, middle: Option<Mat>, tag: impl Into<String>) -> Self {
        Self {
            left,
            middle,
            right: None,
            tag: tag.into(),
        }
    }

    /// Number of columns of the left factor.
    pub fn rank(&self) -> usize {
        self.left.ncols()
    }

    /// Dense product; only sensible for small state dimensions.
    pub fn dense(&self) -> Mat {
        let right = self.right.as_ref().unwrap_or(&self.left);
        match &self.middle {
            Some(m) => &self.left * m * right.transpose(),
            None => &self.left * right.transpose(),
        }
    }

    /// `‖V M Wᵀ‖₂` evaluated through the factors.
    pub fn norm2(&self) -> Result<f64> {
        gram_norm2(&self.left, self.middle.as_ref(), self.right.as_ref())
    }
}

/// Which residual a factor represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSide {
    Left,
    Right,
    /// Two-sided Sylvester residual `factor · second`.
    TwoSided,
}

/// Thin factor whose Gram product is the exact equation residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualFactor {
    pub factor: Mat,
    pub middle: Option<Mat>,
    /// Second factor (`C⊥`, stored as a `p × n` row block) for Sylvester.
    pub second: Option<Mat>,
    pub side: ResidualSide,
}

impl ResidualFactor {
    /// Symmetric residual `B⊥ · B⊥ᵀ`.
    pub fn symmetric(factor: Mat) -> Self {
        Self {
            factor,
            middle: None,
            second: None,
            side: ResidualSide::Left,
        }
    }

    /// `‖R‖₂` of the represented residual.
    pub fn norm(&self) -> Result<f64> {
        match &self.second {
            Some(c) => {
                let ct = c.transpose();
                gram_norm2(&self.factor, self.middle.as_ref(), Some(&ct))
            }
            None => gram_norm2(&self.factor, self.middle.as_ref(), None),
        }
    }

    /// Dense residual matrix.
    pub fn dense(&self) -> Mat {
        let f = &self.factor;
        let rhs = match &self.second {
            Some(c) => c.clone(),
            None => f.transpose(),
        };
        match &self.middle {
            Some(m) => f * m * rhs,
            None => f * rhs,
        }
    }
}

/// Output of [`cf_adi`].
#[derive(Debug, Clone)]
pub struct CfAdiOutput {
    pub solution: LowRankSolution,
    pub residual: ResidualFactor,
    /// Normalized residual `‖B⊥B⊥ᵀ‖₂ / ‖BBᵀ‖₂` after each realified step.
    pub history: Vec<f64>,
    /// Shift values consumed.
    pub used_shifts: Vec<Complex64>,
}

/// Low-rank Cholesky-factor ADI for the controllability (or, via the dual
/// system, observability) Lyapunov equation.
///
/// Complex pairs are processed with a single complex solve and appended as
/// two real columns blocks, so all factors are real. `max_iter` bounds the
/// number of shift values consumed; a pair never straddles the bound.
pub fn cf_adi(
    sys: &StateSpaceSystem,
    side: Side,
    shifts: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<CfAdiOutput> {
    let dual;
    let sys = match side {
        Side::Controllability => sys,
        Side::Observability => {
            dual = sys.dual();
            &dual
        }
    };
    let units = to_units(shifts, true)?;
    let b = &sys.b;
    let bnorm = gram_norm2(b, None, None)?;
    let mut z = Mat::zeros(sys.n(), 0);
    let mut bperp = b.clone();
    let mut history = Vec::new();
    let mut used = Vec::new();
    for unit in units {
        if used.len() + unit.width() > max_iter {
            break;
        }
        let blk = cf_block(&sys.a, &sys.e, &bperp, unit)?;
        bperp = blk.bperp;
        z = hcat(&z, &blk.z);
        used.extend(unit.values());
        let r = if bnorm > 0.0 {
            gram_norm2(&bperp, None, None)? / bnorm
        } else {
            0.0
        };
        history.push(r);
        if r <= tol {
            break;
        }
    }
    Ok(CfAdiOutput {
        solution: LowRankSolution::symmetric(z, None, "p1"),
        residual: ResidualFactor::symmetric(bperp),
        history,
        used_shifts: used,
    })
}

/// `‖B⊥ S B⊥ᵀ‖₂`: residual of the indefinite Lyapunov equation with
/// constant term `B S Bᵀ` for the same CF-ADI factor (middle `I ⊗ S`).
pub fn ldl_residual(res: &ResidualFactor, s: &Mat) -> Result<f64> {
    if s.nrows() != res.factor.ncols() || s.ncols() != res.factor.ncols() {
        return Err(UadiError::DimensionMismatch(format!(
            "S is {}x{}, residual factor has {} columns",
            s.nrows(),
            s.ncols(),
            res.factor.ncols()
        )));
    }
    gram_norm2(&res.factor, Some(s), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, SparseSquareMatrix};

    fn scalar() -> StateSpaceSystem {
        StateSpaceSystem::new(
            SparseSquareMatrix::identity(1),
            SparseSquareMatrix::from_triplets(1, &[(0, 0, -1.0)]).unwrap(),
            Mat::from_element(1, 1, 1.0),
            Mat::from_element(1, 1, 1.0),
            None,
            "scalar",
        )
        .unwrap()
    }

    #[test]
    fn scalar_exact_step() {
        let out = cf_adi(&scalar(), Side::Controllability, &[c64(-1.0, 0.0)], 10, 0.0).unwrap();
        let z = out.solution.left[(0, 0)];
        assert!((z.abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((z * z - 0.5).abs() < 1e-15);
        assert!(out.residual.factor[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn unit_grouping() {
        let u = to_units(&[c64(-1.0, 0.0), c64(-1.0, 2.0), c64(-1.0, -2.0)], true).unwrap();
        assert_eq!(u, vec![ShiftUnit::Real(-1.0), ShiftUnit::Pair(c64(-1.0, 2.0))]);
        assert!(matches!(
            to_units(&[c64(-1.0, 2.0), c64(-1.0, 2.0)], true),
            Err(UadiError::UnpairedComplexShift(_))
        ));
        assert!(matches!(to_units(&[c64(0.5, 0.0)], true), Err(UadiError::UnstableShift(_))));
        assert!(to_units(&[c64(0.5, 0.0)], false).is_ok());
    }

    #[test]
    fn ldl_reduces_to_standard() {
        let r = ResidualFactor::symmetric(Mat::from_fn(5, 2, |i, j| (i + j) as f64));
        let a = ldl_residual(&r, &Mat::identity(2, 2)).unwrap();
        assert!((a - r.norm().unwrap()).abs() < 1e-12 * a);
        let z = ResidualFactor::symmetric(Mat::zeros(5, 2));
        assert_eq!(ldl_residual(&z, &Mat::identity(2, 2)).unwrap(), 0.0);
    }
}
