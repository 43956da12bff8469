//! RADI for `A P Eᵀ + E P Aᵀ + B Bᵀ − E P Cᵀ C P Eᵀ = 0`.
//!
//! Each step solves with the closed-loop pencil `(A − K C) + σE`,
//! `K = E P Cᵀ`, through Sherman–Morrison–Woodbury:
//! `(A + σE)[Y₁ Y₂] = [B⊥ K]`, `v = Y₁ + Y₂ (I − C Y₂)⁻¹ C Y₁`.
//! The realified block `Z` (same formulas as CF-ADI) gets the middle block
//! `P̂ = Y⁻¹` with `−sᵀY − Y s + lᵀl + (CZ)ᵀ(CZ) = 0`, then
//! `B⊥ ← B⊥ − E Z P̂ lᵀ` and `K ← K + E Z P̂ Zᵀ Cᵀ`.

use num_complex::Complex64;

use super::{to_units, CfBlock, LowRankSolution, ResidualFactor};
use crate::error::{Result, UadiError};
use crate::linalg::{
    blkdiag, gram_norm2, hcat, inverse, kron, lu_solve_c, solve_small_sylvester_real, to_complex,
    CMat, Mat, ShiftedFactorization,
};
use crate::system::StateSpaceSystem;

/// Output of [`radi`].
#[derive(Debug, Clone)]
pub struct RadiOutput {
    /// `P ≈ Z · P̂ · Zᵀ`.
    pub solution: LowRankSolution,
    pub residual: ResidualFactor,
    /// Feedback `K = E P Cᵀ`.
    pub feedback: Mat,
    /// Normalized residual `‖B⊥B⊥ᵀ‖₂ / ‖BBᵀ‖₂` after each realified step.
    pub history: Vec<f64>,
    pub used_shifts: Vec<Complex64>,
}

/// Low-rank Riccati ADI with real factors. `max_iter` bounds the number of
/// shift values consumed.
pub fn radi(sys: &StateSpaceSystem, shifts: &[Complex64], max_iter: usize, tol: f64) -> Result<RadiOutput> {
    let units = to_units(shifts, true)?;
    let (n, m, p) = (sys.n(), sys.m(), sys.p());
    let c = &sys.c;
    let cc = to_complex(c);
    let bnorm = gram_norm2(&sys.b, None, None)?;
    let mut bperp = sys.b.clone();
    let mut k = Mat::zeros(n, p);
    let mut z = Mat::zeros(n, 0);
    let mut ph = Mat::zeros(0, 0);
    let mut history = Vec::new();
    let mut used = Vec::new();
    let eye = Mat::identity(m, m);
    for unit in units {
        if used.len() + unit.width() > max_iter {
            break;
        }
        let sigma = unit.shift();
        let f = ShiftedFactorization::new(&sys.a, &sys.e, sigma)?;
        let y = f.solve(&hcat(&bperp, &k))?;
        let y1 = y.columns(0, m).into_owned();
        let y2 = y.columns(m, p).into_owned();
        let cap = CMat::identity(p, p) - &cc * &y2;
        let corr = lu_solve_c(&cap, &(&cc * &y1)).ok_or(UadiError::InnerSolveSingular)?;
        let v = &y1 + &y2 * corr;
        let blk = CfBlock::from_solution(&sys.e, &bperp, unit, &v);
        let s = kron(&blk.s, &eye);
        let l = kron(&blk.l, &eye);
        let cz = c * &blk.z;
        let h = l.transpose() * &l + cz.transpose() * &cz;
        let yb = solve_small_sylvester_real(&(-s.transpose()), &s, &h)?;
        let pb = inverse(&yb).ok_or(UadiError::InnerSolveSingular)?;
        let ez = sys.e.mul(&blk.z);
        bperp -= &ez * &pb * l.transpose();
        k += &ez * &pb * cz.transpose();
        z = hcat(&z, &blk.z);
        ph = blkdiag(&ph, &pb);
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
    Ok(RadiOutput {
        solution: LowRankSolution::symmetric(z, Some(ph), "ricc"),
        residual: ResidualFactor::symmetric(bperp),
        feedback: k,
        history,
        used_shifts: used,
    })
}
