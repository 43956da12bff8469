//! Factorized ADI for `A₁ X E₂ + E₁ X A₂ + B₁ C₂ = 0` with realified
//! shift groups.
//!
//! A group appends bases `V_b`, `W_b` satisfying
//! `A₁V_b − E₁V_b s_v + B⊥ l_v = 0` and `A₂ᵀW_b − E₂ᵀW_b s_w + C⊥ᵀ l_w = 0`.
//! Its middle block is `D_b = Y⁻¹` with `−s_wᵀY − Y s_v + l_wᵀ l_v = 0`,
//! which makes the new residual factor exactly:
//! `B⊥ ← B⊥ − E₁V_b D_b l_wᵀ`, `C⊥ ← C⊥ − l_v D_b W_bᵀE₂`.
//! Real-real groups use the closed form `D_b = −(α+β)I`.

use std::collections::VecDeque;

use num_complex::Complex64;

use super::{to_units, LowRankSolution, ShiftUnit};
use crate::error::{Result, UadiError};
use crate::linalg::{
    blkdiag, gram_norm2, hcat, imag_part, inverse, kron, real_part, solve_small_sylvester_real, Mat,
    ShiftedFactorization, SparseSquareMatrix,
};
use crate::system::StateSpaceSystem;

/// Realification pattern of one shift group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadiCase {
    /// Real α, real β.
    I,
    /// Conjugate pair α, conjugate pair β.
    II,
    /// Two real α against a conjugate pair β.
    III,
    /// Conjugate pair α against two real β.
    IV,
}

/// One group of shifts consumed together.
#[derive(Debug, Clone, PartialEq)]
pub struct FadiGroup {
    pub case: FadiCase,
    pub alpha: Vec<ShiftUnit>,
    pub beta: Vec<ShiftUnit>,
}

impl FadiGroup {
    /// Number of shift positions covered (1 or 2).
    pub fn width(&self) -> usize {
        self.alpha.iter().map(ShiftUnit::width).sum()
    }
}

fn take_next_real(q: &mut VecDeque<ShiftUnit>) -> Option<ShiftUnit> {
    let j = q.iter().position(|u| matches!(u, ShiftUnit::Real(_)))?;
    q.remove(j)
}

/// Groups two shift lists into Cases I–IV. A real shift facing a conjugate
/// pair is matched with the next real shift of its own list (pulled forward
/// if necessary); if none exists the pairing is impossible.
pub fn group_fadi_cases(alpha: &[Complex64], beta: &[Complex64]) -> Result<Vec<FadiGroup>> {
    if alpha.len() != beta.len() {
        return Err(UadiError::DimensionMismatch(format!(
            "{} alpha shifts but {} beta shifts",
            alpha.len(),
            beta.len()
        )));
    }
    let mut qa: VecDeque<_> = to_units(alpha, false)?.into();
    let mut qb: VecDeque<_> = to_units(beta, false)?.into();
    let mut out = Vec::new();
    while let (Some(ua), Some(ub)) = (qa.pop_front(), qb.pop_front()) {
        let g = match (ua, ub) {
            (ShiftUnit::Real(_), ShiftUnit::Real(_)) => FadiGroup {
                case: FadiCase::I,
                alpha: vec![ua],
                beta: vec![ub],
            },
            (ShiftUnit::Pair(_), ShiftUnit::Pair(_)) => FadiGroup {
                case: FadiCase::II,
                alpha: vec![ua],
                beta: vec![ub],
            },
            (ShiftUnit::Real(_), ShiftUnit::Pair(z)) => {
                let second = take_next_real(&mut qa).ok_or(UadiError::UnpairedComplexShift(z))?;
                FadiGroup {
                    case: FadiCase::III,
                    alpha: vec![ua, second],
                    beta: vec![ub],
                }
            }
            (ShiftUnit::Pair(z), ShiftUnit::Real(_)) => {
                let second = take_next_real(&mut qb).ok_or(UadiError::UnpairedComplexShift(z))?;
                FadiGroup {
                    case: FadiCase::IV,
                    alpha: vec![ua],
                    beta: vec![ub, second],
                }
            }
        };
        out.push(g);
    }
    if let Some(u) = qa.front().or(qb.front()) {
        return Err(UadiError::UnpairedComplexShift(u.shift()));
    }
    Ok(out)
}

/// Output of [`fadi`].
#[derive(Debug, Clone)]
pub struct FadiOutput {
    /// `X ≈ V · D · Wᵀ`.
    pub solution: LowRankSolution,
    pub bperp: Mat,
    /// `C⊥` stored as a `p × n` row block.
    pub cperp: Mat,
    /// Normalized residual `‖B⊥C⊥‖₂/‖B₁C₂‖₂` after each group.
    pub history: Vec<f64>,
    pub groups: Vec<FadiGroup>,
}

/// Basis block for one side: `(block, s core, l core)`.
type SideBlock = (Mat, Mat, Mat);

fn real_pair_block(
    a: &SparseSquareMatrix,
    e: &SparseSquareMatrix,
    rhs: &Mat,
    s1: f64,
    s2: f64,
) -> Result<SideBlock> {
    let f1 = ShiftedFactorization::new(a, e, Complex64::new(s1, 0.0))?;
    let v1 = f1.solve_real(rhs)?;
    let f2 = ShiftedFactorization::new(a, e, Complex64::new(s2, 0.0))?;
    let v2 = f2.solve_real(&e.mul(&v1))?;
    Ok((
        hcat(&v1, &v2),
        Mat::from_row_slice(2, 2, &[-s1, 1.0, 0.0, -s2]),
        Mat::from_row_slice(1, 2, &[-1.0, 0.0]),
    ))
}

fn complex_block(
    a: &SparseSquareMatrix,
    e: &SparseSquareMatrix,
    rhs: &Mat,
    shift: Complex64,
) -> Result<SideBlock> {
    let f = ShiftedFactorization::new(a, e, shift)?;
    let v = f.solve(rhs)?;
    let (x, y) = (shift.re, shift.im);
    Ok((
        hcat(&real_part(&v), &imag_part(&v)),
        Mat::from_row_slice(2, 2, &[-x, -y, y, -x]),
        Mat::from_row_slice(1, 2, &[-1.0, 0.0]),
    ))
}

/// Factorized ADI. `max_iter` bounds the number of shift positions used.
pub fn fadi(
    sys1: &StateSpaceSystem,
    sys2: &StateSpaceSystem,
    alpha: &[Complex64],
    beta: &[Complex64],
    max_iter: usize,
    tol: f64,
) -> Result<FadiOutput> {
    if sys1.m() != sys2.p() {
        return Err(UadiError::DimensionMismatch(format!(
            "m1 = {} but p2 = {}",
            sys1.m(),
            sys2.p()
        )));
    }
    let groups = group_fadi_cases(alpha, beta)?;
    let m = sys1.m();
    let (a2t, e2t) = (sys2.a.transpose(), sys2.e.transpose());
    let scale = gram_norm2(&sys1.b, None, Some(&sys2.c.transpose()))?;
    let mut bperp = sys1.b.clone();
    let mut cperp = sys2.c.clone();
    let mut v = Mat::zeros(sys1.n(), 0);
    let mut w = Mat::zeros(sys2.n(), 0);
    let mut d = Mat::zeros(0, 0);
    let mut history = Vec::new();
    let mut used_groups = Vec::new();
    let mut positions = 0;
    let eye = Mat::identity(m, m);

    for g in groups {
        if positions + g.width() > max_iter {
            break;
        }
        for ua in g.alpha.iter().flat_map(ShiftUnit::values) {
            for ub in g.beta.iter().flat_map(ShiftUnit::values) {
                if (ua + ub).norm() <= 1e-12 * (ua.norm() + ub.norm()) {
                    return Err(UadiError::ShiftCollision { alpha: ua, beta: ub });
                }
            }
        }
        let ct = cperp.transpose();
        let (vb, wb, db) = if g.case == FadiCase::I {
            let (al, be) = (g.alpha[0].shift(), g.beta[0].shift());
            let vb = ShiftedFactorization::new(&sys1.a, &sys1.e, al)?.solve_real(&bperp)?;
            let wb = ShiftedFactorization::new(&a2t, &e2t, be)?.solve_real(&ct)?;
            let sum = al.re + be.re;
            bperp -= sys1.e.mul(&vb) * sum;
            cperp -= e2t.mul(&wb).transpose() * sum;
            (vb, wb, &eye * (-sum))
        } else {
            let (vb, sv, lv) = match g.case {
                FadiCase::III => real_pair_block(
                    &sys1.a,
                    &sys1.e,
                    &bperp,
                    g.alpha[0].shift().re,
                    g.alpha[1].shift().re,
                )?,
                _ => complex_block(&sys1.a, &sys1.e, &bperp, g.alpha[0].shift())?,
            };
            let (wb, sw, lw) = match g.case {
                FadiCase::IV => {
                    real_pair_block(&a2t, &e2t, &ct, g.beta[0].shift().re, g.beta[1].shift().re)?
                }
                _ => complex_block(&a2t, &e2t, &ct, g.beta[0].shift().conj())?,
            };
            let (sv, lv) = (kron(&sv, &eye), kron(&lv, &eye));
            let (sw, lw) = (kron(&sw, &eye), kron(&lw, &eye));
            let y = solve_small_sylvester_real(&(-sw.transpose()), &sv, &(lw.transpose() * &lv))
                .map_err(|_| UadiError::ShiftCollision {
                    alpha: g.alpha[0].shift(),
                    beta: g.beta[0].shift(),
                })?;
            let db = inverse(&y).ok_or_else(|| UadiError::ShiftCollision {
                alpha: g.alpha[0].shift(),
                beta: g.beta[0].shift(),
            })?;
            bperp -= sys1.e.mul(&vb) * &db * lw.transpose();
            cperp -= &lv * &db * e2t.mul(&wb).transpose();
            (vb, wb, db)
        };
        v = hcat(&v, &vb);
        w = hcat(&w, &wb);
        d = blkdiag(&d, &db);
        positions += g.width();
        let r = if scale > 0.0 {
            gram_norm2(&bperp, None, Some(&cperp.transpose()))? / scale
        } else {
            0.0
        };
        history.push(r);
        used_groups.push(g);
        if r <= tol {
            break;
        }
    }
    Ok(FadiOutput {
        solution: LowRankSolution {
            left: v,
            middle: Some(d),
            right: Some(w),
            tag: "sylv".into(),
        },
        bperp,
        cperp,
        history,
        groups: used_groups,
    })
}
