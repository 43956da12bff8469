//! Real bookkeeping for one CF-ADI step.
//!
//! Every step appends a block `Z` satisfying
//! `A Z − E Z s + B⊥ l = 0` (with `s = s̃ ⊗ I`, `l = l̃ ⊗ I`) and updates
//! `B⊥ ← B⊥ − E Z lᵀ`. For a real shift `a`:
//! `Z = √(−2a)·v`, `s̃ = −a`, `l̃ = −√(−2a)`.
//! For a pair `α = a + jb` only `v = (A + αE)⁻¹B⊥` is computed and, with
//! `φ = √(−a)`, `δ = a/b`,
//! `Z = [2φ(Re v + δ Im v), 2φ√(1+δ²) Im v]`,
//! `s̃ = [[−2a, −sgn(b)|α|], [sgn(b)|α|, 0]]`, `l̃ = [−2φ, 0]`.

use super::ShiftUnit;
use crate::error::Result;
use crate::linalg::{hcat, imag_part, real_part, CMat, Mat, ShiftedFactorization, SparseSquareMatrix};

/// One realified CF-ADI block.
#[derive(Debug, Clone)]
pub struct CfBlock {
    /// New real basis columns (`m` or `2m` of them).
    pub z: Mat,
    /// Core of the diagonal `S` block (1×1 or 2×2).
    pub s: Mat,
    /// Core of the `L` block (1×1 or 1×2).
    pub l: Mat,
    /// Updated residual factor.
    pub bperp: Mat,
}

impl CfBlock {
    /// Assembles a block from the solution `v` of `(A + σE) v = B⊥`.
    pub fn from_solution(e: &SparseSquareMatrix, bperp: &Mat, unit: ShiftUnit, v: &CMat) -> Self {
        match unit {
            ShiftUnit::Real(a) => {
                let v = real_part(v);
                let g = (-2.0 * a).sqrt();
                let z = &v * g;
                // B⊥ − E z lᵀ = B⊥ − 2a E v
                let bnew = bperp + e.mul(&v) * (-2.0 * a);
                Self {
                    z,
                    s: Mat::from_element(1, 1, -a),
                    l: Mat::from_element(1, 1, -g),
                    bperp: bnew,
                }
            }
            ShiftUnit::Pair(alpha) => {
                let (a, b) = (alpha.re, alpha.im);
                let phi = (-a).sqrt();
                let delta = a / b;
                let r = (1.0 + delta * delta).sqrt();
                let (vr, vi) = (real_part(v), imag_part(v));
                let comb = &vr + &vi * delta;
                let z1 = &comb * (2.0 * phi);
                let z2 = &vi * (2.0 * phi * r);
                let sg = b.signum() * alpha.norm();
                let s = Mat::from_row_slice(2, 2, &[-2.0 * a, -sg, sg, 0.0]);
                let l = Mat::from_row_slice(1, 2, &[-2.0 * phi, 0.0]);
                let bnew = bperp + e.mul(&comb) * (-4.0 * a);
                Self {
                    z: hcat(&z1, &z2),
                    s,
                    l,
                    bperp: bnew,
                }
            }
        }
    }
}

/// Factors `A + σE`, solves once and assembles the realified block.
pub fn cf_block(
    a: &SparseSquareMatrix,
    e: &SparseSquareMatrix,
    bperp: &Mat,
    unit: ShiftUnit,
) -> Result<CfBlock> {
    let f = ShiftedFactorization::new(a, e, unit.shift())?;
    let v = f.solve(bperp)?;
    Ok(CfBlock::from_solution(e, bperp, unit, &v))
}

/// Appends a block to the core bookkeeping:
/// `S̃ ← [[S̃, L̃ᵀ l̃], [0, s̃]]`, `L̃ ← [L̃, l̃]`.
pub fn append_core(s: &Mat, l: &Mat, s_new: &Mat, l_new: &Mat) -> (Mat, Mat) {
    let k = s.nrows();
    let w = s_new.nrows();
    let mut out = Mat::zeros(k + w, k + w);
    out.view_mut((0, 0), (k, k)).copy_from(s);
    if k > 0 {
        out.view_mut((0, k), (k, w)).copy_from(&(l.transpose() * l_new));
    }
    out.view_mut((k, k), (w, w)).copy_from(s_new);
    let lcat = if l.ncols() == 0 {
        l_new.clone()
    } else {
        hcat(l, l_new)
    };
    (out, lcat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, kron};
    use crate::system::random_stable_system;

    #[test]
    fn block_identities_hold() {
        let sys = random_stable_system(25, 2, 1, None, 7);
        let m = 2;
        let mut bperp = sys.b.clone();
        let mut v = Mat::zeros(25, 0);
        let (mut s, mut l) = (Mat::zeros(0, 0), Mat::zeros(1, 0));
        for unit in [
            ShiftUnit::Real(-0.7),
            ShiftUnit::Pair(c64(-0.4, 3.0)),
            ShiftUnit::Pair(c64(-1.5, -2.0)),
            ShiftUnit::Real(-3.0),
        ] {
            let blk = cf_block(&sys.a, &sys.e, &bperp, unit).unwrap();
            bperp = blk.bperp.clone();
            v = hcat(&v, &blk.z);
            let (s2, l2) = append_core(&s, &l, &blk.s, &blk.l);
            s = s2;
            l = l2;
            let sf = kron(&s, &Mat::identity(m, m));
            let lf = kron(&l, &Mat::identity(m, m));
            // A V − E V S + B L = 0 and B⊥ = B − E V Lᵀ
            let res = sys.a.mul(&v) - sys.e.mul(&(&v * &sf)) + &sys.b * &lf;
            assert!(res.norm() < 1e-10 * (1.0 + v.norm()));
            let bp = &sys.b - sys.e.mul(&v) * lf.transpose();
            assert!((bp - &bperp).norm() < 1e-10 * (1.0 + bperp.norm()));
            // −Sᵀ − S + LᵀL = 0
            let pl = -s.transpose() - &s + l.transpose() * &l;
            assert!(pl.norm() < 1e-12 * (1.0 + s.norm()));
        }
    }
}
