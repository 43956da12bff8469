//! Reduced-order models read off the UADI accumulators.
//!
//! On side 1 the basis satisfies `A V − E V S + B L = 0`, so for any free
//! parameter `B̂` the model `Â = S − B̂ L`, `Ĉ = C V` interpolates `G₁` at the
//! eigenvalues of `S` (the mirrored α shifts). Each variant picks `B̂` from
//! one extraction; feedback variants use `B̂ = P̂ L̃ᵀ M⁻¹`, the input map of the
//! projected feedback system `(A + BK, BM)` pulled back to the original
//! input. Side 2 is the same construction on the dual, transposed back.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::engine::{Equation, UadiState};
use crate::error::{Result, UadiError};
use crate::linalg::{lu_solve, lu_solve_c, small_eig_real, to_complex, CMat, Mat};
use crate::system::StateSpaceSystem;

/// Free-parameter choices for the projected model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RomVariant {
    /// `B̂ = Lᵀ`: poles at the conjugated own shifts.
    Lyap,
    /// Poles at the other side's shifts (Sylvester extraction).
    SylvPole,
    /// LQG-type Riccati extraction.
    RiccObserver,
    /// H∞ Riccati extraction.
    InfFilter,
    /// Minimum-phase extraction: zeros at the conjugated shifts.
    Mp,
    /// Positive-real extraction.
    Pr,
    /// Bounded-real extraction.
    Br,
}

impl RomVariant {
    pub const ALL: [RomVariant; 7] = [
        RomVariant::Lyap,
        RomVariant::SylvPole,
        RomVariant::RiccObserver,
        RomVariant::InfFilter,
        RomVariant::Mp,
        RomVariant::Pr,
        RomVariant::Br,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RomVariant::Lyap => "lyap",
            RomVariant::SylvPole => "sylv-pole",
            RomVariant::RiccObserver => "ricc-observer",
            RomVariant::InfFilter => "inf-filter",
            RomVariant::Mp => "mp",
            RomVariant::Pr => "pr",
            RomVariant::Br => "br",
        }
    }

    /// Equation whose extraction supplies the free parameter on `side`.
    pub fn equation(self, side: usize) -> Equation {
        let (p, q) = match self {
            RomVariant::Lyap => (Equation::P1, Equation::Q2),
            RomVariant::SylvPole => (Equation::Sylv, Equation::Sylv),
            RomVariant::RiccObserver => (Equation::Pricc, Equation::Qricc),
            RomVariant::InfFilter => (Equation::Pinf, Equation::Qinf),
            RomVariant::Mp => (Equation::Pmp, Equation::Qmp),
            RomVariant::Pr => (Equation::Ppr, Equation::Qpr),
            RomVariant::Br => (Equation::Pbr, Equation::Qbr),
        };
        if side == 1 {
            p
        } else {
            q
        }
    }
}

impl fmt::Display for RomVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RomVariant {
    type Err = UadiError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        RomVariant::ALL
            .into_iter()
            .find(|v| v.name() == t)
            .ok_or_else(|| UadiError::ParseError(format!("unknown ROM variant `{s}`")))
    }
}

/// `Ĝ(s) = Ĉ (sI − Â)⁻¹ B̂ + D` (the reduced `Ê` is the identity).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub tag: String,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn transfer_eval(&self, s: Complex64) -> Result<CMat> {
        let k = self.order();
        let d = to_complex(&self.d);
        if k == 0 {
            return Ok(d);
        }
        let m = CMat::identity(k, k) * s - to_complex(&self.a);
        let x = lu_solve_c(&m, &to_complex(&self.b)).ok_or(UadiError::SingularShiftedMatrix { shift: s })?;
        Ok(to_complex(&self.c) * x + d)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        Ok(small_eig_real(&self.a, None)?.values)
    }

    /// Transmission zeros `eig(Â − B̂ D⁻¹ Ĉ)` for invertible square `D`.
    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.d.nrows() != self.d.ncols() {
            return Err(UadiError::DimensionMismatch("D is not square".into()));
        }
        let dc = lu_solve(&self.d, &self.c).ok_or_else(|| UadiError::InvalidSize("D is singular".into()))?;
        Ok(small_eig_real(&(&self.a - &self.b * dc), None)?.values)
    }

    /// The system itself viewed through the dense reduced-model interface
    /// (`E⁻¹A`, `E⁻¹B`); only sensible for small `n`.
    pub fn from_system(sys: &StateSpaceSystem) -> Result<Self> {
        let e = sys.e.to_dense();
        let a = lu_solve(&e, &sys.a.to_dense()).ok_or(UadiError::SingularE)?;
        let b = lu_solve(&e, &sys.b).ok_or(UadiError::SingularE)?;
        Ok(Self {
            a,
            b,
            c: sys.c.clone(),
            d: sys.d.clone(),
            tag: format!("full:{}", sys.label),
        })
    }
}

/// `(S, L, B̂)` of side `k` in the side's own (possibly dual) coordinates.
fn free_parameter(state: &UadiState, k: usize, variant: RomVariant) -> Result<(Mat, Mat, Mat)> {
    let side = state.side(k);
    let s = side.s_full();
    let l = side.l_full();
    let eq = variant.equation(k + 1);
    let unavailable = || UadiError::VariantUnavailable(format!("{} ({} is not active)", variant.name(), eq.name()));
    let bh = match variant {
        RomVariant::Lyap => l.transpose(),
        RomVariant::SylvPole => {
            let x = state.sylvester().map_err(|_| unavailable())?;
            let other = state.side(1 - k).l_full();
            if k == 0 {
                &x.middle * other.transpose()
            } else {
                x.middle.transpose() * other.transpose()
            }
        }
        _ => {
            let x = state.one_sided(eq).map_err(|_| unavailable())?;
            let form = state.form(eq).ok_or_else(unavailable)?;
            &x.middle * x.ltilde.transpose() * &form.minv
        }
    };
    Ok((s, l, bh))
}

/// Projected model of `G₁` (`side = 1`) or `G₂` (`side = 2`).
pub fn build_rom(state: &UadiState, side: usize, variant: RomVariant) -> Result<ReducedModel> {
    if side != 1 && side != 2 {
        return Err(UadiError::InvalidSize(format!("side must be 1 or 2, got {side}")));
    }
    let k = side - 1;
    let (s, l, bh) = free_parameter(state, k, variant)?;
    let acc = state.side(k);
    let a = &s - &bh * &l;
    let tag = format!("{}:{}", variant.name(), side);
    Ok(if k == 0 {
        ReducedModel {
            a,
            b: bh,
            c: acc.cbasis().clone(),
            d: state.g1().d.clone(),
            tag,
        }
    } else {
        // Dual coordinates: (a, bh, C_d V) with C_d = B₂ᵀ; transpose back.
        ReducedModel {
            a: a.transpose(),
            b: acc.cbasis().transpose(),
            c: bh.transpose(),
            d: state.g2().d.clone(),
            tag,
        }
    })
}

fn norm2_c(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// `maxᵢ ‖G(sᵢ) − Ĝ(sᵢ)‖₂ / (1 + ‖G(sᵢ)‖₂)`.
pub fn interpolation_check(sys: &StateSpaceSystem, rom: &ReducedModel, points: &[Complex64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &s in points {
        let g = sys.transfer_eval(s)?;
        let gh = rom.transfer_eval(s)?;
        worst = worst.max(norm2_c(&(&g - gh)) / (1.0 + norm2_c(&g)));
    }
    Ok(worst)
}

/// Whether `σ_min(V) ≥ 1e-13·σ_max(V)`; below that, interpolation is only
/// expected to hold approximately.
pub fn basis_well_conditioned(v: &Mat) -> bool {
    if v.ncols() == 0 {
        return true;
    }
    let sv = v.clone().svd(false, false).singular_values;
    sv.min() >= 1e-13 * sv.max()
}

/// Applies the mirrored interpolation points `−α` of side 1 (or `−β` of
/// side 2) to [`interpolation_check`].
pub fn mirrored_points(state: &UadiState, side: usize) -> Vec<Complex64> {
    state.side(side - 1).shifts().iter().map(|z| -z).collect()
}

/// Square-root balanced truncation from the low-rank Gramian factors
/// `P₁ ≈ VVᵀ`, `Q₂ ≈ WWᵀ` (requires `G₁ = G₂`). Returns the order-`r` model
/// and all singular values of `WᵀEV`.
pub fn bt_square_root(state: &UadiState, r: usize) -> Result<(ReducedModel, Vec<f64>)> {
    if !state.g1().same_realization(state.g2()) {
        return Err(UadiError::VariantUnavailable("balanced truncation requires G1 = G2".into()));
    }
    let sys = state.g1();
    let v = state.side(0).basis();
    let w = state.side(1).basis();
    let core = w.transpose() * sys.e.mul(v);
    let hankel: Vec<f64> = if core.is_empty() {
        Vec::new()
    } else {
        let mut h: Vec<f64> = core.clone().svd(false, false).singular_values.iter().copied().collect();
        h.sort_by(|a, b| b.total_cmp(a));
        h
    };
    let s1 = hankel.first().copied().unwrap_or(0.0);
    let rank = hankel.iter().filter(|&&x| x > 1e-12 * s1).count();
    if r > rank {
        return Err(UadiError::RankDeficient { requested: r, rank });
    }
    let tag = format!("bt:{r}");
    if r == 0 {
        return Ok((
            ReducedModel {
                a: Mat::zeros(0, 0),
                b: Mat::zeros(0, sys.m()),
                c: Mat::zeros(sys.p(), 0),
                d: sys.d.clone(),
                tag,
            },
            hankel,
        ));
    }
    let svd = core.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let sv = &svd.singular_values;
    // nalgebra does not promise an order; select the r largest.
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let idx = &idx[..r];
    let ur = Mat::from_fn(u.nrows(), r, |i, j| u[(i, idx[j])] / sv[idx[j]].sqrt());
    let yr = Mat::from_fn(vt.ncols(), r, |i, j| vt[(idx[j], i)] / sv[idx[j]].sqrt());
    let tl = w * ur;
    let tr = v * yr;
    Ok((
        ReducedModel {
            a: tl.transpose() * sys.a.mul(&tr),
            b: tl.transpose() * &sys.b,
            c: &sys.c * &tr,
            d: sys.d.clone(),
            tag,
        },
        hankel,
    ))
}
