//! Feedback forms of the one-sided equations.
//!
//! Every controllability-type equation handled by the engine can be written
//! `A_x P Eᵀ + E P A_xᵀ + B_x B_xᵀ + σ E P C_xᵀ C_x P Eᵀ = 0` with
//! `A_x = A + B K` and `B_x = B M`. Since the shared basis satisfies
//! `A V − E V S + B L = 0`, it also satisfies
//! `A_x V − E V S + B_x L̃ = 0` with `L̃ = M⁻¹(L − K V)`, so the variant only
//! changes the small data `(L̃, C_x V, σ)`.
//!
//! `K V` and `C_x V` are assembled from `C V` (and, for the spectral-factor
//! form, from `Bᵀ Q V` with `Q` the other side's Gramian).

use crate::linalg::{inv_sqrt_spd, sqrt_spd, try_cholesky_pd, Mat};
use crate::system::StateSpaceSystem;

/// Condition-number bound under which `D` counts as invertible.
pub const D_COND_MAX: f64 = 1e12;

/// One-sided equation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Gramian.
    Lyap,
    /// Indefinite Gramian with input weight `S`.
    Ldl,
    /// Minimum-phase Gramian.
    Mp,
    /// LQG-type Riccati.
    Ricc,
    /// H∞ Riccati.
    Inf,
    /// Positive-real Riccati.
    Pr,
    /// Bounded-real Riccati.
    Br,
    /// Spectral-factor Riccati (uses the other side's Gramian).
    Sf,
}

/// Small-scale coefficients of a variant; see the module docs.
#[derive(Debug, Clone)]
pub struct VariantForm {
    pub b_x: Mat,
    /// `M⁻¹` (m × m).
    pub minv: Mat,
    /// `K V = kc·(C V) + ks·(Bᵀ Q V)`.
    pub kc: Mat,
    pub ks: Option<Mat>,
    /// `C_x V = cc·(C V) + cs·(Bᵀ Q V)`; `None` for Lyapunov-type forms.
    pub cc: Option<Mat>,
    pub cs: Option<Mat>,
    pub sigma: f64,
}

fn cond(m: &Mat) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let (mx, mn) = (sv.max(), sv.min());
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

impl VariantForm {
    /// Builds the form for `sys` or explains why the equation is
    /// infeasible. `gamma` is used by [`Variant::Inf`] only.
    pub fn build(variant: Variant, sys: &StateSpaceSystem, gamma: f64) -> std::result::Result<Self, String> {
        let (m, p) = (sys.m(), sys.p());
        let (b, d) = (&sys.b, &sys.d);
        let plain = |sigma: f64, cc: Option<Mat>| VariantForm {
            b_x: b.clone(),
            minv: Mat::identity(m, m),
            kc: Mat::zeros(m, p),
            ks: None,
            cc,
            cs: None,
            sigma,
        };
        let square = || {
            if m == p {
                Ok(())
            } else {
                Err(format!("D is {p}x{m}, not square"))
            }
        };
        match variant {
            Variant::Lyap | Variant::Ldl => Ok(plain(0.0, None)),
            Variant::Ricc => Ok(plain(-1.0, Some(Mat::identity(p, p)))),
            Variant::Inf => Ok(plain(-(1.0 - 1.0 / (gamma * gamma)), Some(Mat::identity(p, p)))),
            Variant::Mp => {
                square()?;
                let c = cond(d);
                if !(c < D_COND_MAX) {
                    return Err(format!("D is not invertible (condition {c:.2e})"));
                }
                let dinv = d.clone().try_inverse().ok_or("D is singular")?;
                Ok(VariantForm {
                    b_x: b * &dinv,
                    minv: d.clone(),
                    kc: -dinv,
                    ks: None,
                    cc: None,
                    cs: None,
                    sigma: 0.0,
                })
            }
            Variant::Pr => {
                square()?;
                let r = d + d.transpose();
                try_cholesky_pd(&r).ok_or("D + Dᵀ is not positive definite")?;
                let rh = sqrt_spd(&r).ok_or("D + Dᵀ is not positive definite")?;
                let rmh = inv_sqrt_spd(&r).ok_or("D + Dᵀ is not positive definite")?;
                let rinv = &rmh * &rmh;
                Ok(VariantForm {
                    b_x: b * &rmh,
                    minv: rh,
                    kc: -rinv,
                    ks: None,
                    cc: Some(rmh),
                    cs: None,
                    sigma: 1.0,
                })
            }
            Variant::Br => {
                let r = Mat::identity(p, p) - d * d.transpose();
                try_cholesky_pd(&r).ok_or("I − DDᵀ is not positive definite")?;
                let rmh = inv_sqrt_spd(&r).ok_or("I − DDᵀ is not positive definite")?;
                let rinv = &rmh * &rmh;
                let mm = Mat::identity(m, m) + d.transpose() * &rinv * d;
                let mh = sqrt_spd(&mm).ok_or("I + DᵀR⁻¹D is not positive definite")?;
                let minv = inv_sqrt_spd(&mm).ok_or("I + DᵀR⁻¹D is not positive definite")?;
                Ok(VariantForm {
                    b_x: b * &mh,
                    minv,
                    kc: d.transpose() * &rinv,
                    ks: None,
                    cc: Some(rmh),
                    cs: None,
                    sigma: 1.0,
                })
            }
            Variant::Sf => {
                let r = d.transpose() * d;
                try_cholesky_pd(&r).ok_or("DᵀD is not positive definite")?;
                let rh = sqrt_spd(&r).ok_or("DᵀD is not positive definite")?;
                let rmh = inv_sqrt_spd(&r).ok_or("DᵀD is not positive definite")?;
                let rinv = &rmh * &rmh;
                Ok(VariantForm {
                    b_x: b * &rmh,
                    minv: rh,
                    kc: -(&rinv * d.transpose()),
                    ks: Some(-rinv),
                    cc: Some(&rmh * d.transpose()),
                    cs: Some(rmh),
                    sigma: 1.0,
                })
            }
        }
    }

    /// `L̃` and `C_x V` for the current basis, given `L`, `C V` and (for the
    /// spectral-factor form) `Bᵀ Q V`.
    pub fn small_data(&self, l: &Mat, cv: &Mat, bqv: Option<&Mat>) -> (Mat, Option<Mat>) {
        let mut kv = &self.kc * cv;
        if let (Some(ks), Some(bqv)) = (&self.ks, bqv) {
            kv += ks * bqv;
        }
        let lt = &self.minv * (l - kv);
        let cxv = self.cc.as_ref().map(|cc| {
            let mut x = cc * cv;
            if let (Some(cs), Some(bqv)) = (&self.cs, bqv) {
                x += cs * bqv;
            }
            x
        });
        (lt, cxv)
    }
}
