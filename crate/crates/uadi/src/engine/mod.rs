//! The unified ADI iteration.
//!
//! Each step performs one shifted solve with `A₁ + αE₁` and one with
//! `A₂ᵀ + βE₂ᵀ`, appending realified blocks to the two shared bases
//! `V` (of `G₁`) and `W` (of the dual of `G₂`). Every other equation is then
//! recovered from small data only:
//!
//! * one-sided variants: `P = V Y⁻¹ Vᵀ` with
//!   `−SᵀY − Y S + L̃ᵀL̃ − σ (C_xV)ᵀ(C_xV) = 0` (see [`variant`]), and
//!   `B⊥_x = B_x − E V Y⁻¹ L̃ᵀ`;
//! * Sylvester: `X = V X̃⁻¹ Wᵀ` with `−S_wᵀX̃ − X̃ S_v + L_wᵀL_v = 0`,
//!   `B⊥ = B₁ − E₁V X̃⁻¹L_wᵀ`, `C⊥ = C₂ − L_v X̃⁻¹ WᵀE₂`.
//!
//! Observability-type equations are the controllability-type equations of
//! the dual of `G₂`, driven by the β shifts.

mod side;
pub mod variant;

pub use side::SideAccumulator;
pub use variant::{Variant, VariantForm};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::classic::{to_units, LowRankSolution, ResidualFactor, ResidualSide, ShiftUnit};
use crate::error::{Result, UadiError};
use crate::linalg::{gram_norm2, inverse, kron, solve_kron_sylvester, symmetrize, KronOperator, Mat};
use crate::system::{EquationParams, StateSpaceSystem};

/// The seventeen equations of the framework.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Equation {
    P1,
    Q2,
    Ps,
    Qs,
    Pmp,
    Qmp,
    Sylv,
    Pricc,
    Qricc,
    Pinf,
    Qinf,
    Ppr,
    Qpr,
    Pbr,
    Qbr,
    Psf,
    Qsf,
}

impl Equation {
    pub const ALL: [Equation; 17] = [
        Equation::P1,
        Equation::Q2,
        Equation::Ps,
        Equation::Qs,
        Equation::Pmp,
        Equation::Qmp,
        Equation::Sylv,
        Equation::Pricc,
        Equation::Qricc,
        Equation::Pinf,
        Equation::Qinf,
        Equation::Ppr,
        Equation::Qpr,
        Equation::Pbr,
        Equation::Qbr,
        Equation::Psf,
        Equation::Qsf,
    ];

    /// Short tag used in reports and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Equation::P1 => "p1",
            Equation::Q2 => "q2",
            Equation::Ps => "ps",
            Equation::Qs => "qs",
            Equation::Pmp => "pmp",
            Equation::Qmp => "qmp",
            Equation::Sylv => "sylv",
            Equation::Pricc => "pricc",
            Equation::Qricc => "qricc",
            Equation::Pinf => "pinf",
            Equation::Qinf => "qinf",
            Equation::Ppr => "ppr",
            Equation::Qpr => "qpr",
            Equation::Pbr => "pbr",
            Equation::Qbr => "qbr",
            Equation::Psf => "psf",
            Equation::Qsf => "qsf",
        }
    }

    /// `(side, variant)` for one-sided equations (side 0 = `G₁`/α,
    /// side 1 = dual of `G₂`/β); `None` for Sylvester.
    pub fn one_sided(self) -> Option<(usize, Variant)> {
        use Equation::*;
        Some(match self {
            P1 => (0, Variant::Lyap),
            Q2 => (1, Variant::Lyap),
            Ps => (0, Variant::Ldl),
            Qs => (1, Variant::Ldl),
            Pmp => (0, Variant::Mp),
            Qmp => (1, Variant::Mp),
            Pricc => (0, Variant::Ricc),
            Qricc => (1, Variant::Ricc),
            Pinf => (0, Variant::Inf),
            Qinf => (1, Variant::Inf),
            Ppr => (0, Variant::Pr),
            Qpr => (1, Variant::Pr),
            Pbr => (0, Variant::Br),
            Qbr => (1, Variant::Br),
            Psf => (0, Variant::Sf),
            Qsf => (1, Variant::Sf),
            Sylv => return None,
        })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Equation {
    type Err = UadiError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Equation::ALL
            .into_iter()
            .find(|e| e.name() == t)
            .ok_or_else(|| UadiError::ParseError(format!("unknown equation `{s}`")))
    }
}

/// Set of requested equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquationSelection {
    flags: [bool; 17],
}

impl EquationSelection {
    pub fn all() -> Self {
        Self { flags: [true; 17] }
    }

    pub fn none() -> Self {
        Self { flags: [false; 17] }
    }

    /// Selection containing exactly the listed equations.
    pub fn of(eqs: &[Equation]) -> Self {
        let mut s = Self::none();
        for &e in eqs {
            s = s.with(e);
        }
        s
    }

    fn index(eq: Equation) -> usize {
        Equation::ALL.iter().position(|&e| e == eq).unwrap()
    }

    pub fn with(mut self, eq: Equation) -> Self {
        self.flags[Self::index(eq)] = true;
        self
    }

    pub fn without(mut self, eq: Equation) -> Self {
        self.flags[Self::index(eq)] = false;
        self
    }

    pub fn contains(&self, eq: Equation) -> bool {
        self.flags[Self::index(eq)]
    }

    pub fn iter(&self) -> impl Iterator<Item = Equation> + '_ {
        Equation::ALL.into_iter().filter(|&e| self.contains(e))
    }
}

impl FromStr for EquationSelection {
    type Err = UadiError;

    /// `all` or a comma-separated list of equation tags.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::all());
        }
        let mut sel = Self::none();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            sel = sel.with(part.parse()?);
        }
        Ok(sel)
    }
}

/// How infeasible requests are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeasibilityMode {
    /// Skip with a recorded reason.
    #[default]
    Lenient,
    /// Fail initialization.
    Strict,
}

/// Per-equation state.
#[derive(Debug, Clone, PartialEq)]
pub enum EquationStatus {
    Active,
    /// Not requested or infeasible.
    Skipped(String),
    /// The last extraction failed; retried every step.
    Degraded(String),
    /// Sylvester only: the two sides currently hold different numbers of
    /// shift values, so no iterate is defined.
    Pending,
}

/// Small-scale data of a one-sided equation.
#[derive(Debug, Clone)]
pub struct OneSidedExtraction {
    /// `Y` of the projected Lyapunov equation.
    pub y: Mat,
    /// `Y⁻¹`, the middle factor of `P = V Y⁻¹ Vᵀ`.
    pub middle: Mat,
    /// `L̃ = M⁻¹(L − K V)`.
    pub ltilde: Mat,
    /// `C_x V`.
    pub cxv: Option<Mat>,
    pub sigma: f64,
    pub bperp: Mat,
}

/// Small-scale data of the Sylvester equation.
#[derive(Debug, Clone)]
pub struct SylvesterExtraction {
    /// `X̃` with `−S_wᵀ X̃ − X̃ S_v + L_wᵀ L_v = 0`.
    pub xt: Mat,
    /// `X̃⁻¹`.
    pub middle: Mat,
    pub bperp: Mat,
    /// `C⊥` (p₂ × n₂).
    pub cperp: Mat,
}

#[derive(Debug, Clone)]
enum Extraction {
    One(OneSidedExtraction),
    Sylv(SylvesterExtraction),
}

#[derive(Debug, Clone)]
struct Slot {
    status: EquationStatus,
    form: Option<VariantForm>,
    extraction: Option<Extraction>,
    scale: f64,
    residual: f64,
}

/// Normalized residuals recorded after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub alpha: Option<Complex64>,
    pub beta: Option<Complex64>,
    pub residuals: Vec<(Equation, f64)>,
}

/// All accumulators of a unified ADI run.
#[derive(Debug, Clone)]
pub struct UadiState {
    g1: StateSpaceSystem,
    g2: StateSpaceSystem,
    params: EquationParams,
    sides: [SideAccumulator; 2],
    slots: BTreeMap<Equation, Slot>,
    steps: usize,
    solves: usize,
    history: Vec<StepRecord>,
}

impl UadiState {
    /// Seeds all accumulators (`B⊥ = B_x`, `C⊥ = C_x`) and decides which
    /// equations are feasible.
    pub fn new(
        g1: StateSpaceSystem,
        g2: StateSpaceSystem,
        params: EquationParams,
        select: EquationSelection,
        mode: FeasibilityMode,
    ) -> Result<Self> {
        let dual2 = g2.dual();
        if params.s1.nrows() != g1.m() || params.s2.nrows() != g2.p() {
            return Err(UadiError::DimensionMismatch(format!(
                "S1 is {0}x{0} and S2 is {1}x{1}; expected {2} and {3}",
                params.s1.nrows(),
                params.s2.nrows(),
                g1.m(),
                g2.p()
            )));
        }
        let same = g1.same_realization(&g2);
        let mut slots = BTreeMap::new();
        for eq in Equation::ALL {
            let mut scale = 0.0;
            let mut form = None;
            let status = if !select.contains(eq) {
                EquationStatus::Skipped("not requested".into())
            } else {
                let verdict: std::result::Result<(), String> = match eq.one_sided() {
                    None => {
                        if g1.m() != g2.p() {
                            Err(format!("m1 = {} differs from p2 = {}", g1.m(), g2.p()))
                        } else {
                            scale = gram_norm2(&g1.b, None, Some(&g2.c.transpose()))?;
                            Ok(())
                        }
                    }
                    Some((side, variant)) => {
                        let sys = if side == 0 { &g1 } else { &dual2 };
                        let gamma = if side == 0 { params.gamma1 } else { params.gamma2 };
                        if variant == Variant::Sf && !same {
                            Err("requires G1 = G2".to_string())
                        } else {
                            VariantForm::build(variant, sys, gamma).map(|f| {
                                form = Some(f);
                            })
                        }
                    }
                };
                match verdict {
                    Ok(()) => EquationStatus::Active,
                    Err(reason) => {
                        if mode == FeasibilityMode::Strict {
                            return Err(UadiError::InfeasibleHard {
                                equation: eq.name().into(),
                                reason,
                            });
                        }
                        log::info!("equation {eq} skipped: {reason}");
                        EquationStatus::Skipped(reason)
                    }
                }
            };
            if let (Some(f), Some((side, variant))) = (&form, eq.one_sided()) {
                let s = if side == 0 { &params.s1 } else { &params.s2 };
                scale = match variant {
                    Variant::Ldl => gram_norm2(&f.b_x, Some(s), None)?,
                    _ => gram_norm2(&f.b_x, None, None)?,
                };
            }
            slots.insert(
                eq,
                Slot {
                    status,
                    form,
                    extraction: None,
                    scale,
                    residual: 1.0,
                },
            );
        }
        let mut st = Self {
            sides: [SideAccumulator::new(g1.clone()), SideAccumulator::new(dual2)],
            g1,
            g2,
            params,
            slots,
            steps: 0,
            solves: 0,
            history: Vec::new(),
        };
        st.refresh();
        Ok(st)
    }

    /// Lenient initialization with default weights.
    pub fn with_defaults(g1: StateSpaceSystem, g2: StateSpaceSystem, select: EquationSelection) -> Result<Self> {
        let params = EquationParams::default_for(&g1, &g2);
        Self::new(g1, g2, params, select, FeasibilityMode::Lenient)
    }

    /// One step with shifts `α` and `β`; a complex shift stands for its
    /// conjugate pair.
    pub fn step(&mut self, alpha: Complex64, beta: Complex64) -> Result<()> {
        let a = unit_of(alpha)?;
        let b = unit_of(beta)?;
        self.step_units(Some(a), Some(b))
    }

    /// One step on either or both sides. A two-sided step performs exactly
    /// two shifted solves, a one-sided step exactly one.
    pub fn step_units(&mut self, alpha: Option<ShiftUnit>, beta: Option<ShiftUnit>) -> Result<()> {
        if alpha.is_none() && beta.is_none() {
            return Ok(());
        }
        let [s0, s1] = &self.sides;
        let (b0, b1) = std::thread::scope(|sc| {
            let h = beta.map(|u| sc.spawn(move || s1.solve_block(u)));
            let r0 = alpha.map(|u| s0.solve_block(u));
            let r1 = h.map(|h| h.join().expect("solve thread panicked"));
            (r0, r1)
        });
        let b0 = b0.transpose()?;
        let b1 = b1.transpose()?;
        if let (Some(u), Some(blk)) = (alpha, b0) {
            self.sides[0].apply(u, blk);
            self.solves += 1;
        }
        if let (Some(u), Some(blk)) = (beta, b1) {
            self.sides[1].apply(u, blk);
            self.solves += 1;
        }
        self.steps += 1;
        self.refresh();
        self.history.push(StepRecord {
            step: self.steps,
            alpha: alpha.map(|u| u.shift()),
            beta: beta.map(|u| u.shift()),
            residuals: self.residuals(),
        });
        Ok(())
    }

    /// Runs static shift lists, pairing realified units in order; when one
    /// list is exhausted the other continues with one-sided steps. Stops
    /// after `max_steps` steps or once every active residual is `≤ tol`.
    /// Returns `true` on convergence.
    pub fn run_static(&mut self, alpha: &[Complex64], beta: &[Complex64], max_steps: usize, tol: f64) -> Result<bool> {
        let ua = to_units(alpha, true)?;
        let ub = to_units(beta, true)?;
        let n = ua.len().max(ub.len());
        for k in 0..n.min(max_steps) {
            self.step_units(ua.get(k).copied(), ub.get(k).copied())?;
            if self.converged(tol) {
                return Ok(true);
            }
        }
        Ok(self.converged(tol))
    }

    fn bqv(&self, side: usize) -> Mat {
        // Bᵀ Q V with Q = W Wᵀ the other side's Gramian.
        let this = &self.sides[side];
        let other = self.sides[1 - side].basis();
        let btw = this.system().b.transpose() * other;
        btw * (other.transpose() * this.basis())
    }

    fn extract_one(&self, eq: Equation, form: &VariantForm) -> Result<OneSidedExtraction> {
        let (side, variant) = eq.one_sided().unwrap();
        let acc = &self.sides[side];
        let k = acc.cols();
        let l = acc.l_full();
        match variant {
            Variant::Lyap | Variant::Ldl => {
                let middle = if variant == Variant::Ldl {
                    let s = if side == 0 { &self.params.s1 } else { &self.params.s2 };
                    kron(&Mat::identity(acc.blocks().iter().sum(), acc.blocks().iter().sum()), s)
                } else {
                    Mat::identity(k, k)
                };
                Ok(OneSidedExtraction {
                    y: Mat::identity(k, k),
                    middle,
                    ltilde: l,
                    cxv: None,
                    sigma: 0.0,
                    bperp: acc.bperp().clone(),
                })
            }
            _ => {
                let bqv = (variant == Variant::Sf).then(|| self.bqv(side));
                let (lt, cxv) = form.small_data(&l, acc.cbasis(), bqv.as_ref());
                let mut h = lt.transpose() * &lt;
                if let Some(c) = &cxv {
                    h -= c.transpose() * c * form.sigma;
                }
                let fcore = -acc.s_core().transpose();
                let m = acc.m();
                let y = solve_kron_sylvester(
                    &KronOperator { core: &fcore, blocks: acc.blocks(), m },
                    &KronOperator { core: acc.s_core(), blocks: acc.blocks(), m },
                    &h,
                )?;
                let y = symmetrize(&y);
                let middle = symmetrize(&inverse(&y).ok_or_else(|| UadiError::ExtractionSingular(eq.name().into()))?);
                let bperp = &form.b_x - acc.ebasis() * &middle * lt.transpose();
                Ok(OneSidedExtraction {
                    y,
                    middle,
                    ltilde: lt,
                    cxv,
                    sigma: form.sigma,
                    bperp,
                })
            }
        }
    }

    fn extract_sylv(&self) -> Result<SylvesterExtraction> {
        let (v, w) = (&self.sides[0], &self.sides[1]);
        let fcore = -w.s_core().transpose();
        let lv = v.l_full();
        let lw = w.l_full();
        let xt = solve_kron_sylvester(
            &KronOperator { core: &fcore, blocks: w.blocks(), m: w.m() },
            &KronOperator { core: v.s_core(), blocks: v.blocks(), m: v.m() },
            &(lw.transpose() * &lv),
        )?;
        let middle = inverse(&xt).ok_or_else(|| UadiError::ExtractionSingular("sylv".into()))?;
        let bperp = &self.g1.b - v.ebasis() * &middle * lw.transpose();
        let cperp = &self.g2.c - &lv * &middle * w.ebasis().transpose();
        Ok(SylvesterExtraction { xt, middle, bperp, cperp })
    }

    /// Recomputes every active extraction and residual norm.
    fn refresh(&mut self) {
        let balanced = self.sides[0].width() == self.sides[1].width();
        let eqs: Vec<Equation> = self.slots.keys().copied().collect();
        for eq in eqs {
            let slot = &self.slots[&eq];
            if matches!(slot.status, EquationStatus::Skipped(_)) {
                continue;
            }
            let outcome = match eq.one_sided() {
                None if !balanced => {
                    let s = self.slots.get_mut(&eq).unwrap();
                    s.status = EquationStatus::Pending;
                    continue;
                }
                None => self.extract_sylv().map(Extraction::Sylv),
                Some(_) => self.extract_one(eq, slot.form.as_ref().unwrap()).map(Extraction::One),
            };
            let outcome = outcome.and_then(|x| {
                let r = residual_of(&x, eq, &self.params)?.norm()?;
                Ok((x, r))
            });
            let s = self.slots.get_mut(&eq).unwrap();
            match outcome {
                Ok((x, r)) => {
                    s.residual = if s.scale > 0.0 { r / s.scale } else { r };
                    s.extraction = Some(x);
                    s.status = EquationStatus::Active;
                }
                Err(e) => {
                    log::warn!("equation {eq} degraded at step {}: {e}", self.steps);
                    s.status = EquationStatus::Degraded(e.to_string());
                    s.extraction = None;
                }
            }
        }
    }

    /// `(equation, normalized residual)` for every active equation.
    pub fn residuals(&self) -> Vec<(Equation, f64)> {
        self.slots
            .iter()
            .filter(|(_, s)| s.status == EquationStatus::Active)
            .map(|(&e, s)| (e, s.residual))
            .collect()
    }

    /// `true` when every active equation has normalized residual `≤ tol`.
    pub fn converged(&self, tol: f64) -> bool {
        self.slots.values().all(|s| match s.status {
            EquationStatus::Active => s.residual <= tol,
            EquationStatus::Skipped(_) => true,
            _ => false,
        })
    }

    pub fn status(&self, eq: Equation) -> &EquationStatus {
        &self.slots[&eq].status
    }

    /// Whether the equation was requested and is feasible.
    pub fn is_enabled(&self, eq: Equation) -> bool {
        !matches!(self.slots[&eq].status, EquationStatus::Skipped(_))
    }

    fn require(&self, eq: Equation) -> Result<&Slot> {
        let s = &self.slots[&eq];
        match &s.status {
            EquationStatus::Active => Ok(s),
            EquationStatus::Skipped(_) | EquationStatus::Pending => Err(UadiError::EquationSkipped(eq.name().into())),
            EquationStatus::Degraded(_) => Err(UadiError::ExtractionSingular(eq.name().into())),
        }
    }

    /// Normalized residual `‖R‖₂ / ‖constant term‖₂`.
    pub fn residual_norm(&self, eq: Equation) -> Result<f64> {
        Ok(self.require(eq)?.residual)
    }

    /// Residual factor whose Gram product is the exact residual.
    pub fn residual_factor(&self, eq: Equation) -> Result<ResidualFactor> {
        let s = self.require(eq)?;
        residual_of(s.extraction.as_ref().unwrap(), eq, &self.params)
    }

    /// Factored approximation of the equation's solution.
    pub fn extract_solution(&self, eq: Equation) -> Result<LowRankSolution> {
        let s = self.require(eq)?;
        Ok(match s.extraction.as_ref().unwrap() {
            Extraction::Sylv(x) => LowRankSolution {
                left: self.sides[0].basis().clone(),
                middle: Some(x.middle.clone()),
                right: Some(self.sides[1].basis().clone()),
                tag: eq.name().into(),
            },
            Extraction::One(x) => {
                let (side, variant) = eq.one_sided().unwrap();
                let middle = (variant != Variant::Lyap).then(|| x.middle.clone());
                LowRankSolution::symmetric(self.sides[side].basis().clone(), middle, eq.name())
            }
        })
    }

    /// Small data of an active one-sided equation.
    pub fn one_sided(&self, eq: Equation) -> Result<&OneSidedExtraction> {
        match self.require(eq)?.extraction.as_ref().unwrap() {
            Extraction::One(x) => Ok(x),
            Extraction::Sylv(_) => Err(UadiError::EquationSkipped(eq.name().into())),
        }
    }

    /// Small data of the Sylvester equation.
    pub fn sylvester(&self) -> Result<&SylvesterExtraction> {
        match self.require(Equation::Sylv)?.extraction.as_ref().unwrap() {
            Extraction::Sylv(x) => Ok(x),
            Extraction::One(_) => unreachable!(),
        }
    }

    /// Variant coefficients of a feasible one-sided equation.
    pub fn form(&self, eq: Equation) -> Option<&VariantForm> {
        self.slots[&eq].form.as_ref()
    }

    /// Side 0: `G₁` with α shifts; side 1: dual of `G₂` with β shifts.
    pub fn side(&self, k: usize) -> &SideAccumulator {
        &self.sides[k]
    }

    pub fn g1(&self) -> &StateSpaceSystem {
        &self.g1
    }

    pub fn g2(&self) -> &StateSpaceSystem {
        &self.g2
    }

    pub fn params(&self) -> &EquationParams {
        &self.params
    }

    /// Completed steps.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Large shifted factorizations + solves performed.
    pub fn large_solves(&self) -> usize {
        self.solves
    }

    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }
}

fn unit_of(z: Complex64) -> Result<ShiftUnit> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(UadiError::NonFiniteShift(z));
    }
    if z.re >= 0.0 {
        return Err(UadiError::UnstableShift(z));
    }
    Ok(ShiftUnit::from_shift(z))
}

fn residual_of(x: &Extraction, eq: Equation, params: &EquationParams) -> Result<ResidualFactor> {
    Ok(match x {
        Extraction::Sylv(s) => ResidualFactor {
            factor: s.bperp.clone(),
            middle: None,
            second: Some(s.cperp.clone()),
            side: ResidualSide::TwoSided,
        },
        Extraction::One(o) => {
            let (side, variant) = eq.one_sided().unwrap();
            let middle = (variant == Variant::Ldl).then(|| if side == 0 { params.s1.clone() } else { params.s2.clone() });
            ResidualFactor {
                factor: o.bperp.clone(),
                middle,
                second: None,
                side: if side == 0 { ResidualSide::Left } else { ResidualSide::Right },
            }
        }
    })
}
