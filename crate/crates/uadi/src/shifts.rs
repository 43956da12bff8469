//! Self-generating ADI shifts.
//!
//! Shifts are computed on the fly from the residual factors and the solve
//! directions accumulated by a [`UadiState`]: Ritz values of small
//! projections (Projection-I/II) or the most dominant pole of a projected
//! model (subspace strategies). Side 0 produces α for `G₁`, side 1 produces
//! β for `G₂` (through its dual).

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::classic::{is_real_shift, to_units, ShiftUnit};
use crate::engine::{Equation, EquationStatus, UadiState};
use crate::error::{Result, UadiError};
use crate::linalg::{lu_solve, orth, orth_against, small_eig_real, to_complex, CMat, Mat};
use crate::system::StateSpaceSystem;

/// Default initial shift of the adaptive strategies.
pub const INITIAL_SHIFT: f64 = -0.001;
/// Default cap on stored history columns.
pub const DEFAULT_CAP: usize = 20;

/// Forces a candidate into the open left half-plane: a positive real part
/// is mirrored, a zero or tiny one is pushed to `−1e-8·(1+|λ|)`, and
/// roundoff-level imaginary parts are removed.
pub fn sanitize_shift(lambda: Complex64) -> Result<Complex64> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(UadiError::NonFiniteShift(lambda));
    }
    let im = if is_real_shift(lambda) { 0.0 } else { lambda.im };
    let floor = -1e-8 * (1.0 + lambda.norm());
    let re = (-lambda.re.abs()).min(floor);
    Ok(Complex64::new(re, im))
}

/// Ritz values of the pencil `(A, E)` projected onto `orth(z)`, sanitized,
/// conjugate pairs adjacent with the positive imaginary part first.
fn ritz_shifts(z: &Mat, sys: &StateSpaceSystem) -> Result<Vec<Complex64>> {
    let h = orth(z);
    if h.ncols() == 0 {
        return Err(UadiError::ZeroResidual);
    }
    let ah = h.transpose() * sys.a.mul(&h);
    let eh = h.transpose() * sys.e.mul(&h);
    let eig = small_eig_real(&ah, Some(&eh))?;
    let mut out = Vec::new();
    for &v in &eig.values {
        let s = sanitize_shift(v)?;
        if s.im == 0.0 {
            out.push(s);
        } else if s.im > 0.0 {
            out.push(s);
            out.push(s.conj());
        }
    }
    Ok(out)
}

/// Projection-I: Ritz values for the subspace spanned by the Lyapunov
/// residual factor.
pub fn next_shifts_projection1(bperp: &Mat, sys: &StateSpaceSystem) -> Result<Vec<Complex64>> {
    ritz_shifts(bperp, sys)
}

/// Projection-II: Ritz values for the subspace spanned by the last solve
/// direction.
pub fn next_shifts_projection2(v_last: &Mat, sys: &StateSpaceSystem) -> Result<Vec<Complex64>> {
    ritz_shifts(v_last, sys)
}

/// Candidate poles ranked by dominance `φₗ = residue / |Re λₗ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceRanking {
    pub values: Vec<Complex64>,
    /// Residue magnitude entering the score (squared norm or norm product).
    pub residues: Vec<f64>,
    pub scores: Vec<f64>,
    /// Indices into `values`, best first.
    pub order: Vec<usize>,
}

impl DominanceRanking {
    /// Scores and sorts; ties go to the larger `|Im λ|`, then the lower index.
    pub fn new(values: Vec<Complex64>, residues: Vec<f64>) -> Self {
        let scores: Vec<f64> = values
            .iter()
            .zip(&residues)
            .map(|(v, r)| {
                let d = v.re.abs();
                if d > 0.0 {
                    r / d
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| {
            scores[j]
                .total_cmp(&scores[i])
                .then(values[j].im.abs().total_cmp(&values[i].im.abs()))
                .then(i.cmp(&j))
        });
        Self {
            values,
            residues,
            scores,
            order,
        }
    }

    /// Most dominant candidate.
    pub fn top(&self) -> Option<Complex64> {
        self.order.first().map(|&i| self.values[i])
    }
}

/// Whether the ranking targets input (`B⊥`) or output (`C⊥`) residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Controllable,
    Observable,
}

fn row_norms2(m: &CMat) -> Vec<f64> {
    (0..m.nrows()).map(|i| m.row(i).norm_squared()).collect()
}

fn col_norms2(m: &CMat) -> Vec<f64> {
    (0..m.ncols()).map(|j| m.column(j).norm_squared()).collect()
}

/// Galerkin ranking on the orthonormal basis `h`. In controllable mode `r`
/// is `B⊥` (n × m) and the residues are the rows of `T⁻¹ HᵀB⊥`; in
/// observable mode `r` is `C⊥` (p × n) and the residues are the columns of
/// `C⊥ H T`, with `T` the unit-norm right eigenvectors of `Ê⁻¹Â`.
pub fn galerkin_ranking(h: &Mat, r: &Mat, sys: &StateSpaceSystem, mode: Mode) -> Result<DominanceRanking> {
    let ah = h.transpose() * sys.a.mul(h);
    let eh = h.transpose() * sys.e.mul(h);
    let eig = small_eig_real(&ah, Some(&eh))?;
    let res = match mode {
        Mode::Controllable => row_norms2(&(&eig.left * to_complex(&(h.transpose() * r)))),
        Mode::Observable => col_norms2(&(to_complex(&(r * h)) * &eig.right)),
    };
    Ok(DominanceRanking::new(eig.values, res))
}

/// Two-sided (Petrov) ranking `φ̃ₗ = ‖r_c‖·‖r_b‖ / |Re λₗ|` with
/// `Ê = WᵀEV`, `Ã = Ê⁻¹WᵀAV`, `B̃ = Ê⁻¹WᵀB⊥`, `Ĉ = C⊥V`.
pub fn petrov_ranking(
    hv: &Mat,
    hw: &Mat,
    bperp: &Mat,
    cperp: &Mat,
    sys: &StateSpaceSystem,
) -> Result<DominanceRanking> {
    if hv.ncols() != hw.ncols() || hv.ncols() == 0 {
        return Err(UadiError::SingularProjectedE);
    }
    let eh = hw.transpose() * sys.e.mul(hv);
    let sv = eh.clone().svd(false, false).singular_values;
    if !(sv.min() > 1e-12 * sv.max()) {
        return Err(UadiError::SingularProjectedE);
    }
    let ah = hw.transpose() * sys.a.mul(hv);
    let at = lu_solve(&eh, &ah).ok_or(UadiError::SingularProjectedE)?;
    let bt = lu_solve(&eh, &(hw.transpose() * bperp)).ok_or(UadiError::SingularProjectedE)?;
    let eig = small_eig_real(&at, None)?;
    let rb = row_norms2(&(&eig.left * to_complex(&bt)));
    let rc = col_norms2(&(to_complex(&(cperp * hv)) * &eig.right));
    let res = rb.iter().zip(&rc).map(|(b, c)| (b * c).sqrt()).collect();
    Ok(DominanceRanking::new(eig.values, res))
}

fn top_shift(rank: &DominanceRanking) -> Result<Complex64> {
    let z = sanitize_shift(rank.top().ok_or(UadiError::EigFailure)?)?;
    Ok(if z.im < 0.0 { z.conj() } else { z })
}

/// Most dominant pole of the Galerkin projection onto `history`; the second
/// value is the conjugate to be used next when the pole is complex.
pub fn next_shift_subspace(
    history: &Mat,
    r: &Mat,
    sys: &StateSpaceSystem,
    mode: Mode,
) -> Result<(Complex64, Option<Complex64>)> {
    if history.ncols() == 0 {
        return Err(UadiError::InvalidSize("empty history".into()));
    }
    if r.norm() == 0.0 {
        return Err(UadiError::ZeroResidual);
    }
    let h = orth(history);
    let z = top_shift(&galerkin_ranking(&h, r, sys, mode)?)?;
    Ok((z, (z.im != 0.0).then(|| z.conj())))
}

/// Most simultaneously controllable and observable pole; emitted as both α
/// and β. A singular `WᵀEV` falls back to the Galerkin ranking on `V`.
pub fn next_shift_petrov_bt(
    history_v: &Mat,
    history_w: &Mat,
    bperp: &Mat,
    cperp: &Mat,
    sys: &StateSpaceSystem,
) -> Result<(Complex64, Option<Complex64>)> {
    if bperp.norm() == 0.0 && cperp.norm() == 0.0 {
        return Err(UadiError::ZeroResidual);
    }
    let (hv, hw) = (orth(history_v), orth(history_w));
    let z = match petrov_ranking(&hv, &hw, bperp, cperp, sys) {
        Ok(r) => top_shift(&r)?,
        Err(UadiError::SingularProjectedE) => {
            log::warn!("projected E is singular; falling back to the Galerkin ranking");
            top_shift(&galerkin_ranking(&hv, bperp, sys, Mode::Controllable)?)?
        }
        Err(e) => return Err(e),
    };
    Ok((z, (z.im != 0.0).then(|| z.conj())))
}

/// Orthonormal solve-direction history with implicit restart.
#[derive(Debug, Clone)]
pub struct History {
    basis: Mat,
    cap: usize,
    restarts: usize,
}

impl History {
    pub fn new(n: usize, cap: usize) -> Self {
        Self {
            basis: Mat::zeros(n, 0),
            cap: cap.max(1),
            restarts: 0,
        }
    }

    /// Appends a block; when the cap would be exceeded the stored history is
    /// discarded and restarted from the newest block alone.
    pub fn push(&mut self, block: &Mat) {
        let fresh = orth_against(&self.basis, block);
        if self.basis.ncols() + fresh.ncols() > self.cap {
            let mut b = orth(block);
            if b.ncols() > self.cap {
                b = b.columns(b.ncols() - self.cap, self.cap).into_owned();
            }
            self.basis = b;
            self.restarts += 1;
        } else {
            self.basis = crate::linalg::hcat(&self.basis, &fresh);
        }
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn cols(&self) -> usize {
        self.basis.ncols()
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }
}

/// Shift strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Static,
    Projection1,
    Projection2,
    /// Independent Galerkin dominance on each side.
    SubspaceGalerkin,
    /// Two-sided dominance, α = β (requires `G₁ = G₂`).
    SubspacePetrov,
    /// Alternates between the Sylvester residual factors of `G₁` and `G₂`,
    /// α = β.
    SylvesterAlternating,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Static => "static",
            Strategy::Projection1 => "projection1",
            Strategy::Projection2 => "projection2",
            Strategy::SubspaceGalerkin => "subspace-galerkin",
            Strategy::SubspacePetrov => "subspace-petrov",
            Strategy::SylvesterAlternating => "sylvester-alternating",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = UadiError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "static" => Strategy::Static,
            "proj1" | "projection1" => Strategy::Projection1,
            "proj2" | "projection2" => Strategy::Projection2,
            "subspace" | "subspace-galerkin" => Strategy::SubspaceGalerkin,
            "petrov-bt" | "subspace-petrov" => Strategy::SubspacePetrov,
            "sylv-alt" | "sylvester-alternating" => Strategy::SylvesterAlternating,
            _ => return Err(UadiError::ParseError(format!("unknown shift strategy `{s}`"))),
        })
    }
}

/// Emits the next α/β units for a [`UadiState`].
#[derive(Debug, Clone)]
pub struct ShiftOracle {
    strategy: Strategy,
    cap: usize,
    initial: Complex64,
    pending: [VecDeque<ShiftUnit>; 2],
    history: [Option<History>; 2],
    seen_steps: usize,
    calls: usize,
    emitted: [Vec<Complex64>; 2],
}

impl ShiftOracle {
    /// Adaptive oracle with the given history cap.
    pub fn new(strategy: Strategy, cap: usize) -> Self {
        Self {
            strategy,
            cap,
            initial: Complex64::new(INITIAL_SHIFT, 0.0),
            pending: [VecDeque::new(), VecDeque::new()],
            history: [None, None],
            seen_steps: 0,
            calls: 0,
            emitted: [Vec::new(), Vec::new()],
        }
    }

    /// User-supplied lists; complex shifts must be followed by their
    /// conjugates. When one list runs out the other continues alone.
    pub fn with_static(alpha: &[Complex64], beta: &[Complex64]) -> Result<Self> {
        let mut o = Self::new(Strategy::Static, DEFAULT_CAP);
        o.pending = [to_units(alpha, true)?.into(), to_units(beta, true)?.into()];
        Ok(o)
    }

    /// Replaces the initial shift (sanitized).
    pub fn with_initial(mut self, z: Complex64) -> Result<Self> {
        self.initial = sanitize_shift(z)?;
        Ok(self)
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Shift values emitted for side `k`, conjugates included.
    pub fn emitted(&self, k: usize) -> &[Complex64] {
        &self.emitted[k]
    }

    /// Current stored history of side `k`.
    pub fn history(&self, k: usize) -> Option<&History> {
        self.history[k].as_ref()
    }

    fn observe(&mut self, state: &UadiState) {
        if state.steps() == self.seen_steps {
            return;
        }
        self.seen_steps = state.steps();
        for k in 0..2 {
            let blk = state.side(k).last_block();
            if blk.ncols() == 0 {
                continue;
            }
            let cap = self.cap;
            self.history[k]
                .get_or_insert_with(|| History::new(blk.nrows(), cap))
                .push(blk);
        }
    }

    fn hist(&self, k: usize) -> Option<&Mat> {
        self.history[k].as_ref().map(|h| h.basis()).filter(|b| b.ncols() > 0)
    }

    fn unit(z: Complex64) -> ShiftUnit {
        ShiftUnit::from_shift(if z.im < 0.0 { z.conj() } else { z })
    }

    fn adaptive(&mut self, state: &UadiState) -> Result<(Option<ShiftUnit>, Option<ShiftUnit>)> {
        let init = Self::unit(self.initial);
        let same = |u: ShiftUnit| (Some(u), Some(u));
        let (s0, s1) = (state.side(0), state.side(1));
        let g1 = state.g1();
        let g2 = state.g2();
        match self.strategy {
            Strategy::Static => unreachable!(),
            Strategy::Projection1 | Strategy::Projection2 => {
                let mut out = [None, None];
                for k in 0..2 {
                    if self.pending[k].is_empty() {
                        let side = state.side(k);
                        let list = if self.strategy == Strategy::Projection1 {
                            next_shifts_projection1(side.bperp(), side.system())
                        } else if side.cols() == 0 {
                            Ok(vec![self.initial])
                        } else {
                            next_shifts_projection2(side.last_block(), side.system())
                        };
                        match list {
                            Ok(l) => self.pending[k].extend(to_units(&l, true)?),
                            Err(UadiError::ZeroResidual) => {}
                            Err(e) => return Err(e),
                        }
                    }
                    out[k] = self.pending[k].pop_front();
                }
                Ok((out[0], out[1]))
            }
            Strategy::SubspaceGalerkin => {
                let mut out = [Some(init), Some(init)];
                if let Some(h) = self.hist(0) {
                    out[0] = match next_shift_subspace(h, s0.bperp(), g1, Mode::Controllable) {
                        Ok((z, _)) => Some(Self::unit(z)),
                        Err(UadiError::ZeroResidual) => None,
                        Err(e) => return Err(e),
                    };
                }
                if let Some(h) = self.hist(1) {
                    let cperp = s1.bperp().transpose();
                    out[1] = match next_shift_subspace(h, &cperp, g2, Mode::Observable) {
                        Ok((z, _)) => Some(Self::unit(z)),
                        Err(UadiError::ZeroResidual) => None,
                        Err(e) => return Err(e),
                    };
                }
                Ok((out[0], out[1]))
            }
            Strategy::SubspacePetrov => {
                let (Some(hv), Some(hw)) = (self.hist(0), self.hist(1)) else {
                    return Ok(same(init));
                };
                let cperp = s1.bperp().transpose();
                match next_shift_petrov_bt(hv, hw, s0.bperp(), &cperp, g1) {
                    Ok((z, _)) => Ok(same(Self::unit(z))),
                    Err(UadiError::ZeroResidual) => Ok((None, None)),
                    Err(e) => Err(e),
                }
            }
            Strategy::SylvesterAlternating => {
                if self.hist(0).is_none() || self.hist(1).is_none() {
                    return Ok(same(init));
                }
                self.calls += 1;
                let (hv, hw) = (self.hist(0).unwrap(), self.hist(1).unwrap());
                let (bperp, cperp) = match (state.status(Equation::Sylv), state.sylvester()) {
                    (EquationStatus::Active, Ok(x)) => (x.bperp.clone(), x.cperp.clone()),
                    _ => (s0.bperp().clone(), s1.bperp().transpose()),
                };
                let r = if self.calls % 2 == 1 {
                    next_shift_subspace(hv, &bperp, g1, Mode::Controllable)
                } else {
                    next_shift_subspace(hw, &cperp, g2, Mode::Observable)
                };
                match r {
                    Ok((z, _)) => Ok(same(Self::unit(z))),
                    Err(UadiError::ZeroResidual) => Ok((None, None)),
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// Next α and β units; `None` on a side means that side has nothing to
    /// do (static list exhausted or residual exactly zero).
    pub fn next_units(&mut self, state: &UadiState) -> Result<(Option<ShiftUnit>, Option<ShiftUnit>)> {
        self.observe(state);
        let (a, b) = if self.strategy == Strategy::Static {
            (self.pending[0].pop_front(), self.pending[1].pop_front())
        } else {
            self.adaptive(state)?
        };
        for (k, u) in [(0, a), (1, b)] {
            if let Some(u) = u {
                self.emitted[k].extend(u.values());
            }
        }
        log::debug!(
            "step {}: alpha {:?}, beta {:?}",
            state.steps() + 1,
            a.map(|u| u.shift()),
            b.map(|u| u.shift())
        );
        Ok((a, b))
    }

    /// Steps `state` until every active residual is `≤ tol` (checked after
    /// each step, so at least one step is taken), `max_steps` steps were
    /// taken, or the oracle has nothing left to emit. Returns `true` on
    /// convergence.
    pub fn drive(&mut self, state: &mut UadiState, max_steps: usize, tol: f64) -> Result<bool> {
        for _ in 0..max_steps {
            let (a, b) = self.next_units(state)?;
            if a.is_none() && b.is_none() {
                break;
            }
            state.step_units(a, b)?;
            if state.converged(tol) {
                return Ok(true);
            }
        }
        Ok(state.converged(tol))
    }
}
