//! One side of the unified iteration: the realified CF-ADI basis of `G₁`
//! (α shifts) or of the dual of `G₂` (β shifts) with its bookkeeping.

use num_complex::Complex64;

use crate::classic::{append_core, cf_block, CfBlock, ShiftUnit};
use crate::error::Result;
use crate::linalg::{hcat, kron, Mat};
use crate::system::StateSpaceSystem;

/// Accumulated basis `V` with `A V − E V S + B L = 0`, `S = S̃ ⊗ I_m`,
/// `L = L̃ ⊗ I_m`, and the Lyapunov residual factor `B⊥ = B − E V Lᵀ`.
#[derive(Debug, Clone)]
pub struct SideAccumulator {
    sys: StateSpaceSystem,
    basis: Mat,
    ebasis: Mat,
    cbasis: Mat,
    s_core: Mat,
    l_core: Mat,
    blocks: Vec<usize>,
    bperp: Mat,
    shifts: Vec<Complex64>,
    last: Mat,
}

impl SideAccumulator {
    pub fn new(sys: StateSpaceSystem) -> Self {
        let n = sys.n();
        Self {
            basis: Mat::zeros(n, 0),
            ebasis: Mat::zeros(n, 0),
            cbasis: Mat::zeros(sys.p(), 0),
            s_core: Mat::zeros(0, 0),
            l_core: Mat::zeros(1, 0),
            blocks: Vec::new(),
            bperp: sys.b.clone(),
            shifts: Vec::new(),
            last: Mat::zeros(n, 0),
            sys,
        }
    }

    /// Performs the single shifted solve of a step.
    pub fn solve_block(&self, unit: ShiftUnit) -> Result<CfBlock> {
        cf_block(&self.sys.a, &self.sys.e, &self.bperp, unit)
    }

    /// Appends a block produced by [`Self::solve_block`].
    pub fn apply(&mut self, unit: ShiftUnit, blk: CfBlock) {
        let (s, l) = append_core(&self.s_core, &self.l_core, &blk.s, &blk.l);
        self.s_core = s;
        self.l_core = l;
        self.blocks.push(unit.width());
        self.ebasis = hcat(&self.ebasis, &self.sys.e.mul(&blk.z));
        self.cbasis = hcat(&self.cbasis, &(&self.sys.c * &blk.z));
        self.basis = hcat(&self.basis, &blk.z);
        self.bperp = blk.bperp;
        self.shifts.extend(unit.values());
        self.last = blk.z;
    }

    /// The system this side iterates on (`G₁` or the dual of `G₂`).
    pub fn system(&self) -> &StateSpaceSystem {
        &self.sys
    }

    /// Input dimension `m` of the side's system.
    pub fn m(&self) -> usize {
        self.sys.m()
    }

    /// Number of basis columns.
    pub fn cols(&self) -> usize {
        self.basis.ncols()
    }

    /// Total shift values consumed (a pair counts twice).
    pub fn width(&self) -> usize {
        self.shifts.len()
    }

    /// `V`.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// `E V`.
    pub fn ebasis(&self) -> &Mat {
        &self.ebasis
    }

    /// `C V`.
    pub fn cbasis(&self) -> &Mat {
        &self.cbasis
    }

    /// `S̃` (block upper-triangular, blocks of size 1 or 2).
    pub fn s_core(&self) -> &Mat {
        &self.s_core
    }

    /// `L̃` (1 × k̃).
    pub fn l_core(&self) -> &Mat {
        &self.l_core
    }

    /// Diagonal block sizes of `S̃`.
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// `S = S̃ ⊗ I_m`.
    pub fn s_full(&self) -> Mat {
        kron(&self.s_core, &Mat::identity(self.m(), self.m()))
    }

    /// `L = L̃ ⊗ I_m`.
    pub fn l_full(&self) -> Mat {
        kron(&self.l_core, &Mat::identity(self.m(), self.m()))
    }

    /// Lyapunov residual factor `B⊥`.
    pub fn bperp(&self) -> &Mat {
        &self.bperp
    }

    /// Shift values consumed so far, conjugates included.
    pub fn shifts(&self) -> &[Complex64] {
        &self.shifts
    }

    /// Real block appended by the most recent solve.
    pub fn last_block(&self) -> &Mat {
        &self.last
    }
}
