//! State-space systems `E ẋ = A x + B u`, `y = C x + D u`.

mod generators;
mod io;

pub use generators::{illustrative_pair, penzl_triple_peak, random_stable_system, rlc_ladder};
pub use io::{load_system, save_system};

use num_complex::Complex64;

use crate::error::{Result, UadiError};
use crate::linalg::{shifted_solve, to_complex, CMat, Mat, ShiftedFactorization, SparseSquareMatrix};

/// Descriptor realization with a sparse pencil and dense port maps.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceSystem {
    pub e: SparseSquareMatrix,
    pub a: SparseSquareMatrix,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub label: String,
}

impl StateSpaceSystem {
    /// Builds and validates a system; `E` is test-factored for invertibility.
    pub fn new(
        e: SparseSquareMatrix,
        a: SparseSquareMatrix,
        b: Mat,
        c: Mat,
        d: Option<Mat>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = a.n();
        if e.n() != n {
            return Err(UadiError::DimensionMismatch(format!(
                "E is {}x{} but A is {n}x{n}",
                e.n(),
                e.n()
            )));
        }
        if b.nrows() != n {
            return Err(UadiError::DimensionMismatch(format!(
                "B has {} rows, expected {n}",
                b.nrows()
            )));
        }
        if c.ncols() != n {
            return Err(UadiError::DimensionMismatch(format!(
                "C has {} columns, expected {n}",
                c.ncols()
            )));
        }
        let d = d.unwrap_or_else(|| Mat::zeros(c.nrows(), b.ncols()));
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(UadiError::DimensionMismatch(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        if b.iter().chain(c.iter()).chain(d.iter()).any(|v| !v.is_finite()) {
            return Err(UadiError::ParseError("non-finite entry in B, C or D".into()));
        }
        if n > 0 {
            let zero = SparseSquareMatrix::from_triplets(n, &[])?;
            ShiftedFactorization::new(&e, &zero, Complex64::new(0.0, 0.0))
                .map_err(|_| UadiError::SingularE)?;
        }
        Ok(Self {
            e,
            a,
            b,
            c,
            d,
            label: label.into(),
        })
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// Dual realization `(Eᵀ, Aᵀ, Cᵀ, Bᵀ, Dᵀ)`.
    ///
    /// Observability-type equations of a system are controllability-type
    /// equations of its dual.
    pub fn dual(&self) -> Self {
        Self {
            e: self.e.transpose(),
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
            label: format!("{}^T", self.label),
        }
    }

    /// `C (sE − A)⁻¹ B + D`.
    pub fn transfer_eval(&self, s: Complex64) -> Result<CMat> {
        // (A + (−s)E) X = B  ⇒  (sE − A)⁻¹ B = −X
        let x = shifted_solve(&self.a, &self.e, -s, &to_complex(&self.b))?;
        Ok(to_complex(&self.d) - to_complex(&self.c) * x)
    }

    /// `true` when both systems carry identical matrices.
    pub fn same_realization(&self, other: &Self) -> bool {
        self.e == other.e && self.a == other.a && self.b == other.b && self.c == other.c && self.d == other.d
    }
}

/// Weights and levels entering the indefinite and H∞ equations.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationParams {
    /// Symmetric input weight (m₁ × m₁).
    pub s1: Mat,
    /// Symmetric output weight (p₂ × p₂).
    pub s2: Mat,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl EquationParams {
    /// Validates symmetry and positivity.
    pub fn new(s1: Mat, s2: Mat, gamma1: f64, gamma2: f64) -> Result<Self> {
        for (name, s) in [("S1", &s1), ("S2", &s2)] {
            if s.nrows() != s.ncols() {
                return Err(UadiError::DimensionMismatch(format!("{name} is not square")));
            }
            if (s - s.transpose()).norm() > 1e-12 * s.norm().max(1.0) {
                return Err(UadiError::InvalidSize(format!("{name} is not symmetric")));
            }
        }
        if !(gamma1 > 0.0 && gamma2 > 0.0) {
            return Err(UadiError::InvalidSize("gamma levels must be positive".into()));
        }
        if gamma1 <= 1.0 || gamma2 <= 1.0 {
            log::warn!("gamma <= 1: the H-infinity quadratic term changes sign");
        }
        Ok(Self {
            s1,
            s2,
            gamma1,
            gamma2,
        })
    }

    /// Identity weights and levels of 2 sized for the given pair.
    pub fn default_for(g1: &StateSpaceSystem, g2: &StateSpaceSystem) -> Self {
        Self {
            s1: Mat::identity(g1.m(), g1.m()),
            s2: Mat::identity(g2.p(), g2.p()),
            gamma1: 2.0,
            gamma2: 2.0,
        }
    }
}
