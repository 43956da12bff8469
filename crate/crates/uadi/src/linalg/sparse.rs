//! Compressed-column sparse matrices and shifted LU factorizations.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use super::{CMat, Mat};
use crate::error::{Result, UadiError};

/// Square real sparse matrix in compressed-column storage.
///
/// Row indices are sorted within each column and duplicates are summed at
/// assembly, so every `(row, col)` pair appears at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSquareMatrix {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSquareMatrix {
    /// Assembles an `n × n` matrix from `(row, col, value)` triples.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(UadiError::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(UadiError::ParseError(format!(
                    "non-finite entry at ({r}, {c})"
                )));
            }
            entries.push((r, c, v));
        }
        entries.sort_by_key(|a| (a.1, a.0));

        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self {
            n,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Diagonal matrix.
    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// Sparse copy of a dense square matrix (exact zeros dropped).
    pub fn from_dense(m: &Mat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(UadiError::DimensionMismatch(format!(
                "expected square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), &t)
    }

    /// Order of the matrix.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.n {
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                out.push((self.row_idx[k], j, self.values[k]));
            }
        }
        out
    }

    /// Dense copy.
    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n, &t).expect("transpose of a valid matrix is valid")
    }

    /// `true` when the matrix is exactly the identity.
    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|j| {
            self.col_ptr[j + 1] - self.col_ptr[j] == 1
                && self.row_idx[self.col_ptr[j]] == j
                && self.values[self.col_ptr[j]] == 1.0
        })
    }

    /// Block-diagonal assembly `diag(self, other)`.
    pub fn block_diag(&self, other: &Self) -> Self {
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i + self.n, j + self.n, v)));
        Self::from_triplets(self.n + other.n, &t).expect("block assembly is valid")
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| {
                self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Product `self · x` for a real dense block.
    pub fn mul(&self, x: &Mat) -> Mat {
        assert_eq!(x.nrows(), self.n, "sparse product dimension mismatch");
        let mut y = Mat::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.n {
                let xj = x[(j, c)];
                if xj == 0.0 {
                    continue;
                }
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    y[(self.row_idx[k], c)] += self.values[k] * xj;
                }
            }
        }
        y
    }

    /// Product `self · x` for a complex dense block.
    pub fn mul_c(&self, x: &CMat) -> CMat {
        assert_eq!(x.nrows(), self.n, "sparse product dimension mismatch");
        let mut y = CMat::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.n {
                let xj = x[(j, c)];
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    y[(self.row_idx[k], c)] += xj * self.values[k];
                }
            }
        }
        y
    }

    /// Product `selfᵀ · x` without forming the transpose.
    pub fn tr_mul(&self, x: &Mat) -> Mat {
        assert_eq!(x.nrows(), self.n, "sparse product dimension mismatch");
        let mut y = Mat::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for j in 0..self.n {
                let mut acc = 0.0;
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    acc += self.values[k] * x[(self.row_idx[k], c)];
                }
                y[(j, c)] = acc;
            }
        }
        y
    }

    /// Merged entries of `self + shift · e` (structural union; exact
    /// cancellations are kept so singularity is detected numerically).
    fn shifted_entries<T>(&self, e: &Self, shift: T) -> Vec<Triplet<usize, usize, T>>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + From<f64>,
    {
        let mut out = Vec::with_capacity(self.nnz() + e.nnz());
        for j in 0..self.n {
            let (mut p, pe) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let (mut q, qe) = (e.col_ptr[j], e.col_ptr[j + 1]);
            while p < pe || q < qe {
                let rp = if p < pe { self.row_idx[p] } else { usize::MAX };
                let rq = if q < qe { e.row_idx[q] } else { usize::MAX };
                if rp == rq {
                    out.push(Triplet::new(rp, j, T::from(self.values[p]) + shift * e.values[q]));
                    p += 1;
                    q += 1;
                } else if rp < rq {
                    out.push(Triplet::new(rp, j, T::from(self.values[p])));
                    p += 1;
                } else {
                    out.push(Triplet::new(rq, j, shift * e.values[q]));
                    q += 1;
                }
            }
        }
        out
    }
}

enum LuKind {
    Real(Lu<usize, f64>),
    Complex(Lu<usize, Complex64>),
}

/// Sparse LU factorization of `A + shift·E`, reusable across right-hand sides.
///
/// A real shift is factored in real arithmetic; a shift with nonzero
/// imaginary part is factored in complex arithmetic.
pub struct ShiftedFactorization {
    shift: Complex64,
    n: usize,
    lu: LuKind,
}

/// Condition-like growth factor above which the shifted matrix is treated
/// as numerically singular.
const SINGULAR_GROWTH: f64 = 1e15;

impl ShiftedFactorization {
    /// Factors `A + shift·E`, probing the factor once so exact singularity is
    /// reported here rather than at the first solve.
    pub fn new(a: &SparseSquareMatrix, e: &SparseSquareMatrix, shift: Complex64) -> Result<Self> {
        if a.n() != e.n() {
            return Err(UadiError::DimensionMismatch(format!(
                "A is {0}x{0} but E is {1}x{1}",
                a.n(),
                e.n()
            )));
        }
        if !(shift.re.is_finite() && shift.im.is_finite()) {
            return Err(UadiError::NonFiniteShift(shift));
        }
        let n = a.n();
        let singular = || UadiError::SingularShiftedMatrix { shift };
        let lu = if shift.im == 0.0 {
            let t = a.shifted_entries(e, shift.re);
            let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
                .map_err(|_| singular())?;
            LuKind::Real(m.sp_lu().map_err(|_| singular())?)
        } else {
            let t = a.shifted_entries(e, shift);
            let m = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &t)
                .map_err(|_| singular())?;
            LuKind::Complex(m.sp_lu().map_err(|_| singular())?)
        };
        let f = Self { shift, n, lu };
        if n > 0 {
            let scale = a.norm1() + shift.norm() * e.norm1();
            let probe = CMat::from_element(n, 1, Complex64::new(1.0, 0.0));
            let x = f.solve_c_unchecked(&probe);
            let xmax = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !xmax.is_finite() || xmax * scale > SINGULAR_GROWTH {
                return Err(singular());
            }
        }
        Ok(f)
    }

    /// The shift this factorization was built for.
    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    /// `true` when the factorization is held in real arithmetic.
    pub fn is_real(&self) -> bool {
        matches!(self.lu, LuKind::Real(_))
    }

    fn solve_c_unchecked(&self, rhs: &CMat) -> CMat {
        match &self.lu {
            LuKind::Real(lu) => {
                let re = faer::Mat::<f64>::from_fn(self.n, rhs.ncols(), |i, j| rhs[(i, j)].re);
                let im = faer::Mat::<f64>::from_fn(self.n, rhs.ncols(), |i, j| rhs[(i, j)].im);
                let xr = lu.solve(&re);
                let xi = lu.solve(&im);
                CMat::from_fn(self.n, rhs.ncols(), |i, j| Complex64::new(xr[(i, j)], xi[(i, j)]))
            }
            LuKind::Complex(lu) => {
                let b = faer::Mat::<Complex64>::from_fn(self.n, rhs.ncols(), |i, j| rhs[(i, j)]);
                let x = lu.solve(&b);
                CMat::from_fn(self.n, rhs.ncols(), |i, j| x[(i, j)])
            }
        }
    }

    /// Solves `(A + shift·E) X = rhs` for a complex block.
    pub fn solve_c(&self, rhs: &CMat) -> Result<CMat> {
        if rhs.nrows() != self.n {
            return Err(UadiError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                rhs.nrows(),
                self.n
            )));
        }
        let x = self.solve_c_unchecked(rhs);
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(x)
        } else {
            Err(UadiError::SingularShiftedMatrix { shift: self.shift })
        }
    }

    /// Solves `(A + shift·E) X = rhs` for a real block; the result is complex
    /// when the shift is.
    pub fn solve(&self, rhs: &Mat) -> Result<CMat> {
        self.solve_c(&super::to_complex(rhs))
    }

    /// Real solve; only valid for a real shift.
    pub fn solve_real(&self, rhs: &Mat) -> Result<Mat> {
        if rhs.nrows() != self.n {
            return Err(UadiError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                rhs.nrows(),
                self.n
            )));
        }
        match &self.lu {
            LuKind::Real(lu) => {
                let b = faer::Mat::<f64>::from_fn(self.n, rhs.ncols(), |i, j| rhs[(i, j)]);
                let x = lu.solve(&b);
                let out = Mat::from_fn(self.n, rhs.ncols(), |i, j| x[(i, j)]);
                if out.iter().all(|v| v.is_finite()) {
                    Ok(out)
                } else {
                    Err(UadiError::SingularShiftedMatrix { shift: self.shift })
                }
            }
            LuKind::Complex(_) => Ok(super::real_part(&self.solve(rhs)?)),
        }
    }
}

/// One-shot solve of `(A + shift·E) X = rhs`.
pub fn shifted_solve(
    a: &SparseSquareMatrix,
    e: &SparseSquareMatrix,
    shift: Complex64,
    rhs: &CMat,
) -> Result<CMat> {
    if rhs.nrows() != a.n() {
        return Err(UadiError::DimensionMismatch(format!(
            "right-hand side has {} rows, expected {}",
            rhs.nrows(),
            a.n()
        )));
    }
    ShiftedFactorization::new(a, e, shift)?.solve_c(rhs)
}
