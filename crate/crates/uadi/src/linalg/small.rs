//! Small dense Sylvester and Lyapunov solvers.
//!
//! The generic path is a complex-Schur Bartels–Stewart solver. The
//! structured path exploits the Kronecker form `F̃ ⊗ I` with block-triangular
//! `F̃` (1×1 and 2×2 diagonal blocks) that the ADI bookkeeping produces and
//! reduces to block substitution with at most 4×4 dense solves.

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{lu_solve, spectral_norm, to_complex, CMat, Mat};
use crate::error::{Result, UadiError};

fn complex_spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    Schur::try_new(m.clone(), f64::EPSILON, 200 * n.max(1))
        .map(|s| s.unpack())
        .ok_or(UadiError::EigFailure)
}

/// Solves `F X − X G + H = 0` by Bartels–Stewart on complex Schur forms.
pub fn solve_small_sylvester(f: &CMat, g: &CMat, h: &CMat) -> Result<CMat> {
    let (p, q) = (f.nrows(), g.nrows());
    if f.ncols() != p || g.ncols() != q || h.nrows() != p || h.ncols() != q {
        return Err(UadiError::DimensionMismatch(format!(
            "F {}x{}, G {}x{}, H {}x{}",
            f.nrows(),
            f.ncols(),
            g.nrows(),
            g.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    if p == 0 || q == 0 {
        return Ok(CMat::zeros(p, q));
    }
    let tol = 1e-12 * (complex_spectral_norm(f) + complex_spectral_norm(g));
    let (u, tf) = schur(f)?;
    let (w, tg) = schur(g)?;
    let c = u.adjoint() * h * &w;

    // Tf y_k − Σ_{l≤k} y_l Tg[l,k] + c_k = 0, column by column.
    let mut y = CMat::zeros(p, q);
    for k in 0..q {
        let mut rhs: Vec<Complex64> = (0..p).map(|i| -c[(i, k)]).collect();
        for l in 0..k {
            let t = tg[(l, k)];
            if t != Complex64::new(0.0, 0.0) {
                for (i, r) in rhs.iter_mut().enumerate() {
                    *r += y[(i, l)] * t;
                }
            }
        }
        let gk = tg[(k, k)];
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for j in i + 1..p {
                acc -= tf[(i, j)] * y[(j, k)];
            }
            let d = tf[(i, i)] - gk;
            if d.norm() <= tol {
                return Err(UadiError::SpectraOverlap {
                    left: tf[(i, i)],
                    right: gk,
                });
            }
            y[(i, k)] = acc / d;
        }
    }
    Ok(&u * y * w.adjoint())
}

/// Real-data wrapper of [`solve_small_sylvester`]; the imaginary part of the
/// complex solution is roundoff and discarded.
pub fn solve_small_sylvester_real(f: &Mat, g: &Mat, h: &Mat) -> Result<Mat> {
    let x = solve_small_sylvester(&to_complex(f), &to_complex(g), &to_complex(h))?;
    Ok(x.map(|z| z.re))
}

/// Solves `F* X + X F + Q = 0` for Hermitian `Q`; the result is symmetrized.
pub fn solve_small_lyapunov(f: &CMat, q: &CMat) -> Result<CMat> {
    if f.nrows() != f.ncols() || q.shape() != f.shape() {
        return Err(UadiError::DimensionMismatch(format!(
            "F {}x{}, Q {}x{}",
            f.nrows(),
            f.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    let qn = q.norm();
    let asym = (q - q.adjoint()).norm();
    if asym > 1e-10 * qn {
        return Err(UadiError::NonHermitianRHS(asym / qn));
    }
    let minus_f = -f;
    let x = solve_small_sylvester(&f.adjoint(), &minus_f, q)?;
    Ok((&x + x.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Real-data wrapper of [`solve_small_lyapunov`]: `Fᵀ X + X F + Q = 0`.
pub fn solve_small_lyapunov_real(f: &Mat, q: &Mat) -> Result<Mat> {
    let x = solve_small_lyapunov(&to_complex(f), &to_complex(q))?;
    Ok(x.map(|z| z.re))
}

/// A matrix of the form `core ⊗ I_m`, where `core` is block-triangular with
/// diagonal blocks of the listed sizes (each 1 or 2).
#[derive(Debug, Clone)]
pub struct KronOperator<'a> {
    pub core: &'a Mat,
    pub blocks: &'a [usize],
    pub m: usize,
}

impl KronOperator<'_> {
    fn offsets(&self) -> Vec<usize> {
        let mut o = Vec::with_capacity(self.blocks.len() + 1);
        o.push(0);
        for b in self.blocks {
            o.push(o.last().unwrap() + b);
        }
        o
    }
}

fn eig2(m: &Mat) -> Complex64 {
    if m.nrows() == 1 {
        return Complex64::new(m[(0, 0)], 0.0);
    }
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    Complex64::new(tr / 2.0, 0.0) + disc
}

/// Solves `F X − X G + H = 0` with `F = F̃ ⊗ I_{m_F}` (F̃ block-lower
/// triangular) and `G = G̃ ⊗ I_{m_G}` (G̃ block-upper triangular).
///
/// The Kronecker structure decouples the problem into `m_F·m_G` independent
/// small problems in the core dimension, each solved by block substitution.
pub fn solve_kron_sylvester(f: &KronOperator, g: &KronOperator, h: &Mat) -> Result<Mat> {
    let (kf, kg) = (f.core.nrows(), g.core.nrows());
    let (mf, mg) = (f.m, g.m);
    if h.nrows() != kf * mf || h.ncols() != kg * mg {
        return Err(UadiError::DimensionMismatch(format!(
            "H is {}x{}, expected {}x{}",
            h.nrows(),
            h.ncols(),
            kf * mf,
            kg * mg
        )));
    }
    if f.blocks.iter().sum::<usize>() != kf || g.blocks.iter().sum::<usize>() != kg {
        return Err(UadiError::DimensionMismatch("block sizes do not cover the core".into()));
    }
    let mut x = Mat::zeros(h.nrows(), h.ncols());
    if x.is_empty() {
        return Ok(x);
    }
    let tol = 1e-12 * (spectral_norm(f.core) + spectral_norm(g.core));
    let fo = f.offsets();
    let go = g.offsets();

    // Precompute the Kronecker diagonal solves' operators.
    let mut diag_ops: Vec<Vec<Mat>> = Vec::with_capacity(f.blocks.len());
    for (bi, &sf) in f.blocks.iter().enumerate() {
        let fii = f.core.view((fo[bi], fo[bi]), (sf, sf)).into_owned();
        let mut row = Vec::with_capacity(g.blocks.len());
        for (bj, &sg) in g.blocks.iter().enumerate() {
            let gjj = g.core.view((go[bj], go[bj]), (sg, sg)).into_owned();
            // vec(F X − X G) = (I ⊗ F − Gᵀ ⊗ I) vec X
            let k = super::kron(&Mat::identity(sg, sg), &fii)
                - super::kron(&gjj.transpose(), &Mat::identity(sf, sf));
            let smin = k.clone().svd(false, false).singular_values.min();
            if smin <= tol {
                return Err(UadiError::SpectraOverlap {
                    left: eig2(&fii),
                    right: eig2(&gjj),
                });
            }
            row.push(k);
        }
        diag_ops.push(row);
    }

    let mut core_h = Mat::zeros(kf, kg);
    let mut core_x = Mat::zeros(kf, kg);
    for r in 0..mf {
        for s in 0..mg {
            for a in 0..kf {
                for b in 0..kg {
                    core_h[(a, b)] = h[(a * mf + r, b * mg + s)];
                }
            }
            core_x.fill(0.0);
            for (bi, &sf) in f.blocks.iter().enumerate() {
                for (bj, &sg) in g.blocks.iter().enumerate() {
                    let (i0, j0) = (fo[bi], go[bj]);
                    let mut rhs = -core_h.view((i0, j0), (sf, sg)).into_owned();
                    if i0 > 0 {
                        rhs -= f.core.view((i0, 0), (sf, i0)) * core_x.view((0, j0), (i0, sg));
                    }
                    if j0 > 0 {
                        rhs += core_x.view((i0, 0), (sf, j0)) * g.core.view((0, j0), (j0, sg));
                    }
                    let rv = Mat::from_column_slice(sf * sg, 1, rhs.as_slice());
                    let sol = lu_solve(&diag_ops[bi][bj], &rv).ok_or(UadiError::SpectraOverlap {
                        left: eig2(&f.core.view((i0, i0), (sf, sf)).into_owned()),
                        right: eig2(&g.core.view((j0, j0), (sg, sg)).into_owned()),
                    })?;
                    for jj in 0..sg {
                        for ii in 0..sf {
                            core_x[(i0 + ii, j0 + jj)] = sol[(jj * sf + ii, 0)];
                        }
                    }
                }
            }
            for a in 0..kf {
                for b in 0..kg {
                    x[(a * mf + r, b * mg + s)] = core_x[(a, b)];
                }
            }
        }
    }
    Ok(x)
}
