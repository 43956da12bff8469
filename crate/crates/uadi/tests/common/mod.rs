//! Dense reference solvers and literal residual formulas for small systems.
#![allow(dead_code)]

use nalgebra::DMatrix;
use uadi::engine::{Equation, UadiState};
use uadi::system::{EquationParams, StateSpaceSystem};

pub type Mat = DMatrix<f64>;

pub struct Dense {
    pub e: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

pub fn dense(sys: &StateSpaceSystem) -> Dense {
    Dense {
        e: sys.e.to_dense(),
        a: sys.a.to_dense(),
        b: sys.b.clone(),
        c: sys.c.clone(),
        d: sys.d.clone(),
    }
}

fn inv(m: &Mat) -> Mat {
    m.clone().try_inverse().expect("singular matrix in oracle")
}

fn norm2(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Solves `F X + X G + Q = 0` (`F`, `G` Hurwitz) by the squared Smith
/// iteration on the Cayley transform with parameter `p > 0`.
pub fn smith_sylvester(f: &Mat, g: &Mat, q: &Mat) -> Mat {
    let (n1, n2) = (f.nrows(), g.nrows());
    let scale = |m: &Mat| {
        let hi = norm2(m);
        let lo = 1.0 / norm2(&inv(m));
        (hi * lo).sqrt()
    };
    let p = (scale(f) * scale(g)).sqrt();
    let m1 = inv(&(f - Mat::identity(n1, n1) * p));
    let m2 = inv(&(g - Mat::identity(n2, n2) * p));
    let mut ak = &m1 * (f + Mat::identity(n1, n1) * p);
    let mut bk = (g + Mat::identity(n2, n2) * p) * &m2;
    let mut x = &m1 * q * &m2 * (2.0 * p);
    for _ in 0..80 {
        let inc = &ak * &x * &bk;
        assert!(inc.iter().all(|v| v.is_finite()), "Smith iteration diverged");
        let done = inc.norm() <= 1e-17 * x.norm();
        x += inc;
        if done {
            break;
        }
        ak = &ak * &ak;
        bk = &bk * &bk;
    }
    x
}

/// `A P Eᵀ + E P Aᵀ + Q = 0`.
pub fn gen_lyapunov(a: &Mat, e: &Mat, q: &Mat) -> Mat {
    let ei = inv(e);
    let at = &ei * a;
    smith_sylvester(&at, &at.transpose(), &(&ei * q * ei.transpose()))
}

/// `A₁ X E₂ + E₁ X A₂ + Q = 0`.
pub fn gen_sylvester(a1: &Mat, e1: &Mat, a2: &Mat, e2: &Mat, q: &Mat) -> Mat {
    let e1i = inv(e1);
    let e2i = inv(e2);
    smith_sylvester(&(&e1i * a1), &(a2 * &e2i), &(&e1i * q * &e2i))
}

/// Stabilizing solution of `A P Eᵀ + E P Aᵀ + B Bᵀ − c·E P Cᵀ C P Eᵀ = 0`
/// (`c > 0`, `A` Hurwitz) by Newton–Kleinman from `P = 0`.
pub fn newton_riccati(a: &Mat, e: &Mat, b: &Mat, c: &Mat, coef: f64) -> Mat {
    let n = a.nrows();
    let mut p = Mat::zeros(n, n);
    for _ in 0..60 {
        let k = e * &p * c.transpose(); // n × p
        let acl = a - &k * c * coef;
        let q = b * b.transpose() + &k * k.transpose() * coef;
        let next = gen_lyapunov(&acl, e, &q);
        let diff = (&next - &p).norm();
        p = 0.5 * (&next + next.transpose());
        if diff <= 1e-14 * p.norm() {
            break;
        }
    }
    p
}

/// Dense solution iterates extracted from an engine state.
pub struct Iterates {
    pub p: Option<Mat>,
    pub q: Option<Mat>,
    pub x: Option<Mat>,
}

/// Literal residual of `eq` at the dense iterate `x`; `p1 = V Vᵀ` and
/// `q2 = W Wᵀ` are the current low-rank Gramians (used by the spectral-factor
/// equations).
pub fn literal_residual(
    eq: Equation,
    g1: &StateSpaceSystem,
    g2: &StateSpaceSystem,
    params: &EquationParams,
    x: &Mat,
    p1: &Mat,
    q2: &Mat,
) -> Mat {
    let s1 = dense(g1);
    let s2 = dense(g2);
    let (a1, e1, b1, c1, d1) = (&s1.a, &s1.e, &s1.b, &s1.c, &s1.d);
    let (a2, e2, b2, c2, d2) = (&s2.a, &s2.e, &s2.b, &s2.c, &s2.d);
    let lp = |a: &Mat| a * x * e1.transpose() + e1 * x * a.transpose();
    let lq = |a: &Mat| a.transpose() * x * e2 + e2.transpose() * x * a;
    let eye = |k: usize| Mat::identity(k, k);
    use Equation::*;
    match eq {
        P1 => lp(a1) + b1 * b1.transpose(),
        Q2 => lq(a2) + c2.transpose() * c2,
        Ps => lp(a1) + b1 * &params.s1 * b1.transpose(),
        Qs => lq(a2) + c2.transpose() * &params.s2 * c2,
        Pmp => {
            let di = inv(d1);
            lp(&(a1 - b1 * &di * c1)) + b1 * inv(&(d1.transpose() * d1)) * b1.transpose()
        }
        Qmp => {
            let di = inv(d2);
            lq(&(a2 - b2 * &di * c2)) + c2.transpose() * inv(&(d2 * d2.transpose())) * c2
        }
        Sylv => a1 * x * e2 + e1 * x * a2 + b1 * c2,
        Pricc => lp(a1) + b1 * b1.transpose() - e1 * x * c1.transpose() * c1 * x * e1.transpose(),
        Qricc => lq(a2) + c2.transpose() * c2 - e2.transpose() * x * b2 * b2.transpose() * x * e2,
        Pinf => {
            let f = 1.0 - params.gamma1.powi(-2);
            lp(a1) + b1 * b1.transpose() - e1 * x * c1.transpose() * c1 * x * e1.transpose() * f
        }
        Qinf => {
            let f = 1.0 - params.gamma2.powi(-2);
            lq(a2) + c2.transpose() * c2 - e2.transpose() * x * b2 * b2.transpose() * x * e2 * f
        }
        Ppr => {
            let t = b1 - e1 * x * c1.transpose();
            lp(a1) + &t * inv(&(d1 + d1.transpose())) * t.transpose()
        }
        Qpr => {
            let t = c2 - b2.transpose() * x * e2;
            lq(a2) + t.transpose() * inv(&(d2 + d2.transpose())) * &t
        }
        Pbr => {
            let t = e1 * x * c1.transpose() + b1 * d1.transpose();
            let r = eye(d1.nrows()) - d1 * d1.transpose();
            lp(a1) + b1 * b1.transpose() + &t * inv(&r) * t.transpose()
        }
        Qbr => {
            let t = b2.transpose() * x * e2 + d2.transpose() * c2;
            let r = eye(d2.ncols()) - d2.transpose() * d2;
            lq(a2) + c2.transpose() * c2 + t.transpose() * inv(&r) * &t
        }
        Psf => {
            let t = b1 - e1 * x * (q2 * b1 + c1.transpose() * d1);
            lp(a1) + &t * inv(&(d1.transpose() * d1)) * t.transpose()
        }
        Qsf => {
            let t = c2 - (c2 * p1 + d2 * b2.transpose()) * x * e2;
            lq(a2) + t.transpose() * inv(&(d2 * d2.transpose())) * &t
        }
    }
}

/// Constant term of `eq` (the residual at `X = 0`).
pub fn constant_term(eq: Equation, g1: &StateSpaceSystem, g2: &StateSpaceSystem, params: &EquationParams) -> Mat {
    let (r, c) = match eq.one_sided() {
        Some((0, _)) => (g1.n(), g1.n()),
        Some(_) => (g2.n(), g2.n()),
        None => (g1.n(), g2.n()),
    };
    let z = Mat::zeros(r, c);
    literal_residual(eq, g1, g2, params, &z, &Mat::zeros(g1.n(), g1.n()), &Mat::zeros(g2.n(), g2.n()))
}

/// Dense literal residual of the engine's current iterate, normalized by
/// the constant term.
pub fn engine_literal_residual(state: &UadiState, eq: Equation) -> f64 {
    let x = state.extract_solution(eq).unwrap().dense();
    let v = state.side(0).basis();
    let w = state.side(1).basis();
    let p1 = v * v.transpose();
    let q2 = w * w.transpose();
    let r = literal_residual(eq, state.g1(), state.g2(), state.params(), &x, &p1, &q2);
    norm2(&r) / norm2(&constant_term(eq, state.g1(), state.g2(), state.params()))
}

pub fn spectral(m: &Mat) -> f64 {
    norm2(m)
}
