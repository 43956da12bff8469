//! Built-in benchmark systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::StateSpaceSystem;
use crate::error::{Result, UadiError};
use crate::linalg::{solve_small_lyapunov_real, Mat, SparseSquareMatrix};

fn dense_triplets(m: &Mat, offset: usize, out: &mut Vec<(usize, usize, f64)>) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                out.push((i + offset, j + offset, m[(i, j)]));
            }
        }
    }
}

/// Penzl's triple-peak model: a balanced-looking 6×6 head with poles
/// `−1 ± j·wᵢ` followed by a tail with poles `−1, …, −(n−6)`.
///
/// The head is `(Q·P, Q·aa·P, Q·bb, cc·P)` where `P`, `Q` are the Gramians of
/// `(aa, bb, cc)`; this is a similarity transform, so the head pencil keeps
/// the spectrum of `aa`.
pub fn penzl_triple_peak(n: usize, w1: f64, w2: f64, w3: f64) -> Result<StateSpaceSystem> {
    if n < 8 {
        return Err(UadiError::InvalidSize(format!("triple-peak model needs n >= 8, got {n}")));
    }
    let mut aa = Mat::zeros(6, 6);
    for (k, w) in [w1, w2, w3].into_iter().enumerate() {
        let o = 2 * k;
        aa[(o, o)] = -1.0;
        aa[(o + 1, o + 1)] = -1.0;
        aa[(o, o + 1)] = w;
        aa[(o + 1, o)] = -w;
    }
    let bb = Mat::from_element(6, 1, 10.0);
    let cc = Mat::from_element(1, 6, 10.0);
    // aa·P + P·aaᵀ + bb·bbᵀ = 0 and aaᵀ·Q + Q·aa + ccᵀ·cc = 0
    let pp = solve_small_lyapunov_real(&aa.transpose(), &(&bb * bb.transpose()))?;
    let qq = solve_small_lyapunov_real(&aa, &(cc.transpose() * &cc))?;
    let e = &qq * &pp;
    let a = &qq * &aa * &pp;
    let b = &qq * &bb;
    let c = &cc * &pp;

    let tail = n - 6;
    let mut te = Vec::new();
    let mut ta = Vec::new();
    dense_triplets(&e, 0, &mut te);
    dense_triplets(&a, 0, &mut ta);
    for k in 0..tail {
        te.push((6 + k, 6 + k, 1.0));
        ta.push((6 + k, 6 + k, -((k + 1) as f64)));
    }
    let mut bfull = Mat::from_element(n, 1, 1.0);
    bfull.rows_mut(0, 6).copy_from(&b);
    let mut cfull = Mat::from_element(1, n, 1.0);
    cfull.columns_mut(0, 6).copy_from(&c);
    StateSpaceSystem::new(
        SparseSquareMatrix::from_triplets(n, &te)?,
        SparseSquareMatrix::from_triplets(n, &ta)?,
        bfull,
        cfull,
        None,
        format!("penzl:{n},{w1},{w2},{w3}"),
    )
}

const ILL_E: [f64; 36] = [
    0.2498, 0.0, 0.0002, 0.0, 0.0001, 0.0, //
    0.0, 0.2498, 0.0, 0.0002, 0.0, 0.0001, //
    0.0002, 0.0, 0.2499, 0.0001, 0.0, 0.0, //
    0.0, 0.0002, 0.0001, 0.2499, 0.0, 0.0, //
    0.0001, 0.0, 0.0, 0.0, 0.2500, 0.0, //
    0.0, 0.0001, 0.0, 0.0, 0.0, 0.2500,
];

const ILL_A: [f64; 36] = [
    -0.2508, 24.4816, -0.5095, -0.4723, -0.5112, -0.4814, //
    -25.4822, -0.2508, -0.5283, -0.4908, -0.5188, -0.4888, //
    -0.4908, -0.4723, -0.2497, 49.4833, -0.5046, -0.4861, //
    -0.5283, -0.5095, -50.4837, -0.2497, -0.5141, -0.4952, //
    -0.4888, -0.4814, -0.4952, -0.4861, -0.2499, 99.4954, //
    -0.5188, -0.5112, -0.5141, -0.5046, -100.4955, -0.2499,
];

/// The 6th-order pair with shared poles near `−1 ± j{100, 200, 400}`; `G₁`
/// peaks near 100 rad/s and `G₂` near 400 rad/s.
pub fn illustrative_pair() -> (StateSpaceSystem, StateSpaceSystem) {
    let e = SparseSquareMatrix::from_dense(&Mat::from_row_slice(6, 6, &ILL_E)).unwrap();
    let a = SparseSquareMatrix::from_dense(&Mat::from_row_slice(6, 6, &ILL_A)).unwrap();
    let b1 = Mat::from_column_slice(6, 1, &[0.5025, 0.4965, -0.0051, 0.0035, 0.0133, -0.0116]);
    let c1 = Mat::from_row_slice(1, 6, &[0.4965, 0.5025, 0.0035, -0.0051, -0.0116, 0.0133]);
    let b2 = Mat::from_column_slice(6, 1, &[-0.0029, 0.0042, 0.0118, -0.0129, 0.4866, 0.5131]);
    let c2 = Mat::from_row_slice(1, 6, &[0.0042, -0.0029, -0.0129, 0.0118, 0.5131, 0.4866]);
    let g1 = StateSpaceSystem::new(e.clone(), a.clone(), b1, c1, None, "illustrative-G1").unwrap();
    let g2 = StateSpaceSystem::new(e, a, b2, c2, None, "illustrative-G2").unwrap();
    (g1, g2)
}

struct Ladder {
    r_series: f64,
    r_shunt: f64,
    l: f64,
    c: f64,
}

/// Two coupled passive RLC ladders (a two-port network) of order
/// `4·segments`, in port-Hamiltonian form `E ≻ 0`, `A + Aᵀ ≼ 0`, `C = Bᵀ`.
///
/// Each ladder segment has a series resistor–inductor branch and a shunt
/// capacitor with a shunt resistor; port `k` drives ladder `k` through its
/// first series branch and measures that branch current. The far ends are
/// coupled through a resistor. The port maps are scaled by `κ² = ½·min R`,
/// which bounds the strictly proper part by ½ in H∞ norm, and the
/// feedthrough is `d·I`. With `0 < d < ½` the model is passive, minimum
/// phase and bounded real.
pub fn rlc_ladder(segments: usize, d: f64) -> StateSpaceSystem {
    assert!(segments >= 1, "ladder needs at least one segment");
    let ladders = [
        Ladder { r_series: 0.1, r_shunt: 1.0, l: 0.1, c: 0.1 },
        Ladder { r_series: 0.5, r_shunt: 3.0, l: 0.2, c: 0.2 },
    ];
    let r_couple = 0.2;
    let ns = segments;
    let n = 4 * ns;
    let mut te = Vec::with_capacity(n);
    let mut ta = Vec::with_capacity(8 * ns);
    let mut b = Mat::zeros(n, 2);
    let mut far_nodes = [0usize; 2];
    for (k, lad) in ladders.iter().enumerate() {
        let base = 2 * ns * k;
        let cur = |j: usize| base + j;
        let vol = |j: usize| base + ns + j;
        for j in 0..ns {
            te.push((cur(j), cur(j), lad.l));
            te.push((vol(j), vol(j), lad.c));
            // L di_j/dt = v_{j−1} − v_j − R i_j
            ta.push((cur(j), cur(j), -lad.r_series));
            ta.push((cur(j), vol(j), -1.0));
            if j > 0 {
                ta.push((cur(j), vol(j - 1), 1.0));
            }
            // C dv_j/dt = i_j − i_{j+1} − v_j / R_shunt
            ta.push((vol(j), cur(j), 1.0));
            if j + 1 < ns {
                ta.push((vol(j), cur(j + 1), -1.0));
            }
            ta.push((vol(j), vol(j), -1.0 / lad.r_shunt));
        }
        b[(cur(0), k)] = 1.0;
        far_nodes[k] = vol(ns - 1);
    }
    let g = 1.0 / r_couple;
    let (p, q) = (far_nodes[0], far_nodes[1]);
    ta.extend([(p, p, -g), (q, q, -g), (p, q, g), (q, p, g)]);

    let r_min = ladders.iter().map(|l| l.r_series).fold(f64::INFINITY, f64::min);
    let kappa = (0.5 * r_min).sqrt();
    let b = b * kappa;
    let c = b.transpose();
    StateSpaceSystem::new(
        SparseSquareMatrix::from_triplets(n, &te).unwrap(),
        SparseSquareMatrix::from_triplets(n, &ta).unwrap(),
        b,
        c,
        Some(Mat::identity(2, 2) * d),
        format!("rlc:{segments}"),
    )
    .unwrap()
}

/// Random banded system with symmetric positive-definite `E` and strictly
/// dissipative `A` (`A + Aᵀ ≺ 0`), hence a Hurwitz pencil.
///
/// With `passive_d = Some(d)` the ports are collocated (`C = Bᵀ`, requires
/// `m == p`), scaled so the strictly proper part has H∞ norm at most ½, and
/// `D = d·I` — a passive, minimum-phase, bounded-real system for `0 < d < ½`.
/// Otherwise `B`, `C` are Gaussian and `D = 0`.
pub fn random_stable_system(
    n: usize,
    m: usize,
    p: usize,
    passive_d: Option<f64>,
    seed: u64,
) -> StateSpaceSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut te = Vec::new();
    let mut ta = Vec::new();
    let mut diss_min = f64::INFINITY;
    for i in 0..n {
        te.push((i, i, 1.0 + rng.random::<f64>()));
        let dii = 0.5 + 4.0 * rng.random::<f64>();
        let mut off_sum = 0.0;
        for k in 1..=2usize {
            if i + k < n {
                let ev = 0.1 * (rng.random::<f64>() - 0.5);
                te.push((i, i + k, ev));
                te.push((i + k, i, ev));
                let sym = 0.1 * (rng.random::<f64>() - 0.5);
                let skew = 20.0 * (rng.random::<f64>() - 0.5);
                ta.push((i, i + k, sym + skew));
                ta.push((i + k, i, sym - skew));
                off_sum += sym.abs();
            }
            if i >= k {
                off_sum += 0.05;
            }
        }
        ta.push((i, i, -dii));
        diss_min = diss_min.min(dii - off_sum);
    }
    let e = SparseSquareMatrix::from_triplets(n, &te).unwrap();
    let a = SparseSquareMatrix::from_triplets(n, &ta).unwrap();
    let gauss = |rng: &mut ChaCha8Rng, r: usize, c: usize| {
        Mat::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let (b, c, d) = match passive_d {
        Some(d) => {
            assert_eq!(m, p, "collocated ports need m == p");
            let b0 = gauss(&mut rng, n, m);
            // ‖G₀‖∞ ≤ ‖B‖² / r_min with r_min a lower bound on −(A+Aᵀ)/2.
            let scale = (0.5 * diss_min.max(0.1)).sqrt() / crate::linalg::spectral_norm(&b0);
            let b = b0 * scale;
            let c = b.transpose();
            (b, c, Mat::identity(m, m) * d)
        }
        None => (gauss(&mut rng, n, m), gauss(&mut rng, p, n), Mat::zeros(p, m)),
    };
    StateSpaceSystem::new(e, a, b, c, Some(d), format!("random:{n},{seed}")).unwrap()
}
