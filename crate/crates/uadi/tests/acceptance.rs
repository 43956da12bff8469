//! End-to-end acceptance checks, run sequentially so that the wall-clock
//! budgets are measured without competing tests. Each criterion prints one
//! `PASS`/`FAIL` line; the test fails if any criterion does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{engine_literal_residual, spectral, Mat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uadi::bench::{equivalence_check, mixed_shift_pattern, scenario_shift_table};
use uadi::classic::{cf_adi, group_fadi_cases, radi, FadiCase, ShiftUnit, Side};
use uadi::engine::{Equation, EquationSelection, EquationStatus, UadiState};
use uadi::linalg::small_eig_real;
use uadi::rom::{basis_well_conditioned, bt_square_root, build_rom, interpolation_check, mirrored_points, RomVariant};
use uadi::shifts::{ShiftOracle, Strategy};
use uadi::system::{penzl_triple_peak, random_stable_system, rlc_ladder, StateSpaceSystem};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: &Mat, b: &Mat) -> f64 {
    spectral(&(a - b)) / spectral(b).max(1e-300)
}

/// Greedy nearest matching of two multisets; returns the worst
/// `|gᵢ − wⱼ| / (1 + |wⱼ|)`.
fn multiset_distance(got: &[Complex64], want: &[Complex64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; want.len()];
    let mut worst = 0.0f64;
    for g in got {
        let j = (0..want.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (g - want[i]).norm().total_cmp(&(g - want[j]).norm()))
            .unwrap();
        used[j] = true;
        worst = worst.max((g - want[j]).norm() / (1.0 + want[j].norm()));
    }
    worst
}

fn eigs(m: &Mat) -> Vec<Complex64> {
    small_eig_real(m, None).unwrap().values
}

/// Stable shift units cycling through real values and conjugate pairs.
fn shift_units(count: usize, seed: u64, spread: f64) -> Vec<ShiftUnit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let re = -(0.3 + spread * rng.random::<f64>());
            if k % 3 == 1 {
                ShiftUnit::Pair(c(re, 0.5 + spread * rng.random::<f64>()))
            } else {
                ShiftUnit::Real(re)
            }
        })
        .collect()
}

// 1. Static-shift residual table on the illustrative pair.
fn criterion1() -> Outcome {
    let t = Instant::now();
    let rows = scenario_shift_table().map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let worst = rows.iter().map(|r| r.relative_error()).fold(0.0, f64::max);
    let measured: Vec<String> = rows.iter().map(|r| format!("{:.4e}", r.measured)).collect();
    check(worst <= 0.05, || format!("worst relative error {worst:.3e}"))?;
    check(secs < 5.0, || format!("took {secs:.2}s"))?;
    Ok(format!("measured [{}], worst rel. error {worst:.1e}, {secs:.2}s", measured.join(", ")))
}

// 2. Extraction equivalence over 50 random pairs.
fn criterion2() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut cases = [false; 4];
    let mut worst = 0.0f64;
    for k in 0..50u64 {
        let n1 = rng.random_range(20..=120);
        let n2 = rng.random_range(20..=120);
        let m = rng.random_range(1..=3);
        let g1 = random_stable_system(n1, m, rng.random_range(1..=3), None, 100 + 2 * k);
        let g2 = random_stable_system(n2, rng.random_range(1..=3), m, None, 101 + 2 * k);
        let len = rng.random_range(6..=12);
        let (a, b) = mixed_shift_pattern(len, &mut rng);
        for g in group_fadi_cases(&a, &b).map_err(|e| e.to_string())? {
            cases[match g.case {
                FadiCase::I => 0,
                FadiCase::II => 1,
                FadiCase::III => 2,
                FadiCase::IV => 3,
            }] = true;
        }
        let r = equivalence_check(&g1, &g2, &a, &b).map_err(|e| format!("pair {k}: {e}"))?;
        worst = worst.max(r.max_deviation());
        check(r.max_deviation() <= 1e-8, || format!("pair {k} (n = {n1}/{n2}): {:?}", r.deviations))?;
    }
    let secs = t.elapsed().as_secs_f64();
    check(cases.iter().all(|&x| x), || format!("case coverage {cases:?}"))?;
    check(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("50 pairs, Cases I-IV covered, worst deviation {worst:.2e}, {secs:.1}s"))
}

// 3. Tracked residuals equal the dense substitution of the extracted
//    solution, every iteration.
fn criterion3() -> Outcome {
    let g = random_stable_system(60, 2, 2, Some(0.3), 31);
    let instances = [
        (g.clone(), g),
        (random_stable_system(120, 2, 1, None, 32), random_stable_system(90, 3, 2, None, 33)),
    ];
    let mut worst = 0.0f64;
    let mut checks = 0;
    for (i, (g1, g2)) in instances.into_iter().enumerate() {
        let mut st = UadiState::with_defaults(g1, g2, EquationSelection::all()).map_err(|e| e.to_string())?;
        let ua = shift_units(8, 40 + i as u64, 4.0);
        let ub = shift_units(8, 50 + i as u64, 4.0);
        // A one-sided step in the middle exercises the pending Sylvester path.
        let mut plan: Vec<(Option<ShiftUnit>, Option<ShiftUnit>)> = ua.into_iter().map(Some).zip(ub.into_iter().map(Some)).collect();
        plan.insert(4, (Some(ShiftUnit::Real(-0.8)), None));
        plan.insert(6, (None, Some(ShiftUnit::Real(-1.9))));
        for (a, b) in plan {
            st.step_units(a, b).map_err(|e| e.to_string())?;
            for e in Equation::ALL {
                if st.status(e) != &EquationStatus::Active {
                    continue;
                }
                let tracked = st.residual_norm(e).unwrap();
                let literal = engine_literal_residual(&st, e);
                let dev = (tracked - literal).abs();
                worst = worst.max(dev);
                checks += 1;
                check(dev <= 1e-9, || format!("instance {i}, {e}, step {}: {tracked:.3e} vs {literal:.3e}", st.steps()))?;
            }
        }
    }
    Ok(format!("{checks} residual checks, worst deviation {worst:.2e} (normalized)"))
}

/// Worst scaled violation of the projected identities of `st`.
fn projected_identities(st: &UadiState) -> f64 {
    let mut worst = 0.0f64;
    for side in 0..2 {
        let s = st.side(side).s_full();
        let ltl = st.side(side).l_full().transpose() * st.side(side).l_full();
        let r = -s.transpose() - &s + &ltl;
        worst = worst.max(spectral(&r) / (2.0 * spectral(&s) + spectral(&ltl)).max(1e-300));
    }
    for e in Equation::ALL {
        let Some((side, _)) = e.one_sided() else { continue };
        let Ok(x) = st.one_sided(e) else { continue };
        let Some(cxv) = &x.cxv else { continue };
        let s = st.side(side).s_full();
        let ph = &x.middle;
        let ax = &s - ph * x.ltilde.transpose() * &x.ltilde;
        let bh = ph * x.ltilde.transpose();
        let ch = cxv * ph;
        let terms = [&ax * ph, ph * ax.transpose(), &bh * bh.transpose(), ch.transpose() * &ch * x.sigma];
        let r = terms.iter().fold(Mat::zeros(ph.nrows(), ph.ncols()), |acc, t| acc + t);
        let scale: f64 = terms.iter().map(spectral).sum();
        worst = worst.max(spectral(&r) / scale.max(1e-300));
    }
    if let Ok(sy) = st.sylvester() {
        let (sv, sw) = (st.side(0).s_full(), st.side(1).s_full());
        let (lv, lw) = (st.side(0).l_full(), st.side(1).l_full());
        let xi = &sy.middle;
        let a1 = &sv - xi * lw.transpose() * &lv;
        let a2 = sw.transpose() - lw.transpose() * &lv * xi;
        let terms = [&a1 * xi, xi * &a2, (xi * lw.transpose()) * (&lv * xi)];
        let r = &terms[0] + &terms[1] + &terms[2];
        let scale: f64 = terms.iter().map(spectral).sum();
        worst = worst.max(spectral(&r) / scale.max(1e-300));
    }
    worst
}

// 4. Projected Lyapunov, Sylvester and Riccati identities.
fn criterion4() -> Outcome {
    let g = random_stable_system(50, 2, 2, Some(0.3), 41);
    let runs = [
        (g.clone(), g),
        (random_stable_system(80, 2, 2, None, 42), random_stable_system(60, 2, 2, None, 43)),
    ];
    let mut worst = 0.0f64;
    let mut iters = 0;
    for (i, (g1, g2)) in runs.into_iter().enumerate() {
        let mut st = UadiState::with_defaults(g1, g2, EquationSelection::all()).map_err(|e| e.to_string())?;
        let ua = shift_units(12, 60 + i as u64, 5.0);
        let ub = shift_units(12, 70 + i as u64, 5.0);
        for (a, b) in ua.into_iter().zip(ub) {
            st.step_units(Some(a), Some(b)).map_err(|e| e.to_string())?;
            let w = projected_identities(&st);
            worst = worst.max(w);
            iters += 1;
            check(w <= 1e-10, || format!("run {i}, step {}: {w:.3e}", st.steps()))?;
        }
    }
    Ok(format!("{iters} iterations, worst scaled identity residual {worst:.2e}"))
}

// 5. Pole placement with 50 shifts per side.
fn criterion5() -> Outcome {
    let g = random_stable_system(120, 1, 1, Some(0.3), 51);
    let mut st = UadiState::with_defaults(g.clone(), g, EquationSelection::all()).map_err(|e| e.to_string())?;
    // 50 distinct shift values per side: 8 real shifts and 21 conjugate
    // pairs. Real shifts are spread geometrically; clustered real shifts
    // make S a Cauchy-like matrix whose eigenvalues no dense eigensolver
    // resolves to 1e-10.
    let units = |re0: f64, im0: f64| {
        (0..29)
            .map(|k| {
                let t = k as f64;
                if k % 4 == 0 {
                    ShiftUnit::Real(-(re0 * 2.2f64.powf(t / 4.0)))
                } else {
                    ShiftUnit::Pair(c(-(re0 + 0.05 * t), im0 + 1.5 * t))
                }
            })
            .collect::<Vec<_>>()
    };
    for (a, b) in units(0.5, 1.0).into_iter().zip(units(0.7, 1.7)) {
        st.step_units(Some(a), Some(b)).map_err(|e| e.to_string())?;
    }
    let va = st.side(0).shifts().to_vec();
    let vb = st.side(1).shifts().to_vec();
    check(va.len() == 50 && vb.len() == 50, || format!("{} / {} shift values", va.len(), vb.len()))?;
    let conj = |v: &[Complex64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
    let mut rows: Vec<(String, f64)> = Vec::new();
    for (side, own) in [(0usize, &va), (1, &vb)] {
        let s = st.side(side).s_full();
        rows.push((format!("lyap side {}", side + 1), multiset_distance(&eigs(&(-s.transpose())), &conj(own))));
    }
    let sy = st.sylvester().map_err(|e| e.to_string())?;
    let a1 = -&sy.middle * st.side(1).s_full().transpose() * &sy.xt;
    rows.push(("sylv".into(), multiset_distance(&eigs(&a1), &vb)));
    for e in Equation::ALL {
        let Some((side, _)) = e.one_sided() else { continue };
        let Ok(x) = st.one_sided(e) else { continue };
        let Some(cxv) = &x.cxv else { continue };
        let s = st.side(side).s_full();
        let ax = &s - &x.middle * (x.ltilde.transpose() * &x.ltilde - cxv.transpose() * cxv * x.sigma);
        let own = if side == 0 { &va } else { &vb };
        rows.push((e.name().into(), multiset_distance(&eigs(&ax), &conj(own))));
    }
    let (name, worst) = rows.iter().cloned().fold((String::new(), 0.0f64), |acc, r| if r.1 > acc.1 { r } else { acc });
    check(worst <= 1e-10, || format!("{name}: {worst:.3e}; all: {rows:?}"))?;
    Ok(format!("{} placement rows, 50 shifts per side, worst {worst:.2e} ({name})", rows.len()))
}

// 6. Two large solves per iteration.
fn criterion6() -> Outcome {
    let g = random_stable_system(80, 2, 2, Some(0.3), 61);
    let mut st = UadiState::with_defaults(g.clone(), g, EquationSelection::all()).map_err(|e| e.to_string())?;
    let enabled = Equation::ALL.iter().filter(|&&e| st.is_enabled(e)).count();
    check(enabled == 17, || format!("only {enabled} equations feasible"))?;
    let ua = shift_units(10, 62, 3.0);
    let ub = shift_units(10, 63, 3.0);
    for (a, b) in ua.into_iter().zip(ub) {
        let before = st.large_solves();
        st.step_units(Some(a), Some(b)).map_err(|e| e.to_string())?;
        check(st.large_solves() - before == 2, || format!("step {}: {} solves", st.steps(), st.large_solves() - before))?;
    }
    check(st.large_solves() == 2 * st.steps(), || "total count".into())?;
    Ok(format!("{} iterations, {} solves, 17 equations active", st.steps(), st.large_solves()))
}

// 7. Scaled triple-peak experiment.
fn criterion7() -> Outcome {
    let t = Instant::now();
    let g1 = penzl_triple_peak(2000, 10.0, 20.0, 30.0).map_err(|e| e.to_string())?;
    let g2 = penzl_triple_peak(2000, 40.0, 50.0, 60.0).map_err(|e| e.to_string())?;
    let sel = EquationSelection::of(&[Equation::P1, Equation::Q2, Equation::Sylv]);

    // Subspace strategy: α follows G₁'s peaks, β follows G₂'s, so the
    // shifts are mismatched for the Sylvester equation.
    let mut st = UadiState::with_defaults(g1.clone(), g2.clone(), sel).map_err(|e| e.to_string())?;
    let mut oracle = ShiftOracle::new(Strategy::SubspaceGalerkin, 20);
    let mut sylv_hist = Vec::new();
    let mut lyap_steps = None;
    while st.steps() < 70 {
        let (a, b) = oracle.next_units(&st).map_err(|e| e.to_string())?;
        if a.is_none() && b.is_none() {
            break;
        }
        st.step_units(a, b).map_err(|e| e.to_string())?;
        if let Ok(r) = st.residual_norm(Equation::Sylv) {
            sylv_hist.push(r);
        }
        let p = st.residual_norm(Equation::P1).unwrap_or(f64::INFINITY);
        let q = st.residual_norm(Equation::Q2).unwrap_or(f64::INFINITY);
        if lyap_steps.is_none() && p < 1e-6 && q < 1e-6 {
            lyap_steps = Some(st.steps());
        }
    }
    let steps = lyap_steps.ok_or_else(|| {
        format!(
            "P1/Q2 not below 1e-6 in 70 iterations: {:?} {:?}",
            st.residual_norm(Equation::P1),
            st.residual_norm(Equation::Q2)
        )
    })?;
    let poles: Vec<Complex64> = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0].iter().map(|&w| c(-1.0, w)).collect();
    let emitted: Vec<Complex64> = oracle.emitted(0).iter().chain(oracle.emitted(1)).copied().collect();
    let hit = poles
        .iter()
        .filter(|p| emitted.iter().any(|z| (z - *p).norm() <= 0.05 * p.norm() || (z.conj() - *p).norm() <= 0.05 * p.norm()))
        .count();
    check(hit >= 5, || format!("only {hit} of 6 dominant poles approached"))?;
    let sylv_first = *sylv_hist.first().ok_or("no balanced Sylvester iterate")?;
    let sylv_max = sylv_hist.iter().copied().fold(0.0, f64::max);
    check(sylv_max > 1e3 * sylv_first, || format!("mismatched Sylvester residual did not grow: {sylv_hist:?}"))?;

    // Alternating Sylvester strategy.
    let mut st = UadiState::with_defaults(g1, g2, EquationSelection::of(&[Equation::Sylv])).map_err(|e| e.to_string())?;
    let mut oracle = ShiftOracle::new(Strategy::SylvesterAlternating, 20);
    let mut sylv_steps = None;
    while st.steps() < 70 {
        let (a, b) = oracle.next_units(&st).map_err(|e| e.to_string())?;
        if a.is_none() && b.is_none() {
            break;
        }
        st.step_units(a, b).map_err(|e| e.to_string())?;
        if st.residual_norm(Equation::Sylv).is_ok_and(|r| r < 1e-4) {
            sylv_steps = Some(st.steps());
            break;
        }
    }
    let sylv_steps = sylv_steps.ok_or_else(|| format!("Sylvester residual {:?} after 70 iterations", st.residual_norm(Equation::Sylv)))?;
    let secs = t.elapsed().as_secs_f64();
    check(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "subspace: P1,Q2 < 1e-6 at iteration {steps}, {hit}/6 poles hit, mismatched sylv grew {sylv_first:.1e} -> {sylv_max:.1e}; sylv-alt: < 1e-4 at iteration {sylv_steps}; {secs:.1}s"
    ))
}

// 8. Interpolation at the mirrored shifts.
fn criterion8() -> Outcome {
    let g = random_stable_system(200, 2, 2, Some(0.3), 81);
    let g2 = random_stable_system(150, 2, 2, Some(0.25), 82);
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, (a_sys, b_sys)) in [(g.clone(), g), (random_stable_system(180, 2, 2, Some(0.2), 83), g2)].into_iter().enumerate() {
        let mut st = UadiState::with_defaults(a_sys.clone(), b_sys.clone(), EquationSelection::all()).map_err(|e| e.to_string())?;
        let ua = shift_units(9, 84 + i as u64, 3.0);
        let ub = shift_units(9, 86 + i as u64, 3.0);
        for (a, b) in ua.into_iter().zip(ub) {
            st.step_units(Some(a), Some(b)).map_err(|e| e.to_string())?;
        }
        check(basis_well_conditioned(st.side(0).basis()) && basis_well_conditioned(st.side(1).basis()), || "ill-conditioned basis".into())?;
        for variant in RomVariant::ALL {
            for (side, sys) in [(1, &a_sys), (2, &b_sys)] {
                let Ok(rom) = build_rom(&st, side, variant) else {
                    check(i == 1 && variant != RomVariant::Lyap && variant != RomVariant::SylvPole, || format!("{variant} side {side} unavailable"))?;
                    continue;
                };
                let dev = interpolation_check(sys, &rom, &mirrored_points(&st, side)).map_err(|e| e.to_string())?;
                worst = worst.max(dev);
                count += 1;
                check(dev <= 1e-8, || format!("run {i}, {variant} side {side}: {dev:.3e}"))?;
            }
        }
    }
    Ok(format!("{count} reduced models, worst relative deviation {worst:.2e}"))
}

// 9. Convergence to dense Lyapunov/Riccati solutions.
fn criterion9() -> Outcome {
    let mut worst = 0.0f64;
    let mut counts = Vec::new();
    for seed in [91u64, 93, 95, 97] {
        let (w, na, nb) = dense_oracle_pair(random_stable_system(40, 1, 1, None, seed), random_stable_system(40, 1, 1, None, seed + 1))?;
        worst = worst.max(w);
        counts.push((na, nb));
    }
    check(worst <= 1e-6, || format!("worst relative error {worst:.2e}"))?;
    Ok(format!("4 instance pairs, {counts:?} subspace shifts, worst relative error {worst:.2e}"))
}

/// Runs UADI plus the classic solvers on about 30 subspace shifts per side
/// and compares them with the dense Lyapunov and Riccati solutions.
fn dense_oracle_pair(g1: StateSpaceSystem, g2: StateSpaceSystem) -> Result<(f64, usize, usize), String> {
    let (d1, d2) = (common::dense(&g1), common::dense(&g2));
    let sel = EquationSelection::of(&[Equation::P1, Equation::Q2, Equation::Pricc, Equation::Qricc]);
    let mut st = UadiState::with_defaults(g1.clone(), g2.clone(), sel).map_err(|e| e.to_string())?;
    // No restarts: the subspace may grow to the full state dimension.
    let mut oracle = ShiftOracle::new(Strategy::SubspaceGalerkin, 60);
    while oracle.emitted(0).len() < 30 || oracle.emitted(1).len() < 30 {
        let (a, b) = oracle.next_units(&st).map_err(|e| e.to_string())?;
        let a = a.filter(|_| oracle.emitted(0).len() <= 31);
        let b = b.filter(|_| oracle.emitted(1).len() <= 31);
        if a.is_none() && b.is_none() {
            break;
        }
        st.step_units(a, b).map_err(|e| e.to_string())?;
    }
    let (sa, sb) = (st.side(0).shifts().to_vec(), st.side(1).shifts().to_vec());
    let p = common::gen_lyapunov(&d1.a, &d1.e, &(&d1.b * d1.b.transpose()));
    let q = common::gen_lyapunov(&d2.a.transpose(), &d2.e.transpose(), &(d2.c.transpose() * &d2.c));
    let pr = common::newton_riccati(&d1.a, &d1.e, &d1.b, &d1.c, 1.0);
    let qr = common::newton_riccati(&d2.a.transpose(), &d2.e.transpose(), &d2.c.transpose(), &d2.b.transpose(), 1.0);
    let x = |eq| st.extract_solution(eq).map(|s| s.dense()).map_err(|e| e.to_string());
    let k = sa.len().max(sb.len());
    let cp = cf_adi(&g1, Side::Controllability, &sa, k, 0.0).map_err(|e| e.to_string())?.solution.dense();
    let cq = cf_adi(&g2, Side::Observability, &sb, k, 0.0).map_err(|e| e.to_string())?.solution.dense();
    let rp = radi(&g1, &sa, k, 0.0).map_err(|e| e.to_string())?.solution.dense();
    let rq = radi(&g2.dual(), &sb, k, 0.0).map_err(|e| e.to_string())?.solution.dense();
    let rows = [
        ("uadi p1", rel(&x(Equation::P1)?, &p)),
        ("uadi q2", rel(&x(Equation::Q2)?, &q)),
        ("uadi pricc", rel(&x(Equation::Pricc)?, &pr)),
        ("uadi qricc", rel(&x(Equation::Qricc)?, &qr)),
        ("cf-adi p", rel(&cp, &p)),
        ("cf-adi q", rel(&cq, &q)),
        ("radi p", rel(&rp, &pr)),
        ("radi q", rel(&rq, &qr)),
    ];
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    check(worst <= 1e-6, || format!("{}: {rows:?}", g1.label))?;
    Ok((worst, sa.len(), sb.len()))
}

/// Hankel values from a Gramian pair given by factors.
fn hankel_from_factors(sys: &StateSpaceSystem, zp: &Mat, zq: &Mat) -> Vec<f64> {
    let core = zq.transpose() * sys.e.mul(zp);
    let mut h: Vec<f64> = core.svd(false, false).singular_values.iter().copied().collect();
    h.sort_by(|a, b| b.total_cmp(a));
    h
}

// 10. RLC ladder, all equations, Petrov-BT shifts, balanced truncation.
fn criterion10() -> Outcome {
    let t = Instant::now();
    let g = rlc_ladder(400, 0.2);
    let mut st = UadiState::with_defaults(g.clone(), g.clone(), EquationSelection::all()).map_err(|e| e.to_string())?;
    check(Equation::ALL.iter().all(|&e| st.is_enabled(e)), || "not every equation is feasible".into())?;
    let mut oracle = ShiftOracle::new(Strategy::SubspacePetrov, 20);
    let converged = oracle.drive(&mut st, 50, 1e-6).map_err(|e| e.to_string())?;
    check(converged, || format!("residuals after {} iterations: {:?}", st.steps(), st.residuals()))?;
    // Decrease on average: every history ends far below where it started,
    // and the geometric-mean reduction per five iterations is below one.
    for e in Equation::ALL {
        let h: Vec<f64> = st.history().iter().filter_map(|r| r.residuals.iter().find(|x| x.0 == e).map(|x| x.1)).collect();
        check(h.len() == st.steps(), || format!("{e} not active at every iteration"))?;
        for w in h.windows(6).step_by(5) {
            check(w[5] < w[0], || format!("{e} did not decrease over a window: {w:?}"))?;
        }
    }
    let (rom, h) = bt_square_root(&st, 10).map_err(|e| e.to_string())?;
    check(rom.order() == 10, || "wrong ROM order".into())?;
    let steps = st.steps();

    // Reference Gramians: independent CF-ADI runs cycling the emitted
    // shifts until the residual is at roundoff level; the residual bound
    // certifies them as the exact Gramians to that accuracy.
    let shifts: Vec<Complex64> = oracle.emitted(0).iter().copied().cycle().take(4 * oracle.emitted(0).len()).collect();
    let p = cf_adi(&g, Side::Controllability, &shifts, usize::MAX, 1e-15).map_err(|e| e.to_string())?;
    let q = cf_adi(&g, Side::Observability, &shifts, usize::MAX, 1e-15).map_err(|e| e.to_string())?;
    let (rp, rq) = (*p.history.last().unwrap(), *q.history.last().unwrap());
    check(rp <= 1e-13 && rq <= 1e-13, || format!("reference residuals {rp:.2e} {rq:.2e}"))?;
    let href = hankel_from_factors(&g, &p.solution.left, &q.solution.left);
    let worst_hankel = (0..10).map(|i| (h[i] - href[i]).abs() / href[i]).fold(0.0, f64::max);
    check(worst_hankel <= 1e-6, || format!("Hankel deviation {worst_hankel:.3e}: {:?} vs {:?}", &h[..10], &href[..10]))?;

    // The Gramian-to-Hankel pipeline against fully dense balancing on a
    // smaller member of the same ladder family.
    let gs = rlc_ladder(25, 0.2);
    let d = common::dense(&gs);
    let pd = common::gen_lyapunov(&d.a, &d.e, &(&d.b * d.b.transpose()));
    let qd = common::gen_lyapunov(&d.a.transpose(), &d.e.transpose(), &(d.c.transpose() * &d.c));
    let mut hd: Vec<f64> = eigs(&(&pd * d.e.transpose() * &qd * &d.e)).iter().map(|z| z.re.max(0.0).sqrt()).collect();
    hd.sort_by(|a, b| b.total_cmp(a));
    let mut ss = UadiState::with_defaults(gs.clone(), gs.clone(), EquationSelection::of(&[Equation::P1, Equation::Q2])).map_err(|e| e.to_string())?;
    let mut so = ShiftOracle::new(Strategy::SubspacePetrov, 20);
    so.drive(&mut ss, 60, 1e-13).map_err(|e| e.to_string())?;
    let (_, hs) = bt_square_root(&ss, 10).map_err(|e| e.to_string())?;
    let worst_dense = (0..10).map(|i| (hs[i] - hd[i]).abs() / hd[i]).fold(0.0, f64::max);
    check(worst_dense <= 1e-6, || format!("n = {} dense Hankel deviation {worst_dense:.3e}", gs.n()))?;
    let secs = t.elapsed().as_secs_f64();
    Ok(format!(
        "n = {}: all 17 residuals < 1e-6 at iteration {steps}; leading 10 Hankel values within {worst_hankel:.1e} (n = 1600 certified reference) and {worst_dense:.1e} (n = {} dense); {secs:.1}s",
        g.n(),
        gs.n()
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("static-shift table", criterion1),
        ("extraction equivalence", criterion2),
        ("residual-factorization oracle", criterion3),
        ("projected-equation invariants", criterion4),
        ("pole placement", criterion5),
        ("two-solve budget", criterion6),
        ("scaled triple-peak experiment", criterion7),
        ("interpolation", criterion8),
        ("dense-oracle convergence", criterion9),
        ("RLC ladder scenario", criterion10),
    ];
    // `ACCEPTANCE_ONLY=5,7` restricts the run to the listed criteria.
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(k + 1))) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
