//! Python bindings: the bench driver, the classic low-rank Lyapunov solver
//! and the scripted scenarios.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use uadi::bench::{self, RunConfig, ShiftSpec, SystemSource};
use uadi::classic::{cf_adi, Side};
use uadi::engine::EquationSelection;
use uadi::shifts::DEFAULT_CAP;

create_exception!(pyuadi, UadiError, PyException);

fn err(e: uadi::UadiError) -> PyErr {
    UadiError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = uadi::UadiError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// Runs the unified iteration on a system pair and returns the run summary.
///
/// Systems are given as manifest paths or generator strings
/// (`penzl:n,w1,w2,w3`, `illustrative[:1|2]`, `random:n,m,p[,d]`,
/// `rlc:segments[,d]`).
#[pyfunction]
#[pyo3(signature = (sys1, sys2, equations="all", shifts="subspace", max_iter=50, tol=1e-8, restart_cap=DEFAULT_CAP, seed=42, out=None))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    sys1: &str,
    sys2: &str,
    equations: &str,
    shifts: &str,
    max_iter: usize,
    tol: f64,
    restart_cap: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = RunConfig::new(parse::<SystemSource>(sys1)?, parse::<SystemSource>(sys2)?, parse::<ShiftSpec>(shifts)?);
    cfg.equations = parse::<EquationSelection>(equations)?;
    cfg.max_iter = max_iter;
    cfg.tol = tol;
    cfg.restart_cap = restart_cap;
    cfg.seed = seed;
    cfg.out_dir = out;
    let rep = py.detach(|| bench::run(&cfg)).map_err(err)?;

    let d = PyDict::new(py);
    d.set_item("iterations", rep.iterations)?;
    d.set_item("large_solves", rep.large_solves)?;
    d.set_item("stop", format!("{:?}", rep.stop).to_lowercase())?;
    d.set_item("converged", rep.converged())?;
    d.set_item("elapsed_secs", rep.elapsed_secs)?;
    let res = PyDict::new(py);
    let status = PyDict::new(py);
    for s in &rep.equations {
        status.set_item(&s.equation, &s.status)?;
        if let Some(r) = s.residual {
            res.set_item(&s.equation, r)?;
        }
    }
    d.set_item("residuals", res)?;
    d.set_item("status", status)?;
    let c = |v: &[[f64; 2]]| v.iter().map(|z| Complex64::new(z[0], z[1])).collect::<Vec<_>>();
    d.set_item("alpha", c(&rep.alpha))?;
    d.set_item("beta", c(&rep.beta))?;
    Ok(d)
}

/// Static-shift residuals on the illustrative pair as
/// `(alpha, beta, expected, measured)` tuples.
#[pyfunction]
fn shift_table() -> PyResult<Vec<(Complex64, Complex64, f64, f64)>> {
    let rows = bench::scenario_shift_table().map_err(err)?;
    Ok(rows
        .iter()
        .map(|r| {
            (Complex64::new(r.alpha[0], r.alpha[1]), Complex64::new(r.beta[0], r.beta[1]), r.expected, r.measured)
        })
        .collect())
}

/// Relative deviations between extracted and classic solutions on a random
/// pair, keyed by equation tag.
#[pyfunction]
#[pyo3(signature = (seed=42, n=60, iters=8))]
fn equivalence(py: Python<'_>, seed: u64, n: usize, iters: usize) -> PyResult<Vec<(String, f64)>> {
    let rep = py.detach(|| bench::scenario_equivalence(seed, n, iters)).map_err(err)?;
    Ok(rep.deviations)
}

/// Low-rank factor `Z` (row-major) of the controllability Gramian of
/// `system`, or of the observability Gramian, together with the normalized
/// residual history.
#[pyfunction]
#[pyo3(signature = (system, shifts, observability=false, tol=0.0))]
fn lyapunov(system: &str, shifts: Vec<Complex64>, observability: bool, tol: f64) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let sys = parse::<SystemSource>(system)?.build(1, 42).map_err(err)?;
    let side = if observability { Side::Observability } else { Side::Controllability };
    let out = cf_adi(&sys, side, &shifts, shifts.len(), tol).map_err(err)?;
    let z = &out.solution.left;
    let rows = (0..z.nrows()).map(|i| z.row(i).iter().copied().collect()).collect();
    Ok((rows, out.history))
}

#[pymodule]
fn pyuadi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("UadiError", m.py().get_type::<UadiError>())?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(shift_table, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    Ok(())
}
