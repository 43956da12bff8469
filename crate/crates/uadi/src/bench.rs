//! Scenario plumbing behind the `uadi` binary: run configuration, the
//! iteration driver with CSV/JSON emission, and the canned experiments.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classic::{cf_adi, fadi, radi, LowRankSolution, Side};
use crate::engine::{Equation, EquationSelection, EquationStatus, UadiState};
use crate::error::{Result, UadiError};
use crate::linalg::{blkdiag, gram_norm2, hcat, Mat};
use crate::shifts::{ShiftOracle, Strategy, DEFAULT_CAP};
use crate::system::{illustrative_pair, load_system, penzl_triple_peak, random_stable_system, rlc_ladder, StateSpaceSystem};

/// Where a system comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    /// A manifest file (or a directory holding `manifest.txt`).
    Manifest(PathBuf),
    /// `penzl:n,w1,w2,w3`.
    Penzl { n: usize, peaks: [f64; 3] },
    /// `illustrative` (G₁ in the first slot, G₂ in the second) or
    /// `illustrative:1|2`.
    Illustrative(Option<usize>),
    /// `random:n,m,p[,d]`; seeded by the run seed and the slot.
    Random { n: usize, m: usize, p: usize, passive_d: Option<f64> },
    /// `rlc:segments[,d]`.
    Rlc { segments: usize, d: f64 },
}

fn parse_list<T: FromStr>(spec: &str, what: &str) -> Result<Vec<T>> {
    spec.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| UadiError::ParseError(format!("bad number `{t}` in {what}")))
        })
        .collect()
}

impl FromStr for SystemSource {
    type Err = UadiError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let bad = |msg: &str| Err(UadiError::ParseError(format!("system `{s}`: {msg}")));
        match kind {
            "penzl" => {
                let v: Vec<f64> = parse_list(args, "penzl spec")?;
                if v.len() != 4 || v[0] < 8.0 || v[0].fract() != 0.0 {
                    return bad("expected penzl:n,w1,w2,w3 with integer n >= 8");
                }
                Ok(SystemSource::Penzl { n: v[0] as usize, peaks: [v[1], v[2], v[3]] })
            }
            "illustrative" => match args {
                "" => Ok(SystemSource::Illustrative(None)),
                "1" => Ok(SystemSource::Illustrative(Some(1))),
                "2" => Ok(SystemSource::Illustrative(Some(2))),
                _ => bad("expected illustrative, illustrative:1 or illustrative:2"),
            },
            "random" => {
                let v: Vec<f64> = parse_list(args, "random spec")?;
                if !(3..=4).contains(&v.len()) || v[..3].iter().any(|x| *x < 1.0 || x.fract() != 0.0) {
                    return bad("expected random:n,m,p[,d]");
                }
                if v.len() == 4 && v[1] != v[2] {
                    return bad("a passive random system needs m = p");
                }
                Ok(SystemSource::Random {
                    n: v[0] as usize,
                    m: v[1] as usize,
                    p: v[2] as usize,
                    passive_d: v.get(3).copied(),
                })
            }
            "rlc" => {
                let v: Vec<f64> = parse_list(args, "rlc spec")?;
                if v.is_empty() || v.len() > 2 || v[0] < 1.0 || v[0].fract() != 0.0 {
                    return bad("expected rlc:segments[,d]");
                }
                Ok(SystemSource::Rlc { segments: v[0] as usize, d: v.get(1).copied().unwrap_or(0.2) })
            }
            _ => Ok(SystemSource::Manifest(PathBuf::from(s))),
        }
    }
}

impl SystemSource {
    /// Builds the system for `slot` (1 or 2).
    pub fn build(&self, slot: usize, seed: u64) -> Result<StateSpaceSystem> {
        match self {
            SystemSource::Manifest(p) => load_system(p),
            SystemSource::Penzl { n, peaks } => penzl_triple_peak(*n, peaks[0], peaks[1], peaks[2]),
            SystemSource::Illustrative(which) => {
                let (g1, g2) = illustrative_pair();
                Ok(if which.unwrap_or(slot) == 1 { g1 } else { g2 })
            }
            SystemSource::Random { n, m, p, passive_d } => {
                Ok(random_stable_system(*n, *m, *p, *passive_d, seed.wrapping_add(slot as u64)))
            }
            SystemSource::Rlc { segments, d } => Ok(rlc_ladder(*segments, *d)),
        }
    }
}

/// Shift policy of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSpec {
    /// Fixed lists with conjugates adjacent.
    Static { alpha: Vec<Complex64>, beta: Vec<Complex64> },
    Adaptive(Strategy),
}

/// Appends the conjugate after every complex entry.
fn close_pairs(list: &[Complex64]) -> Vec<Complex64> {
    list.iter()
        .flat_map(|&z| if z.im == 0.0 { vec![z] } else { vec![z, z.conj()] })
        .collect()
}

/// Parses a static shift file. Each non-comment line is `alpha re im` or
/// `beta re im` (`a`/`b` also accepted); a complex entry stands for its
/// conjugate pair, so list one member per pair.
pub fn parse_shift_file(text: &str) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
        let bad = || UadiError::ParseError(format!("shift file line {}: `{line}`", ln + 1));
        if tok.len() < 2 || tok.len() > 3 {
            return Err(bad());
        }
        let re: f64 = tok[1].parse().map_err(|_| bad())?;
        let im: f64 = match tok.get(2) {
            Some(t) => t.parse().map_err(|_| bad())?,
            None => 0.0,
        };
        let z = Complex64::new(re, im);
        match tok[0].to_ascii_lowercase().as_str() {
            "alpha" | "a" => alpha.push(z),
            "beta" | "b" => beta.push(z),
            _ => return Err(bad()),
        }
    }
    Ok((close_pairs(&alpha), close_pairs(&beta)))
}

impl FromStr for ShiftSpec {
    type Err = UadiError;

    /// `static:<file>` or an adaptive strategy name.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("static:") {
            let text = fs::read_to_string(path).map_err(|e| UadiError::Io(format!("{path}: {e}")))?;
            let (alpha, beta) = parse_shift_file(&text)?;
            return Ok(ShiftSpec::Static { alpha, beta });
        }
        Ok(ShiftSpec::Adaptive(s.parse()?))
    }
}

/// Everything a `solve` run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub sys1: SystemSource,
    pub sys2: SystemSource,
    pub equations: EquationSelection,
    pub shifts: ShiftSpec,
    pub max_iter: usize,
    pub tol: f64,
    pub restart_cap: usize,
    /// Directory for `residuals.csv` and `summary.json`; nothing is written
    /// when `None`.
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(sys1: SystemSource, sys2: SystemSource, shifts: ShiftSpec) -> Self {
        Self {
            sys1,
            sys2,
            equations: EquationSelection::all(),
            shifts,
            max_iter: 50,
            tol: 1e-8,
            restart_cap: DEFAULT_CAP,
            out_dir: None,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(UadiError::InvalidSize(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(UadiError::InvalidSize("max_iter must be at least 1".into()));
        }
        if self.restart_cap == 0 {
            return Err(UadiError::InvalidSize("restart cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// One CSV row: the normalized residual of one equation after one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterRecord {
    pub iter: usize,
    pub equation: String,
    pub residual: f64,
    /// Shift of the side the equation lives on (α for the Sylvester
    /// equation); empty when that side did not step.
    pub shift_re: Option<f64>,
    pub shift_im: Option<f64>,
    /// Cumulative large solves after this step (not part of the CSV).
    #[serde(skip)]
    pub solves: usize,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIter,
    /// The shift source had nothing left to emit.
    ShiftsExhausted,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationSummary {
    pub equation: String,
    pub status: String,
    pub residual: Option<f64>,
    pub rank: Option<usize>,
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    #[serde(skip)]
    pub records: Vec<IterRecord>,
    pub iterations: usize,
    pub large_solves: usize,
    pub stop: StopReason,
    pub equations: Vec<EquationSummary>,
    pub alpha: Vec<[f64; 2]>,
    pub beta: Vec<[f64; 2]>,
    pub elapsed_secs: f64,
    pub error: Option<String>,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// `0` on convergence, `2` when the iteration budget (or the shift
    /// supply) ran out, `1` on error.
    pub fn exit_code(&self) -> i32 {
        match self.stop {
            StopReason::Converged => 0,
            StopReason::MaxIter | StopReason::ShiftsExhausted => 2,
            StopReason::Error => 1,
        }
    }

    /// Final normalized residual of `eq`, if it is active.
    pub fn final_residual(&self, eq: Equation) -> Option<f64> {
        self.equations.iter().find(|s| s.equation == eq.name()).and_then(|s| s.residual)
    }

    /// Normalized residual history of `eq`, one entry per step at which it
    /// was active.
    pub fn history(&self, eq: Equation) -> Vec<(usize, f64)> {
        self.records
            .iter()
            .filter(|r| r.equation == eq.name())
            .map(|r| (r.iter, r.residual))
            .collect()
    }

    fn summarize(state: &UadiState, records: Vec<IterRecord>, stop: StopReason, elapsed: Duration, error: Option<String>) -> Self {
        let equations = Equation::ALL
            .into_iter()
            .map(|eq| {
                let status = state.status(eq);
                let active = *status == EquationStatus::Active;
                EquationSummary {
                    equation: eq.name().into(),
                    status: match status {
                        EquationStatus::Active => "active".into(),
                        EquationStatus::Pending => "pending".into(),
                        EquationStatus::Skipped(r) => format!("skipped: {r}"),
                        EquationStatus::Degraded(r) => format!("degraded: {r}"),
                    },
                    residual: if active { state.residual_norm(eq).ok() } else { None },
                    rank: if active { state.extract_solution(eq).ok().map(|x| x.rank()) } else { None },
                }
            })
            .collect();
        let pairs = |k: usize| state.side(k).shifts().iter().map(|z| [z.re, z.im]).collect();
        Self {
            records,
            iterations: state.steps(),
            large_solves: state.large_solves(),
            stop,
            equations,
            alpha: pairs(0),
            beta: pairs(1),
            elapsed_secs: elapsed.as_secs_f64(),
            error,
        }
    }
}

/// Append-only residual log, flushed after every iteration so that the file
/// is well-formed at any iteration boundary.
struct CsvSink {
    w: csv::Writer<File>,
}

impl CsvSink {
    fn create(path: &Path) -> Result<Self> {
        let w = csv::Writer::from_path(path).map_err(|e| UadiError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self { w })
    }

    fn append(&mut self, rows: &[IterRecord]) -> Result<()> {
        let io = |e: csv::Error| UadiError::Io(e.to_string());
        for r in rows {
            self.w.serialize(r).map_err(io)?;
        }
        self.w.flush()?;
        Ok(())
    }
}

fn records_of(state: &UadiState, alpha: Option<Complex64>, beta: Option<Complex64>) -> Vec<IterRecord> {
    state
        .residuals()
        .into_iter()
        .map(|(eq, r)| {
            let z = match eq.one_sided() {
                Some((1, _)) => beta,
                _ => alpha,
            };
            IterRecord {
                iter: state.steps(),
                equation: eq.name().into(),
                residual: r,
                shift_re: z.map(|z| z.re),
                shift_im: z.map(|z| z.im),
                solves: state.large_solves(),
            }
        })
        .collect()
}

fn with_context(e: UadiError, what: &str) -> UadiError {
    match e {
        UadiError::Io(m) => UadiError::Io(format!("{what}: {m}")),
        UadiError::ParseError(m) => UadiError::ParseError(format!("{what}: {m}")),
        other => other,
    }
}

fn write_summary(dir: &Path, report: &RunReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| UadiError::Io(e.to_string()))?;
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

/// Iterates until every active residual is `≤ tol`, the step budget is
/// spent or the shift source is exhausted. With an output directory the
/// CSV grows by one block of rows per step and `summary.json` is written at
/// the end — also when a step fails, in which case the error is returned
/// after the partial report is on disk.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let g1 = cfg.sys1.build(1, cfg.seed).map_err(|e| with_context(e, "sys1"))?;
    let g2 = cfg.sys2.build(2, cfg.seed).map_err(|e| with_context(e, "sys2"))?;
    let mut state = UadiState::with_defaults(g1, g2, cfg.equations)?;
    let mut oracle = match &cfg.shifts {
        ShiftSpec::Static { alpha, beta } => ShiftOracle::with_static(alpha, beta)?,
        ShiftSpec::Adaptive(s) => ShiftOracle::new(*s, cfg.restart_cap),
    };
    let mut sink = match &cfg.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(CsvSink::create(&dir.join("residuals.csv"))?)
        }
        None => None,
    };
    let t0 = Instant::now();
    let mut records = Vec::new();
    let mut step = || -> Result<StopReason> {
        for _ in 0..cfg.max_iter {
            let (a, b) = oracle.next_units(&state)?;
            if a.is_none() && b.is_none() {
                return Ok(StopReason::ShiftsExhausted);
            }
            state.step_units(a, b)?;
            let rows = records_of(&state, a.map(|u| u.shift()), b.map(|u| u.shift()));
            if let Some(s) = sink.as_mut() {
                s.append(&rows)?;
            }
            records.extend(rows);
            log::info!("iteration {}: {:?}", state.steps(), state.residuals());
            if state.converged(cfg.tol) {
                return Ok(StopReason::Converged);
            }
        }
        Ok(StopReason::MaxIter)
    };
    let outcome = step();
    let (stop, err) = match &outcome {
        Ok(s) => (*s, None),
        Err(e) => (StopReason::Error, Some(format!("iteration {}: {e}", state.steps() + 1))),
    };
    let report = RunReport::summarize(&state, records, stop, t0.elapsed(), err);
    if let Some(dir) = &cfg.out_dir {
        write_summary(dir, &report)?;
    }
    outcome?;
    Ok(report)
}

/// One row of the illustrative-pair shift comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftTableRow {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub expected: f64,
    pub measured: f64,
}

impl ShiftTableRow {
    pub fn relative_error(&self) -> f64 {
        (self.measured - self.expected).abs() / self.expected.abs()
    }
}

/// The four static shift configurations on the illustrative pair: one
/// conjugate pair per side, Sylvester equation only.
pub fn scenario_shift_table() -> Result<Vec<ShiftTableRow>> {
    let rows = [(100.0, 400.0, 3.51e4), (400.0, 100.0, 12.2839), (100.0, 100.0, 0.0412), (400.0, 400.0, 0.0411)];
    let (g1, g2) = illustrative_pair();
    rows.into_iter()
        .map(|(wa, wb, expected)| {
            let (a, b) = (Complex64::new(-1.0, wa), Complex64::new(-1.0, wb));
            let mut st = UadiState::with_defaults(g1.clone(), g2.clone(), EquationSelection::of(&[Equation::Sylv]))?;
            st.step(a, b)?;
            Ok(ShiftTableRow {
                alpha: [a.re, a.im],
                beta: [b.re, b.im],
                expected,
                measured: st.residual_norm(Equation::Sylv)?,
            })
        })
        .collect()
}

/// Text rendering of [`scenario_shift_table`].
pub fn format_shift_table(rows: &[ShiftTableRow]) -> String {
    let mut s = String::from("alpha            beta             measured      expected      rel.err\n");
    for r in rows {
        s += &format!(
            "{:>5}±j{:<8} {:>5}±j{:<8} {:<13.6e} {:<13.6e} {:.2e}\n",
            r.alpha[0],
            r.alpha[1],
            r.beta[0],
            r.beta[1],
            r.measured,
            r.expected,
            r.relative_error()
        );
    }
    s
}

/// `‖X − Y‖₂ / ‖Y‖₂` through the factors (0 when both are empty).
pub fn relative_deviation(x: &LowRankSolution, y: &LowRankSolution) -> Result<f64> {
    let mid = |s: &LowRankSolution| s.middle.clone().unwrap_or_else(|| Mat::identity(s.rank(), s.rank()));
    let right = |s: &LowRankSolution| s.right.clone().unwrap_or_else(|| s.left.clone());
    let left = hcat(&x.left, &y.left);
    let middle = blkdiag(&mid(x), &(-mid(y)));
    let r = hcat(&right(x), &right(y));
    let diff = gram_norm2(&left, Some(&middle), Some(&r))?;
    let base = y.norm2()?;
    Ok(if base > 0.0 { diff / base } else { diff })
}

/// Per-equation deviations between the engine's extracted solutions and
/// independent classic runs with the same shifts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub shifts: usize,
    pub deviations: Vec<(String, f64)>,
}

impl EquivalenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|d| d.1).fold(0.0, f64::max)
    }
}

/// Runs UADI (P₁, Q₂, Sylvester, both LQG Riccati equations) next to
/// CF-ADI, FADI and RADI on the same shift lists (conjugates adjacent,
/// equal lengths) and compares the solutions.
pub fn equivalence_check(g1: &StateSpaceSystem, g2: &StateSpaceSystem, alpha: &[Complex64], beta: &[Complex64]) -> Result<EquivalenceReport> {
    let eqs = [Equation::P1, Equation::Q2, Equation::Sylv, Equation::Pricc, Equation::Qricc];
    let k = alpha.len();
    let mut report = EquivalenceReport { n: g1.n(), shifts: k, deviations: Vec::new() };
    if k == 0 {
        report.deviations = eqs.iter().map(|e| (e.name().to_string(), 0.0)).collect();
        return Ok(report);
    }
    let mut st = UadiState::with_defaults(g1.clone(), g2.clone(), EquationSelection::of(&eqs))?;
    st.run_static(alpha, beta, usize::MAX, 0.0)?;
    let classic = [
        cf_adi(g1, Side::Controllability, alpha, k, 0.0)?.solution,
        cf_adi(g2, Side::Observability, beta, k, 0.0)?.solution,
        fadi(g1, g2, alpha, beta, k, 0.0)?.solution,
        radi(g1, alpha, k, 0.0)?.solution,
        radi(&g2.dual(), beta, k, 0.0)?.solution,
    ];
    for (eq, reference) in eqs.into_iter().zip(&classic) {
        let x = st.extract_solution(eq)?;
        report.deviations.push((eq.name().into(), relative_deviation(&x, reference)?));
    }
    Ok(report)
}

/// Random shift lists of `len` positions each whose groups cycle through
/// the four realification cases (real/real, pair/pair, two reals/pair,
/// pair/two reals) in random order.
pub fn mixed_shift_pattern(len: usize, rng: &mut impl Rng) -> (Vec<Complex64>, Vec<Complex64>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let real = |rng: &mut dyn rand::RngCore| Complex64::new(-(0.2 + 5.0 * rng.random::<f64>()), 0.0);
    let pair = |rng: &mut dyn rand::RngCore| {
        let z = Complex64::new(-(0.2 + 3.0 * rng.random::<f64>()), 0.5 + 6.0 * rng.random::<f64>());
        [z, z.conj()]
    };
    while a.len() < len {
        let case = if len - a.len() == 1 { 0 } else { rng.random_range(0..4) };
        match case {
            0 => {
                a.push(real(rng));
                b.push(real(rng));
            }
            1 => {
                a.extend(pair(rng));
                b.extend(pair(rng));
            }
            2 => {
                a.extend([real(rng), real(rng)]);
                b.extend(pair(rng));
            }
            _ => {
                a.extend(pair(rng));
                b.extend([real(rng), real(rng)]);
            }
        }
    }
    (a, b)
}

/// Random stable pair of order `n` (with `n ± n/5` for the second system)
/// and a mixed shift pattern of `iters` positions, all from `seed`.
pub fn scenario_equivalence(seed: u64, n: usize, iters: usize) -> Result<EquivalenceReport> {
    if n > 200 {
        return Err(UadiError::InvalidSize(format!("equivalence scenario needs n <= 200, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n2 = (n as f64 * (0.8 + 0.4 * rng.random::<f64>())).round().max(1.0) as usize;
    let m = rng.random_range(1..=3);
    let p2 = m;
    let g1 = random_stable_system(n, m, rng.random_range(1..=3), None, seed.wrapping_mul(2));
    let g2 = random_stable_system(n2, rng.random_range(1..=3), p2, None, seed.wrapping_mul(2) + 1);
    let (a, b) = mixed_shift_pattern(iters, &mut rng);
    equivalence_check(&g1, &g2, &a, &b)
}
