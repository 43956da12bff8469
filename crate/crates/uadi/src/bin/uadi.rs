//! `uadi` command-line driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uadi::bench::{format_shift_table, run, scenario_equivalence, scenario_shift_table, RunConfig, ShiftSpec, SystemSource};
use uadi::engine::EquationSelection;
use uadi::shifts::DEFAULT_CAP;

#[derive(Parser)]
#[command(name = "uadi", version, about = "Unified low-rank ADI solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the unified iteration on a system pair.
    Solve {
        /// manifest path, `penzl:n,w1,w2,w3`, `illustrative`, `random:n,m,p[,d]` or `rlc:segments[,d]`
        #[arg(long)]
        sys1: SystemSource,
        #[arg(long)]
        sys2: SystemSource,
        /// comma-separated equation tags or `all`
        #[arg(long, default_value = "all")]
        equations: EquationSelection,
        /// `static:<file>`, `proj1`, `proj2`, `subspace`, `petrov-bt` or `sylv-alt`
        #[arg(long, default_value = "subspace")]
        shifts: ShiftSpec,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        restart_cap: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// directory for residuals.csv and summary.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Static-shift comparison on the illustrative pair.
    ShiftTable,
    /// Compare extracted solutions with the classic solvers.
    Equivalence {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        iters: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UADI_LOG", "error")).init();
    let cli = Cli::parse();
    match exec(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn exec(cmd: Cmd) -> uadi::Result<u8> {
    match cmd {
        Cmd::Solve { sys1, sys2, equations, shifts, max_iter, tol, restart_cap, seed, out } => {
            let cfg = RunConfig { sys1, sys2, equations, shifts, max_iter, tol, restart_cap, out_dir: out, seed };
            let rep = run(&cfg)?;
            println!("stop: {:?} after {} iterations ({} large solves, {:.2}s)", rep.stop, rep.iterations, rep.large_solves, rep.elapsed_secs);
            for s in &rep.equations {
                match s.residual {
                    Some(r) => println!("{:<6} {:.3e}  rank {}", s.equation, r, s.rank.unwrap_or(0)),
                    None => println!("{:<6} {}", s.equation, s.status),
                }
            }
            Ok(rep.exit_code() as u8)
        }
        Cmd::ShiftTable => {
            let rows = scenario_shift_table()?;
            print!("{}", format_shift_table(&rows));
            Ok(if rows.iter().all(|r| r.relative_error() <= 0.05) { 0 } else { 2 })
        }
        Cmd::Equivalence { seed, n, iters } => {
            let rep = scenario_equivalence(seed, n, iters)?;
            for (eq, d) in &rep.deviations {
                println!("{eq:<6} {d:.3e}");
            }
            let ok = rep.max_deviation() <= 1e-8;
            println!("{}", if ok { "PASS" } else { "FAIL" });
            Ok(if ok { 0 } else { 2 })
        }
    }
}
