//! The `mpckit` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a simulation stopped on
//! an infeasible optimization, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use crate::format::fmt_sig;
use crate::invariant_sets::{feasible_initial_set, max_stabilizing_set_with, InvariantSetError};
use crate::lp_qp::SolverError;
use crate::mpc::{build_lifted, closed_loop_simulate, MpcError, SimTrace};
use crate::polytope::PolytopeError;
use crate::riccati::{solve_dare, RiccatiError};
use crate::scenario::{Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mpckit", version, about = "Linear MPC toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the DARE for the scenario's system and weights.
    Dare { scenario: PathBuf },
    /// Compute the maximal stabilizing set of the origin.
    TerminalSet {
        scenario: PathBuf,
        /// Also write terminal_set.txt and terminal_set_log.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the set of feasible initial states for the scenario's horizon.
    FeasibleSet {
        scenario: PathBuf,
        /// Also write feasible_set.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the closed loop.
    Simulate {
        scenario: PathBuf,
        /// Steps whose predicted trajectory is written to prediction_<k>.csv.
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<usize>,
        /// Output directory; defaults to the scenario's out_dir. Without one,
        /// the trace is printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

fn is_numerical_polytope(e: &PolytopeError) -> bool {
    matches!(
        e,
        PolytopeError::Solver(_) | PolytopeError::ProjectionBlowup { .. }
    )
}

fn is_numerical_riccati(e: &RiccatiError) -> bool {
    !matches!(
        e,
        RiccatiError::Dimension { .. }
            | RiccatiError::NotSymmetric(_)
            | RiccatiError::NotPositiveSemidefinite(_)
            | RiccatiError::NotPositiveDefinite(_)
    )
}

fn is_numerical_mpc(e: &MpcError) -> bool {
    match e {
        MpcError::InvalidConfig(_) | MpcError::Dimension { .. } => false,
        MpcError::Polytope(p) => is_numerical_polytope(p),
        MpcError::Solver(s) => !matches!(s, SolverError::Dimension(_)),
        MpcError::Riccati(r) => is_numerical_riccati(r),
    }
}

fn is_numerical_invariant(e: &InvariantSetError) -> bool {
    match e {
        InvariantSetError::Polytope(p) => is_numerical_polytope(p),
        _ => false,
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let numerical = match &e {
            ScenarioError::NotConverged(_) => true,
            ScenarioError::Mpc(m) => is_numerical_mpc(m),
            ScenarioError::Riccati(r) => is_numerical_riccati(r),
            ScenarioError::InvariantSet(i) => is_numerical_invariant(i),
            _ => false,
        };
        if numerical {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<MpcError> for Failure {
    fn from(e: MpcError) -> Self {
        ScenarioError::Mpc(e).into()
    }
}

impl From<InvariantSetError> for Failure {
    fn from(e: InvariantSetError) -> Self {
        ScenarioError::InvariantSet(e).into()
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn matrix_text(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| fmt_sig(*v)).collect();
        out.push_str("  ");
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn run_dare(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let s = load(path)?;
    let t = solve_dare(&s.system()?, &s.weights()?).map_err(ScenarioError::from)?;
    let rounded: Vec<String> = (0..t.qf.nrows())
        .map(|i| {
            let row: Vec<String> = t.qf.row(i).iter().map(|v| format!("{v:.1}")).collect();
            format!("[{}]", row.join(", "))
        })
        .collect();
    writeln!(out, "Qf =\n{}", matrix_text(&t.qf))?;
    writeln!(out, "K =\n{}", matrix_text(&t.k))?;
    writeln!(out, "residual = {:e}", t.residual)?;
    writeln!(
        out,
        "closed_loop_spectral_radius = {}",
        fmt_sig(t.closed_loop_spectral_radius)
    )?;
    writeln!(out, "iterations = {}", t.iterations)?;
    writeln!(out, "Qf (1 decimal) = [{}]", rounded.join(", "))?;
    Ok(EXIT_OK)
}

fn run_terminal_set(
    path: &Path,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let s = load(path)?;
    let sys = s.system()?;
    let mut iterates: Vec<(usize, usize)> = Vec::new();
    let res = max_stabilizing_set_with(&sys, &s.state_set, &s.input_set, s.max_iter, |i, set| {
        iterates.push((i, set.num_rows()));
    })?;
    // One row per iterate; only the last can carry the convergence flag.
    let mut log = String::from("iteration,rows,converged\n");
    for (pos, (i, rows)) in iterates.iter().enumerate() {
        let flag = pos + 1 == iterates.len() && res.converged;
        log.push_str(&format!("{i},{rows},{}\n", u8::from(flag)));
    }
    let text = res.set.to_text();
    out.write_all(text.as_bytes())?;
    if let Some(dir) = out_dir {
        write_file(dir, "terminal_set.txt", &text)?;
        write_file(dir, "terminal_set_log.csv", &log)?;
    }
    if !res.converged {
        return Err(Failure::Numerical(format!(
            "stabilizing-set iteration did not converge in {} iterations",
            res.iterations
        )));
    }
    Ok(EXIT_OK)
}

fn run_feasible_set(
    path: &Path,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let s = load(path)?;
    let resolved = s.resolve()?;
    let set = feasible_initial_set(&build_lifted(&resolved.config))?;
    let text = set.to_text();
    out.write_all(text.as_bytes())?;
    if let Some(dir) = out_dir {
        write_file(dir, "feasible_set.txt", &text)?;
    }
    Ok(EXIT_OK)
}

/// `k,x1..xn,u1..um,cost,feasible`, one row per visited state.
///
/// A state whose optimization failed has empty input and cost fields and
/// `feasible = 0`; the final state of a completed run has empty input, cost
/// and flag fields.
pub fn trace_csv(trace: &SimTrace) -> String {
    let n = trace.states.first().map_or(0, |x| x.len());
    let m = trace.inputs.first().map_or(0, |u| u.len());
    let mut header = vec!["k".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=m.max(1)).map(|i| format!("u{i}")));
    header.push("cost".into());
    header.push("feasible".into());
    let mut out = header.join(",");
    out.push('\n');
    let m = m.max(1);
    for (k, x) in trace.states.iter().enumerate() {
        let mut fields = vec![k.to_string()];
        fields.extend(x.iter().map(|v| fmt_sig(*v)));
        match trace.inputs.get(k) {
            Some(u) => {
                fields.extend(u.iter().map(|v| fmt_sig(*v)));
                fields.push(fmt_sig(trace.costs[k]));
                fields.push("1".into());
            }
            None => {
                fields.extend((0..m + 1).map(|_| String::new()));
                fields.push(if trace.terminated_infeasible { "0" } else { "" }.into());
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// `i,x1..xn` for the predicted trajectory of step `k`.
pub fn prediction_csv(trace: &SimTrace, k: usize) -> Option<String> {
    let stacked = trace.predictions.get(k)?;
    let n = trace.states[0].len();
    let mut out = String::from("i");
    for j in 1..=n {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for i in 0..stacked.len() / n {
        let row: Vec<String> = stacked.rows(i * n, n).iter().map(|v| fmt_sig(*v)).collect();
        out.push_str(&format!("{i},{}\n", row.join(",")));
    }
    Some(out)
}

fn run_simulate(
    path: &Path,
    snapshots: &[usize],
    out_dir: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let s = load(path)?;
    let resolved = s.resolve()?;
    let schedule = s.reference_schedule()?;
    let trace = closed_loop_simulate(&resolved.config, &s.x0, s.steps, schedule.as_ref())?;
    let dir = out_dir.map(Path::to_path_buf).or_else(|| s.out_dir.clone());
    let csv = trace_csv(&trace);
    match &dir {
        Some(d) => {
            write_file(d, "trace.csv", &csv)?;
            for &k in snapshots {
                match prediction_csv(&trace, k) {
                    Some(text) => write_file(d, &format!("prediction_{k}.csv"), &text)?,
                    None => writeln!(
                        err,
                        "warning: no prediction for step {k}; the run has {} feasible steps",
                        trace.feasible_steps
                    )?,
                }
            }
        }
        None => {
            if !snapshots.is_empty() {
                return Err(Failure::Usage("--snapshots needs --out or out_dir".into()));
            }
            out.write_all(csv.as_bytes())?;
        }
    }
    match trace.infeasible_step() {
        Some(k) => {
            writeln!(
                err,
                "infeasible optimization at step {k} after {} feasible steps",
                trace.feasible_steps
            )?;
            Ok(EXIT_INFEASIBLE)
        }
        None => {
            if dir.is_some() {
                writeln!(out, "completed {} steps", trace.feasible_steps)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Runs a parsed command, writing results to `out` and diagnostics to `err`.
pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Dare { scenario } => run_dare(scenario, out),
        Command::TerminalSet { scenario, out: dir } => {
            run_terminal_set(scenario, dir.as_deref(), out)
        }
        Command::FeasibleSet { scenario, out: dir } => {
            run_feasible_set(scenario, dir.as_deref(), out)
        }
        Command::Simulate {
            scenario,
            snapshots,
            out: dir,
        } => run_simulate(scenario, snapshots, dir.as_deref(), out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command, &mut stdout.lock(), &mut stderr.lock()),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            }
        }
    }
}
